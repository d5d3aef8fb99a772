#pragma once
// Counter-based random numbers: Philox4x32-10 plus the keying helpers used to
// address every random draw in the project by (seed, index, stream).

#include <array>
#include <cstdint>

namespace rwre {

using PhiloxCounter = std::array<uint32_t, 4>;
using PhiloxKey = std::array<uint32_t, 2>;
using PhiloxBlock = std::array<uint32_t, 4>;

namespace philox_detail {
inline constexpr uint32_t kMul0 = 0xD2511F53u;
inline constexpr uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr uint32_t kWeyl1 = 0xBB67AE85u;
}  // namespace philox_detail

/// Philox4x32 with 10 rounds (Salmon et al., SC'11). Pure function of
/// (counter, key); matches the Random123 reference implementation.
constexpr PhiloxBlock philox4x32(PhiloxCounter ctr, PhiloxKey key) noexcept {
  using namespace philox_detail;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    const uint64_t p0 = uint64_t{kMul0} * ctr[0];
    const uint64_t p1 = uint64_t{kMul1} * ctr[2];
    const auto hi0 = static_cast<uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<uint32_t>(p0);
    const auto hi1 = static_cast<uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Stream tags keep independent uses of one seed from colliding.
enum class Stream : uint32_t {
  Site = 0x51u,
  Walk = 0x57u,
  Balanced = 0xB1u,
  Ctrw = 0xC7u,
  Bootstrap = 0xB5u,
  Matrix = 0x4Du,
  Aux = 0xA0u,
};

/// SplitMix64 finalizer.
constexpr uint64_t mix64(uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Derives a 64-bit seed from a parent seed and up to three indices.
constexpr uint64_t derive_seed(uint64_t parent, uint64_t a, uint64_t b = 0,
                               uint64_t c = 0) noexcept {
  uint64_t h = mix64(parent ^ 0x243F6A8885A308D3ull);
  h = mix64(h ^ a);
  h = mix64(h ^ (b + 0x13198A2E03707344ull));
  h = mix64(h ^ (c + 0xA4093822299F31D0ull));
  return h;
}

constexpr PhiloxKey key_from_seed(uint64_t seed) noexcept {
  return {static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)};
}

constexpr PhiloxCounter make_counter(uint64_t index, Stream stream,
                                     uint32_t sub = 0) noexcept {
  return {static_cast<uint32_t>(index), static_cast<uint32_t>(index >> 32),
          static_cast<uint32_t>(stream), sub};
}

/// 53-bit uniform in [0, 1) from two words.
constexpr double unit_closed_open(uint32_t hi, uint32_t lo) noexcept {
  const uint64_t bits = ((uint64_t{hi} << 32) | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

/// 53-bit uniform in (0, 1]; safe for logarithms and negative powers.
constexpr double unit_open_closed(uint32_t hi, uint32_t lo) noexcept {
  const uint64_t bits = ((uint64_t{hi} << 32) | lo) >> 11;
  return static_cast<double>(bits + 1) * 0x1.0p-53;
}

/// Step threshold for a right-jump probability p in (0, 1]: a walk at the
/// site steps right iff its 32-bit uniform word u satisfies u <= threshold.
/// p == 1 maps to 0xFFFFFFFF (always right).
constexpr uint32_t step_threshold(double p) noexcept {
  if (p >= 1.0) return 0xFFFFFFFFu;
  if (p <= 0.0) return 0u;
  const double scaled = p * 4294967296.0;
  auto t = static_cast<uint64_t>(scaled);
  if (static_cast<double>(t) < scaled) ++t;  // ceil
  if (t == 0) t = 1;
  return static_cast<uint32_t>(t - 1);
}

/// Sequential view over a keyed counter stream; convenient for scalar code
/// that needs many draws (bootstrap, environment ensembles, CTRW events).
class CounterRng {
 public:
  CounterRng(uint64_t seed, Stream stream, uint32_t sub = 0) noexcept
      : key_(key_from_seed(seed)), stream_(stream), sub_(sub) {}

  uint32_t next_u32() noexcept {
    if (used_ == 4) refill();
    return block_[used_++];
  }
  double uniform() noexcept {
    const uint32_t hi = next_u32();
    return unit_closed_open(hi, next_u32());
  }
  double uniform_pos() noexcept {
    const uint32_t hi = next_u32();
    return unit_open_closed(hi, next_u32());
  }
  /// Uniform integer in [0, n) by rejection-free 64-bit multiply-high.
  uint64_t below(uint64_t n) noexcept {
    const uint64_t hi = next_u32();
    const uint64_t r = (hi << 32) | next_u32();
    return static_cast<uint64_t>((static_cast<unsigned __int128>(r) * n) >> 64);
  }

 private:
  void refill() noexcept {
    block_ = philox4x32(make_counter(counter_++, stream_, sub_), key_);
    used_ = 0;
  }

  PhiloxKey key_;
  Stream stream_;
  uint32_t sub_;
  uint64_t counter_ = 0;
  PhiloxBlock block_{};
  int used_ = 4;
};

}  // namespace rwre
