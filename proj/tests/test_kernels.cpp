#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <vector>

#include "kernels/walk_kernel.hpp"
#include "rwre/envgen.hpp"

using namespace rwre;
using namespace rwre::kernels;

namespace {

struct Fixture {
  std::vector<uint32_t> thr;
  int32_t center;
  Batch batch{};
};

Fixture make_fixture(uint64_t seed, int32_t half, int active_mask) {
  Fixture f;
  f.center = half;
  CounterRng rng(seed, Stream::Aux);
  f.thr.resize(static_cast<size_t>(2 * half + 1));
  for (auto& t : f.thr) t = rng.next_u32();
  for (int i = 0; i < kLanes; ++i) {
    Lane& l = f.batch.lane[i];
    l.key = key_from_seed(seed * 131 + static_cast<uint64_t>(i));
    l.thr = f.thr.data() + f.center + (i - 8);
    l.origin = 8 - i;
    l.active = (active_mask >> i) & 1;
  }
  return f;
}

// one lane stepped by hand
void reference(Lane& l, uint64_t t0, uint64_t t1) {
  if (!l.active) return;
  for (uint64_t t = t0; t < t1; ++t) {
    const bool right = step_right(l.key, t, l.thr[l.off]);
    l.off += right ? 1 : -1;
    l.rights += right;
    l.returns += l.off == l.origin;
    l.relmax = std::max(l.relmax, l.off);
    l.relmin = std::min(l.relmin, l.off);
  }
}

bool same(const Lane& a, const Lane& b) {
  return a.off == b.off && a.relmax == b.relmax && a.relmin == b.relmin && a.rights == b.rights &&
         a.returns == b.returns;
}

}  // namespace

TEST_CASE("scalar kernel matches the single-lane reference") {
  for (uint64_t t0 : {0ull, 3ull, 1000ull, (1ull << 40) + 1}) {
    for (uint64_t len : {1ull, 5ull, 4096ull}) {
      Fixture f = make_fixture(t0 + len, 5000, 0xB7F5);
      Batch ref = f.batch;
      chunk_scalar(f.batch, t0, t0 + len);
      for (int i = 0; i < kLanes; ++i) {
        reference(ref.lane[i], t0, t0 + len);
        CHECK(same(f.batch.lane[i], ref.lane[i]));
      }
    }
  }
}

#if defined(RWRE_HAVE_AVX2)
TEST_CASE("avx2 kernel is bit-identical to scalar") {
  if (!__builtin_cpu_supports("avx2")) return;
  int cases = 0;
  for (uint64_t t0 : {0ull, 1ull, 2ull, 7ull, 4093ull, (1ull << 33) + 2}) {
    for (uint64_t len : {1ull, 2ull, 3ull, 9ull, 100ull, 4096ull}) {
      for (int mask : {0xFFFF, 0x0001, 0x8000, 0x5A5A, 0}) {
        Fixture a = make_fixture(t0 * 7 + len, 5000, mask);
        Fixture b = make_fixture(t0 * 7 + len, 5000, mask);
        chunk_scalar(a.batch, t0, t0 + len);
        chunk_avx2(b.batch, t0, t0 + len);
        for (int i = 0; i < kLanes; ++i) REQUIRE(same(a.batch.lane[i], b.batch.lane[i]));
        ++cases;
      }
    }
  }
  CHECK(cases == 180);
}

TEST_CASE("avx2 handles origin sentinel and extreme thresholds") {
  if (!__builtin_cpu_supports("avx2")) return;
  std::vector<uint32_t> thr(20001, 0xFFFFFFFFu);
  for (size_t i = 0; i < thr.size(); i += 3) thr[i] = 0;
  Batch a{};
  for (int i = 0; i < kLanes; ++i) {
    a.lane[i].key = key_from_seed(static_cast<uint64_t>(i));
    a.lane[i].thr = thr.data() + 10000;
    a.lane[i].origin = i % 2 ? INT32_MAX : 0;
    a.lane[i].active = 1;
  }
  Batch b = a;
  chunk_scalar(a, 11, 4000);
  chunk_avx2(b, 11, 4000);
  for (int i = 0; i < kLanes; ++i) {
    CHECK(same(a.lane[i], b.lane[i]));
    if (i % 2) CHECK(a.lane[i].returns == 0);
  }
}
#endif

TEST_CASE("dispatch honours the override") {
  ChunkFn fn = select_chunk_kernel();
  CHECK(fn != nullptr);
  std::printf("kernel: %s\n", chunk_kernel_name(fn));
}

TEST_CASE("kernel throughput") {
  Fixture f = make_fixture(1, 1 << 20, 0xFFFF);
  auto rate = [&](ChunkFn fn) {
    Batch b = f.batch;
    const auto t0 = std::chrono::steady_clock::now();
    const uint64_t chunks = 400;
    for (uint64_t c = 0; c < chunks; ++c) {
      fn(b, c * kMaxChunk, (c + 1) * kMaxChunk);
      for (auto& l : b.lane) {
        l.thr += l.off;
        l.origin -= l.off;
        l.off = 0;
      }
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return static_cast<double>(chunks * kMaxChunk * kLanes) / s;
  };
  const double scalar = rate(chunk_scalar);
  std::printf("scalar: %.3g steps/s\n", scalar);
  CHECK(scalar > 2e7);
#if defined(RWRE_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2")) {
    const double simd = rate(chunk_avx2);
    std::printf("avx2:   %.3g steps/s (x%.2f)\n", simd, simd / scalar);
    CHECK(simd > scalar);
  }
#endif
}
