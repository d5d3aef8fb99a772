#include <immintrin.h>

#include "kernels/walk_kernel.hpp"

namespace rwre::kernels {
namespace {

struct Group {
  __m256i k0, k1;
  __m256i base_lo, base_hi;  // 64-bit threshold base addresses, lanes 0-3 and 4-7
  __m256i off, relmax, relmin, origin, rights, returns, active;
};

inline void mulhilo(__m256i a, __m256i m, __m256i& hi, __m256i& lo) {
  const __m256i pe = _mm256_mul_epu32(a, m);
  const __m256i po = _mm256_mul_epu32(_mm256_srli_epi64(a, 32), m);
  lo = _mm256_blend_epi32(pe, _mm256_slli_epi64(po, 32), 0xAA);
  hi = _mm256_blend_epi32(_mm256_srli_epi64(pe, 32), po, 0xAA);
}

inline void philox8(uint64_t block, __m256i k0, __m256i k1, __m256i out[4]) {
  const __m256i m0 = _mm256_set1_epi32(static_cast<int>(philox_detail::kMul0));
  const __m256i m1 = _mm256_set1_epi32(static_cast<int>(philox_detail::kMul1));
  const __m256i w0 = _mm256_set1_epi32(static_cast<int>(philox_detail::kWeyl0));
  const __m256i w1 = _mm256_set1_epi32(static_cast<int>(philox_detail::kWeyl1));
  __m256i c0 = _mm256_set1_epi32(static_cast<int>(static_cast<uint32_t>(block)));
  __m256i c1 = _mm256_set1_epi32(static_cast<int>(static_cast<uint32_t>(block >> 32)));
  __m256i c2 = _mm256_set1_epi32(static_cast<int>(Stream::Walk));
  __m256i c3 = _mm256_setzero_si256();
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k0 = _mm256_add_epi32(k0, w0);
      k1 = _mm256_add_epi32(k1, w1);
    }
    __m256i hi0, lo0, hi1, lo1;
    mulhilo(c0, m0, hi0, lo0);
    mulhilo(c2, m1, hi1, lo1);
    c0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0);
    c1 = lo1;
    c2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1);
    c3 = lo0;
  }
  out[0] = c0;
  out[1] = c1;
  out[2] = c2;
  out[3] = c3;
}

inline void load(const Batch& b, int first, Group& g) {
  alignas(32) uint32_t k0[8], k1[8];
  alignas(32) int32_t off[8], hi[8], lo[8], org[8], act[8];
  alignas(32) uint32_t rights[8], returns[8];
  alignas(32) int64_t base[8];
  for (int i = 0; i < 8; ++i) {
    const Lane& ln = b.lane[first + i];
    k0[i] = ln.key[0];
    k1[i] = ln.key[1];
    off[i] = ln.off;
    hi[i] = ln.relmax;
    lo[i] = ln.relmin;
    org[i] = ln.origin;
    act[i] = ln.active ? -1 : 0;
    rights[i] = ln.rights;
    returns[i] = ln.returns;
    base[i] = reinterpret_cast<int64_t>(ln.thr);
  }
  const auto ld = [](const void* p) { return _mm256_load_si256(static_cast<const __m256i*>(p)); };
  g.k0 = ld(k0);
  g.k1 = ld(k1);
  g.off = ld(off);
  g.relmax = ld(hi);
  g.relmin = ld(lo);
  g.origin = ld(org);
  g.active = ld(act);
  g.rights = ld(rights);
  g.returns = ld(returns);
  g.base_lo = ld(base);
  g.base_hi = ld(base + 4);
}

inline void store(Batch& b, int first, const Group& g) {
  alignas(32) int32_t off[8], hi[8], lo[8];
  alignas(32) uint32_t rights[8], returns[8];
  const auto st = [](void* p, __m256i v) { _mm256_store_si256(static_cast<__m256i*>(p), v); };
  st(off, g.off);
  st(hi, g.relmax);
  st(lo, g.relmin);
  st(rights, g.rights);
  st(returns, g.returns);
  for (int i = 0; i < 8; ++i) {
    Lane& ln = b.lane[first + i];
    if (!ln.active) continue;
    ln.off = off[i];
    ln.relmax = hi[i];
    ln.relmin = lo[i];
    ln.rights = rights[i];
    ln.returns = returns[i];
  }
}

inline void step(Group& g, __m256i word) {
  const __m256i idx_lo = _mm256_slli_epi64(_mm256_cvtepi32_epi64(_mm256_castsi256_si128(g.off)), 2);
  const __m256i idx_hi = _mm256_slli_epi64(_mm256_cvtepi32_epi64(_mm256_extracti128_si256(g.off, 1)), 2);
  const __m128i t_lo = _mm256_i64gather_epi32(nullptr, _mm256_add_epi64(g.base_lo, idx_lo), 1);
  const __m128i t_hi = _mm256_i64gather_epi32(nullptr, _mm256_add_epi64(g.base_hi, idx_hi), 1);
  const __m256i thr = _mm256_set_m128i(t_hi, t_lo);
  const __m256i right =
      _mm256_and_si256(_mm256_cmpeq_epi32(_mm256_max_epu32(word, thr), thr), g.active);
  const __m256i one = _mm256_set1_epi32(1);
  const __m256i delta =
      _mm256_and_si256(_mm256_sub_epi32(_mm256_setzero_si256(), _mm256_or_si256(right, one)), g.active);
  g.off = _mm256_add_epi32(g.off, delta);
  g.rights = _mm256_sub_epi32(g.rights, right);
  g.returns = _mm256_sub_epi32(
      g.returns, _mm256_and_si256(_mm256_cmpeq_epi32(g.off, g.origin), g.active));
  g.relmax = _mm256_max_epi32(g.relmax, g.off);
  g.relmin = _mm256_min_epi32(g.relmin, g.off);
}

}  // namespace

void chunk_avx2(Batch& batch, uint64_t t0, uint64_t t1) {
  Group a, b;
  load(batch, 0, a);
  load(batch, 8, b);
  uint64_t t = t0;
  while (t < t1) {
    __m256i wa[4], wb[4];
    philox8(t >> 2, a.k0, a.k1, wa);
    philox8(t >> 2, b.k0, b.k1, wb);
    unsigned j = static_cast<unsigned>(t & 3);
    const uint64_t left = t1 - t;
    const unsigned jend = left >= 4 - j ? 4u : j + static_cast<unsigned>(left);
    for (; j < jend; ++j) {
      step(a, wa[j]);
      step(b, wb[j]);
    }
    t = (t & ~uint64_t{3}) + jend;
  }
  store(batch, 0, a);
  store(batch, 8, b);
}

}  // namespace rwre::kernels
