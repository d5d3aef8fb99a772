#pragma once
// Nearest-neighbour walk step kernels. A batch advances up to kLanes walks in
// lock step over a range of step indices [t0, t1); lane i draws the word for
// step t from Philox(counter = (t/4, Walk), key_i), word t%4.

#include <cstdint>

#include "rwre/philox.hpp"

namespace rwre::kernels {

inline constexpr int kLanes = 16;
inline constexpr int64_t kMaxChunk = 4096;

struct Lane {
  PhiloxKey key{};
  const uint32_t* thr = nullptr;  // thresholds, thr[off] is the site at offset off
  int32_t off = 0;                // offset from the chunk start position
  int32_t relmax = 0;
  int32_t relmin = 0;
  int32_t origin = 0;             // offset of site 0
  uint32_t rights = 0;            // right steps taken in the chunk
  uint32_t returns = 0;           // visits to site 0 in the chunk
  uint32_t active = 0;            // 0 freezes the lane
};

struct Batch {
  Lane lane[kLanes];
};

using ChunkFn = void (*)(Batch& batch, uint64_t t0, uint64_t t1);

void chunk_scalar(Batch& batch, uint64_t t0, uint64_t t1);
#if defined(RWRE_HAVE_AVX2)
void chunk_avx2(Batch& batch, uint64_t t0, uint64_t t1);
#endif

/// Kernel chosen for this CPU; RWRE_SIMD=scalar|avx2 overrides.
ChunkFn select_chunk_kernel();
const char* chunk_kernel_name(ChunkFn fn);

/// Single-lane scalar step: true for a right step.
inline bool step_right(const PhiloxKey& key, uint64_t t, uint32_t threshold) {
  const PhiloxBlock w = philox4x32(make_counter(t >> 2, Stream::Walk), key);
  return w[t & 3] <= threshold;
}

}  // namespace rwre::kernels
