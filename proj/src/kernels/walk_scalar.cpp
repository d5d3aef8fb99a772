#include <algorithm>

#include "kernels/walk_kernel.hpp"

namespace rwre::kernels {

void chunk_scalar(Batch& batch, uint64_t t0, uint64_t t1) {
  for (Lane& ln : batch.lane) {
    if (!ln.active) continue;
    int32_t off = ln.off;
    int32_t hi = ln.relmax;
    int32_t lo = ln.relmin;
    uint32_t rights = ln.rights;
    uint32_t returns = ln.returns;
    uint64_t t = t0;
    while (t < t1) {
      const PhiloxBlock w = philox4x32(make_counter(t >> 2, Stream::Walk), ln.key);
      for (unsigned j = static_cast<unsigned>(t & 3); j < 4 && t < t1; ++j, ++t) {
        const bool right = w[j] <= ln.thr[off];
        off += right ? 1 : -1;
        rights += right;
        returns += off == ln.origin;
        hi = std::max(hi, off);
        lo = std::min(lo, off);
      }
    }
    ln.off = off;
    ln.relmax = hi;
    ln.relmin = lo;
    ln.rights = rights;
    ln.returns = returns;
  }
}

}  // namespace rwre::kernels
