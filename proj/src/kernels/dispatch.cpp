#include <cstdlib>
#include <cstring>

#include "kernels/walk_kernel.hpp"

namespace rwre::kernels {

ChunkFn select_chunk_kernel() {
  const char* env = std::getenv("RWRE_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return &chunk_scalar;
#if defined(RWRE_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2")) return &chunk_avx2;
#endif
  return &chunk_scalar;
}

const char* chunk_kernel_name(ChunkFn fn) {
#if defined(RWRE_HAVE_AVX2)
  if (fn == &chunk_avx2) return "avx2";
#endif
  return fn == &chunk_scalar ? "scalar" : "unknown";
}

}  // namespace rwre::kernels
