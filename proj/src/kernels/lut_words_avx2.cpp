#include <array>

#include "lutscope/bitsim.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

namespace lutscope::kernels {

// Same mux tree as the scalar kernel, four words per iteration.
__attribute__((target("avx2"))) void lut_eval_words_avx2(std::uint64_t init, unsigned k,
                                                         const std::uint64_t* const* in, std::uint64_t* out,
                                                         std::size_t words) {
  const unsigned n = 1u << k;
  __m256i v[64];
  const __m256i ones = _mm256_set1_epi64x(-1);
  const __m256i zero = _mm256_setzero_si256();
  std::size_t w = 0;
  for (; w + 4 <= words; w += 4) {
    for (unsigned j = 0; j < n; ++j) v[j] = ((init >> j) & 1u) ? ones : zero;
    for (unsigned i = 0, len = n; i < k; ++i, len >>= 1) {
      const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(in[i] + w));
      for (unsigned j = 0; j < len / 2; ++j)
        v[j] = _mm256_or_si256(_mm256_andnot_si256(x, v[2 * j]), _mm256_and_si256(x, v[2 * j + 1]));
    }
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + w), v[0]);
  }
  if (w < words) {
    std::array<const std::uint64_t*, 6> tail{};
    for (unsigned i = 0; i < k; ++i) tail[i] = in[i] + w;
    lut_eval_words_scalar(init, k, tail.data(), out + w, words - w);
  }
}

} // namespace lutscope::kernels

#else

namespace lutscope::kernels {

void lut_eval_words_avx2(std::uint64_t init, unsigned k, const std::uint64_t* const* in, std::uint64_t* out,
                         std::size_t words) {
  lut_eval_words_scalar(init, k, in, out, words);
}

} // namespace lutscope::kernels

#endif
