#include <array>
#include <atomic>

#include <fmt/format.h>

#include "lutscope/bitsim.hpp"

namespace lutscope {

namespace kernels {

// Mux-tree reduction: the 2^k INIT constants are halved once per address
// line, line 0 first, so the survivor is the selected entry.
void lut_eval_words_scalar(std::uint64_t init, unsigned k, const std::uint64_t* const* in, std::uint64_t* out,
                           std::size_t words) {
  std::array<std::uint64_t, 64> v;
  const unsigned n = 1u << k;
  for (std::size_t w = 0; w < words; ++w) {
    for (unsigned j = 0; j < n; ++j) v[j] = ((init >> j) & 1u) ? ~std::uint64_t{0} : 0;
    for (unsigned i = 0, len = n; i < k; ++i, len >>= 1) {
      const std::uint64_t x = in[i][w];
      for (unsigned j = 0; j < len / 2; ++j) v[j] = (v[2 * j] & ~x) | (v[2 * j + 1] & x);
    }
    out[w] = v[0];
  }
}

} // namespace kernels

namespace {

std::atomic<KernelIsa> g_isa{detected_isa()};

} // namespace

std::string_view to_string(KernelIsa isa) { return isa == KernelIsa::Avx2 ? "avx2" : "scalar"; }

KernelIsa detected_isa() {
#if defined(__x86_64__) || defined(__i386__)
  if (__builtin_cpu_supports("avx2")) return KernelIsa::Avx2;
#endif
  return KernelIsa::Scalar;
}

KernelIsa active_isa() { return g_isa.load(std::memory_order_relaxed); }

void set_active_isa(KernelIsa isa) {
  if (isa == KernelIsa::Avx2 && detected_isa() != KernelIsa::Avx2)
    throw Error(fmt::format("kernel '{}' is not supported on this CPU", to_string(isa)));
  g_isa.store(isa, std::memory_order_relaxed);
}

void lut_eval_words(std::uint64_t init, unsigned k, const std::uint64_t* const* in, std::uint64_t* out,
                    std::size_t words) {
  if (k == 0 || k > 6) throw Error(fmt::format("lut_eval_words: {} address lines", k));
  if (active_isa() == KernelIsa::Avx2) kernels::lut_eval_words_avx2(init, k, in, out, words);
  else kernels::lut_eval_words_scalar(init, k, in, out, words);
}

void fill_enumeration(std::span<std::uint64_t> words, unsigned var, std::uint64_t first_pattern) {
  // Within a word, variables 0..5 follow fixed masks; higher ones are constant per word.
  static constexpr std::uint64_t kMasks[6] = {0xAAAAAAAAAAAAAAAAull, 0xCCCCCCCCCCCCCCCCull, 0xF0F0F0F0F0F0F0F0ull,
                                              0xFF00FF00FF00FF00ull, 0xFFFF0000FFFF0000ull, 0xFFFFFFFF00000000ull};
  if (first_pattern % 64 != 0) throw Error("fill_enumeration: first pattern must be word aligned");
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (var < 6) {
      words[w] = kMasks[var];
    } else {
      std::uint64_t p = first_pattern + 64 * w;
      words[w] = var < 64 && ((p >> var) & 1u) ? ~std::uint64_t{0} : 0;
    }
  }
}

} // namespace lutscope
