#pragma once

// Two-valued, bit-parallel evaluation: each 64-bit word carries 64 independent
// input patterns. Used for exhaustive cone enumeration and random screening,
// where the four-valued event simulator would be needlessly slow.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "lutscope/design.hpp"

namespace lutscope {

enum class KernelIsa : std::uint8_t { Scalar, Avx2 };

std::string_view to_string(KernelIsa isa);

/// Best kernel supported by the running CPU.
KernelIsa detected_isa();
/// Kernel used by lut_eval_words; defaults to detected_isa().
KernelIsa active_isa();
/// Forces a kernel (tests and benchmarks). Throws Error if unsupported.
void set_active_isa(KernelIsa isa);

/// out[w] = LUT(init)(in[0][w], ..., in[k-1][w]) bitwise, for w < words.
void lut_eval_words(std::uint64_t init, unsigned k, const std::uint64_t* const* in, std::uint64_t* out,
                    std::size_t words);

namespace kernels {
void lut_eval_words_scalar(std::uint64_t init, unsigned k, const std::uint64_t* const* in, std::uint64_t* out,
                           std::size_t words);
void lut_eval_words_avx2(std::uint64_t init, unsigned k, const std::uint64_t* const* in, std::uint64_t* out,
                         std::size_t words);
} // namespace kernels

/// Combinational evaluator of a whole design over pattern words. Primary
/// inputs and DFF outputs are free; LUTs are evaluated in topological order.
class BitSim {
public:
  BitSim(const Design& d, std::size_t words);

  std::size_t words() const { return words_; }
  /// Pattern words of a net (words() entries).
  std::span<std::uint64_t> net(NetId n) { return {values_.data() + n * words_, words_}; }
  std::span<const std::uint64_t> net(NetId n) const { return {values_.data() + n * words_, words_}; }

  /// Recomputes every LUT output from the current input/DFF words.
  void evaluate();
  /// Only the LUTs in `luts` (must be topologically ordered).
  void evaluate(std::span<const std::uint32_t> luts);

  /// Overrides the INIT of one LUT (for patched copies sharing a Design).
  void set_init(std::uint32_t lut, std::uint64_t init) { inits_[lut] = init; }

private:
  const Design& d_;
  std::size_t words_;
  std::vector<std::uint64_t> values_;
  std::vector<std::uint64_t> inits_;
};

/// Fills `words` so that pattern p (bit p%64 of word p/64) assigns bit `var`
/// of the integer p: the canonical exhaustive enumeration of 2^n patterns.
void fill_enumeration(std::span<std::uint64_t> words, unsigned var, std::uint64_t first_pattern = 0);

} // namespace lutscope
