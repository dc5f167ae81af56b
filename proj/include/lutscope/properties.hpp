#pragma once

// Invariants extracted from analysis findings: "signal stays constant" and
// "these LUT address combinations never occur". Uncovered address sets are
// minimized to prime-implicant cubes before being rendered as assertions.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lutscope/analysis.hpp"
#include "lutscope/design.hpp"

namespace lutscope {

/// Product term over LUT address lines. Line i appears when bit i of `mask`
/// is set, positively when bit i of `value` is also set.
struct Cube {
  std::uint64_t mask = 0;
  std::uint64_t value = 0;

  bool contains(std::uint64_t minterm) const { return (minterm & mask) == value; }
  unsigned literals() const;
  /// One character per line, highest line first: '1', '0' or '-'.
  std::string key(unsigned k) const;
  bool operator==(const Cube&) const = default;
};

/// All prime implicants of `onset` (bit m set = minterm m) by Quine-McCluskey.
std::vector<Cube> prime_implicants(unsigned k, std::uint64_t onset);

/// Exact minimum cover of `onset` by prime implicants: fewest cubes, then
/// fewest literals, then the lexicographically smallest sorted key list.
/// The result is sorted by key.
std::vector<Cube> minimize(unsigned k, std::uint64_t onset);

struct ConstantProperty {
  std::string signal;
  bool value = false;
  bool operator==(const ConstantProperty&) const = default;
};

struct NeverProperty {
  std::string cell;
  unsigned k = 0;
  std::uint64_t cover = 0;
  std::vector<std::string> lines; ///< signal on address line i
  std::vector<Cube> cubes;        ///< sorted by key; union = uncovered set
  std::uint64_t uncovered() const { return ~cover & width_mask(init_width(k)); }
  bool operator==(const NeverProperty&) const = default;
};

struct Property {
  enum class Kind : std::uint8_t { Constant, Never };
  Kind kind = Kind::Constant;
  std::string id;
  std::string source; ///< the finding it came from, e.g. "low_switch:Tj_Trig"
  ConstantProperty constant;
  NeverProperty never;
  bool operator==(const Property&) const = default;
};

/// Throws Error when `observed` is not 0 or 1.
Property extract_constant(const std::string& signal, LogicValue observed);

/// `lines` defaults to a0..a{k-1}. Throws Error if cover is full.
Property extract_coverage(const std::string& cell, unsigned k, std::uint64_t cover,
                          std::vector<std::string> lines = {});

/// Properties for every candidate-trigger signal and low-coverage LUT.
/// Constants, high-Z and unresolved signals are triaged out.
std::vector<Property> extract_properties(const Design& d, const AnalysisResult& r);

/// Cube as an expression: "dc1 & dc2", "~a0 & a1"; highest line first.
std::string cube_expression(const NeverProperty& p, const Cube& c);

/// One "assert (...)" line per constant or cube.
std::string emit_sva(const Property& p);

/// BLIF model whose single output is 1 exactly on the uncovered addresses.
std::string emit_blif(const std::string& cell, unsigned k, std::uint64_t cover,
                      const std::vector<std::string>& lines = {});

std::string properties_to_json_text(const std::vector<Property>& ps);
std::vector<Property> properties_from_json_text(std::string_view text);

} // namespace lutscope
