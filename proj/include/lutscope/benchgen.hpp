#pragma once

// Synthetic Trojan benchmarks with known ground truth. Each generator writes
// LUT-level Verilog: a little benign logic around a planted trigger and
// payload. Generation is a pure function of its parameters.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lutscope/netlist.hpp"
#include "lutscope/sim.hpp"

namespace lutscope {

enum class Archetype : std::uint8_t { PatternLock, CounterLock, SdcPair };

std::string_view to_string(Archetype a);
Archetype archetype_from_string(std::string_view s);

struct BenchSpec {
  Archetype archetype = Archetype::PatternLock;
  unsigned width = 16;          ///< datapath width
  std::uint64_t pattern = 0;    ///< pattern-lock trigger input
  unsigned stages = 1;          ///< pattern-lock register stages (1 or 2)
  unsigned counter_bits = 8;    ///< counter-lock
  std::uint64_t threshold = 0;  ///< counter-lock
  std::uint64_t seed = 1;
};

struct GroundTruth {
  Archetype archetype = Archetype::PatternLock;
  BenchSpec spec;
  /// Net that goes to 1 when the Trojan is active ("Tj_Trig"); for the SDC
  /// pair there is no such net and this is empty.
  std::string trigger_signal;
  /// Sequence that activates the payload. For the SDC pair it starts from the
  /// unreachable register state dc1 = dc2 = 1, and `trigger_reachable` is false.
  Trigger trigger;
  bool trigger_reachable = true;
  std::vector<std::string> payload_cells;
  std::vector<std::string> expected_low_coverage_cells;
  /// Nets expected never to switch under random stimulus.
  std::vector<std::string> expected_low_switch;

  std::string to_json_text() const;
  static GroundTruth from_json_text(std::string_view text);
};

struct Bench {
  std::string text; ///< Verilog source
  Netlist netlist;
  GroundTruth truth;
};

/// Comparator tree on `data` raising the registered Tj_Trig when the input
/// equals `pattern` (after `stages` clock edges); payload LUTs XOR a hidden
/// constant onto `out` while it is high. Requires 1 <= width <= 32.
Bench gen_pattern_lock(unsigned width, std::uint64_t pattern, std::uint64_t seed, unsigned stages = 1);

/// Free-running counter with synchronous reset; Tj_Trig is high while
/// count == threshold, i.e. at cycle `threshold` after reset.
Bench gen_counter_lock(unsigned counter_bits, std::uint64_t threshold, std::uint64_t seed, unsigned width = 8);

/// Registered pair dc1/dc2 from mutually exclusive conditions; every output
/// goes through a payload LUT (INIT 16'haccc) that selects the key when both
/// are high.
Bench gen_sdc_pair(std::uint64_t seed, unsigned width = 8);

Bench generate(const BenchSpec& spec);

} // namespace lutscope
