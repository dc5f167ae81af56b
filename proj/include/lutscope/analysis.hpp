#pragma once

// Switching and coverage analysis of simulation traces. A signal is "low
// switching" when it never makes a 0<->1 transition; a LUT is "low coverage"
// when some address combination never appears at a settled time step.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lutscope/design.hpp"
#include "lutscope/sim.hpp"

namespace lutscope {

/// Why a signal never switched.
enum class LowSwitchReason : std::uint8_t {
  Constant,         ///< structurally tied to a constant
  HighZ,            ///< undriven
  Unknown,          ///< never resolved to 0 or 1
  CandidateTrigger, ///< stuck at a logic value for no structural reason
};

std::string_view to_string(LowSwitchReason r);
LowSwitchReason low_switch_reason_from_string(std::string_view s);

struct LowSwitchSignal {
  std::string signal;
  LowSwitchReason reason = LowSwitchReason::CandidateTrigger;
  /// The value it held once resolved (X for Unknown, Z for HighZ).
  LogicValue value = LogicValue::X;
  bool operator==(const LowSwitchSignal&) const = default;
};

struct LowCoverageLut {
  std::string cell;
  std::string output; ///< net driven by the LUT
  unsigned k = 0;
  std::uint64_t init = 0;
  std::uint64_t cover = 0; ///< bit i set when address i was observed
  unsigned uncovered_count() const;
  bool operator==(const LowCoverageLut&) const = default;
};

struct AnalysisResult {
  std::uint64_t trace_len = 0;
  std::vector<LowSwitchSignal> low_switch;   ///< S, in net order
  std::vector<LowCoverageLut> low_coverage;  ///< L, in LUT order
  std::size_t signal_count = 0;
  std::size_t lut_count = 0;

  const LowSwitchSignal* find_signal(std::string_view name) const;
  const LowCoverageLut* find_lut(std::string_view cell) const;
  bool operator==(const AnalysisResult&) const = default;
};

/// Incremental form of analyze(): feed a trace in time order, query any time.
class Analyzer {
public:
  /// Throws Error when a trace signal is not a net of `d`.
  Analyzer(const Design& d, std::span<const std::string> trace_signals);

  /// Consumes events up to (excluding) time `length`. Events must be sorted
  /// and not earlier than the previous call's length.
  void consume(std::span<const Event> events, std::uint64_t length);

  std::uint64_t length() const { return length_; }
  /// Coverage bitvector of every LUT, in LUT order.
  const std::vector<std::uint64_t>& covers() const { return cover_; }
  AnalysisResult result() const;

private:
  void sample(std::uint32_t lut);

  const Design& d_;
  std::vector<NetId> signal_net_;
  std::vector<LogicValue> value_;
  std::vector<std::uint8_t> seen_; // bit0: seen 0, bit1: seen 1, bit2: seen Z
  std::vector<std::uint64_t> cover_;
  std::vector<char> structural_const_;
  std::vector<char> pending_flag_;
  std::vector<std::uint32_t> pending_;
  std::uint64_t length_ = 0;
  bool started_ = false;
};

AnalysisResult analyze(const Design& d, const EventTrace& t);

/// Nets whose value is fixed by constant drivers alone.
std::vector<char> structural_constants(const Design& d);

struct ConvergenceRound {
  std::uint64_t length = 0;
  std::size_t low_switch = 0;
  std::size_t low_coverage = 0;
  bool operator==(const ConvergenceRound&) const = default;
};

struct ConvergenceReport {
  std::vector<ConvergenceRound> history;
  bool converged = false;
  AnalysisResult final;
  bool operator==(const ConvergenceReport&) const = default;
};

struct ConvergeOptions {
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> schedule = {10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000};
  /// Rounds with identical S and L needed to stop.
  int stable_rounds = 3;
  /// Keep going after convergence (report every scheduled length).
  bool run_full_schedule = false;
};

/// Random simulation over increasing trace lengths until S and L stop changing.
/// Every length reuses the same stimulus prefix; simulation and analysis
/// resume where the previous length ended.
ConvergenceReport converge(const Design& d, const ConvergeOptions& opts);

/// JSON report; `conv` adds the convergence flag and history.
std::string analysis_to_json_text(const AnalysisResult& r, const ConvergenceReport* conv = nullptr);
AnalysisResult analysis_from_json_text(std::string_view text);

} // namespace lutscope
