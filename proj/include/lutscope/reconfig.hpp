#pragma once

// Neutralizing a Trojan by rewriting LUT truth tables. Each patched entry
// flips exactly the INIT bits whose address was never observed, so the LUT
// behaves as before on every address seen during analysis.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lutscope/analysis.hpp"
#include "lutscope/design.hpp"
#include "lutscope/netlist.hpp"
#include "lutscope/prove.hpp"
#include "lutscope/sim.hpp"

namespace lutscope {

/// XNOR of INIT and coverage over the 2^k valid bits: covered bits keep
/// their value, uncovered bits are inverted.
std::uint64_t reconfigure_init(std::uint64_t init, std::uint64_t coverage, unsigned k);

struct PatchEntry {
  std::string cell;
  unsigned k = 0;
  std::uint64_t old_init = 0;
  std::uint64_t coverage = 0;
  std::uint64_t new_init = 0;
  bool operator==(const PatchEntry&) const = default;
};

struct PatchPlan {
  std::vector<PatchEntry> patches;

  std::string to_json_text() const;
  static PatchPlan from_json_text(std::string_view text);
  bool operator==(const PatchPlan&) const = default;
};

/// Plan for the named cells, which must all be low-coverage LUTs in `r`.
PatchPlan make_plan(const Design& d, const AnalysisResult& r, std::span<const std::string> cells);

/// Low-coverage LUTs whose output net is a goal of a failing proof with a
/// replay-confirmed trigger, in analysis order.
std::vector<std::string> confirmed_trigger_luts(const Design& d, const AnalysisResult& r,
                                                std::span<const ProofResult> proofs);

/// Error raised when a plan does not match the netlist it is applied to.
class StalePlanError : public Error {
public:
  using Error::Error;
};

/// Returns a flat copy of `n` with the plan applied. Throws StalePlanError
/// if a cell is missing, is not a LUT, or its INIT differs from old_init.
Netlist apply_plan(const Netlist& n, const PatchPlan& plan);

enum class EquivStatus : std::uint8_t { Equivalent, Inequivalent, Unknown };

std::string_view to_string(EquivStatus s);

struct EquivOptions {
  /// Restrict both designs to the observed addresses of these LUTs
  /// (cell -> coverage bitmap).
  std::map<std::string, std::uint64_t> care;
  std::uint64_t conflict_budget = 0;
  /// Random bit-parallel screen before SAT, in 64-pattern words (full mode
  /// only; 0 disables).
  std::size_t screen_words = 16;
  std::uint64_t seed = 1;
};

struct EquivResult {
  EquivStatus status = EquivStatus::Unknown;
  std::string mode; ///< "full" or "care-set"
  /// Distinguishing inputs and register values (one step) when inequivalent.
  Trigger vector;
  /// Outputs and register data inputs that differ under `vector`.
  std::vector<std::string> differing;
  /// `vector` was simulated on both designs and the difference observed.
  bool confirmed = false;
  bool found_by_screen = false;
};

/// Combinational miter over primary outputs and register data inputs, with
/// inputs and register outputs shared by name. Designs must have the same
/// ports and registers.
EquivResult equivalence_check(const Design& a, const Design& b, const EquivOptions& opts = {});

struct MitigationOptions {
  std::uint64_t random_vectors = 1000;
  std::uint64_t seed = 1;
  /// Steps simulated after the trigger sequence.
  std::uint64_t extra_steps = 2;
};

struct MitigationReport {
  bool original_fires = false;
  bool patched_silent = false;
  bool outputs_match = false;
  std::uint64_t vectors_compared = 0;
  std::string mismatch; ///< first differing output, if any
  bool passed() const { return original_fires && patched_silent && outputs_match; }
};

/// The trigger activates `trigger_signal` in the original but never in the
/// patched design, and primary outputs agree on random vectors that do not
/// activate the original trigger. Both random runs start with every register
/// at its reset value (0 without a reset).
MitigationReport verify_mitigation(const Design& original, const Design& patched, const Trigger& trigger,
                                   const std::string& trigger_signal, const MitigationOptions& opts = {});

} // namespace lutscope
