#pragma once

// End-to-end flow from random simulation to a verified patch of the
// confirmed trigger LUTs.

#include <optional>
#include <string>
#include <vector>

#include "lutscope/analysis.hpp"
#include "lutscope/properties.hpp"
#include "lutscope/prove.hpp"
#include "lutscope/reconfig.hpp"

namespace lutscope {

struct PipelineConfig {
  PortRoles roles;
  ConvergeOptions converge;
  ProveOptions prove;
  /// Fallback BMC depth for chains that end UNKNOWN; 0 disables.
  unsigned bmc_depth = 0;
  /// Patch every low-coverage LUT instead of the confirmed trigger LUTs.
  bool all_low_coverage = false;
  MitigationOptions mitigation;
};

struct MitigationCheck {
  std::string property;
  std::string signal;
  MitigationReport report;
};

struct PipelineResult {
  std::string top;
  ConvergenceReport convergence;
  std::vector<Property> properties;
  std::vector<ProofResult> proofs; ///< parallel to properties
  PatchPlan plan;
  std::optional<Netlist> patched;
  std::optional<EquivResult> equiv_full;
  std::optional<EquivResult> equiv_care;
  std::vector<MitigationCheck> mitigations;

  /// Some proof failed with a trigger confirmed by replay.
  bool trojan_confirmed() const;
  bool any_unknown() const;
  /// Every mitigation check passed (false when there were none).
  bool mitigated() const;
};

PipelineResult run_pipeline(const Netlist& n, const PipelineConfig& cfg);

/// Deterministic text summary of a run.
std::string render_report(const PipelineResult& r);

std::string mitigation_to_json_text(const MitigationReport& r, const std::string& signal);
std::string equivalence_to_json_text(const EquivResult& r);

} // namespace lutscope
