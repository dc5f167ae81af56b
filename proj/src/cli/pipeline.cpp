#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lutscope/pipeline.hpp"

namespace lutscope {

bool PipelineResult::trojan_confirmed() const {
  for (const auto& p : proofs)
    if (p.status == ProofStatus::Fail && p.confirmed) return true;
  return false;
}

bool PipelineResult::any_unknown() const {
  for (const auto& p : proofs)
    if (p.status == ProofStatus::Unknown) return true;
  return false;
}

bool PipelineResult::mitigated() const {
  if (mitigations.empty()) return false;
  for (const auto& m : mitigations)
    if (!m.report.passed()) return false;
  return true;
}

namespace {

ProofResult prove_one(const Design& d, const Property& p, const PipelineConfig& cfg) {
  auto r = backtrace_chain(d, p, cfg.prove);
  if (r.status != ProofStatus::Unknown || cfg.bmc_depth == 0) return r;
  auto b = prove_bmc(d, p, cfg.bmc_depth, cfg.prove);
  return b.status == ProofStatus::Fail && b.confirmed ? b : r;
}

} // namespace

PipelineResult run_pipeline(const Netlist& n, const PipelineConfig& cfg) {
  PipelineResult out;
  const Design d = Design::build(n, cfg.roles);
  out.top = n.top_module().name;
  out.convergence = converge(d, cfg.converge);
  const auto& analysis = out.convergence.final;

  out.properties = extract_properties(d, analysis);
  for (const auto& p : out.properties) out.proofs.push_back(prove_one(d, p, cfg));

  std::vector<std::string> cells;
  if (cfg.all_low_coverage) {
    for (const auto& l : analysis.low_coverage) cells.push_back(l.cell);
  } else {
    cells = confirmed_trigger_luts(d, analysis, out.proofs);
  }
  if (cells.empty()) return out;

  out.plan = make_plan(d, analysis, cells);
  out.patched = apply_plan(d.netlist(), out.plan);
  const Design patched = Design::build(*out.patched, cfg.roles);
  EquivOptions eo;
  eo.conflict_budget = cfg.prove.conflict_budget;
  eo.seed = cfg.converge.seed;
  out.equiv_full = equivalence_check(d, patched, eo);
  for (const auto& e : out.plan.patches) eo.care[e.cell] = e.coverage;
  out.equiv_care = equivalence_check(d, patched, eo);

  for (std::size_t i = 0; i < out.properties.size(); ++i) {
    const auto& p = out.properties[i];
    const auto& r = out.proofs[i];
    if (p.kind != Property::Kind::Constant || r.status != ProofStatus::Fail || !r.confirmed || !r.trigger) continue;
    MitigationOptions mo = cfg.mitigation;
    mo.seed = cfg.converge.seed;
    out.mitigations.push_back(
        {p.id, p.constant.signal, verify_mitigation(d, patched, *r.trigger, p.constant.signal, mo)});
  }
  return out;
}

namespace {

std::string indent(const std::string& text, const std::string& pad) {
  std::string out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    out += pad + text.substr(start, end - start) + "\n";
    start = end + 1;
  }
  return out;
}

std::string property_text(const Property& p) {
  std::string s = emit_sva(p);
  while (!s.empty() && s.back() == '\n') s.pop_back();
  for (auto& c : s)
    if (c == '\n') c = ';';
  return s;
}

} // namespace

std::string render_report(const PipelineResult& r) {
  const auto& a = r.convergence.final;
  std::string o = fmt::format("lutscope report: {}\n\n", r.top);
  o += fmt::format("simulation: {} cycles, {}\n", a.trace_len,
                   r.convergence.converged ? fmt::format("converged after {} rounds", r.convergence.history.size())
                                           : std::string("schedule exhausted before convergence"));
  o += fmt::format("signals: {}, LUTs: {}\n\n", a.signal_count, a.lut_count);

  if (a.low_switch.empty() && a.low_coverage.empty()) {
    o += "no specious signals or LUTs\n";
  } else {
    o += fmt::format("low switching signals: {}\n", a.low_switch.size());
    for (const auto& s : a.low_switch)
      o += fmt::format("  {:<24} {:<18} value {}\n", s.signal, to_string(s.reason), to_char(s.value));
    o += fmt::format("low coverage LUTs: {}\n", a.low_coverage.size());
    for (const auto& l : a.low_coverage) {
      const unsigned bits = init_width(l.k);
      o += fmt::format("  {:<24} LUT{} INIT {} cover {} ({} uncovered)\n", l.cell, l.k, verilog_hex(l.init, bits),
                       verilog_hex(l.cover, bits), l.uncovered_count());
    }
  }

  if (!r.properties.empty()) {
    o += fmt::format("\nproperties: {}\n", r.properties.size());
    for (std::size_t i = 0; i < r.properties.size(); ++i) {
      const auto& pr = r.proofs[i];
      o += fmt::format("\n{}  {}\n", r.properties[i].id, property_text(r.properties[i]));
      o += fmt::format("  {} by {}{}\n", to_string(pr.status), pr.method,
                       pr.status == ProofStatus::Fail ? (pr.confirmed ? ", trigger confirmed by replay"
                                                                      : ", counterexample not reachable")
                                                      : "");
      if (!pr.note.empty()) o += fmt::format("  note: {}\n", pr.note);
      o += indent(render_proof_table(pr), "  ");
    }
  }

  o += "\n";
  if (r.plan.patches.empty()) {
    o += "patch plan: empty\n";
  } else {
    o += fmt::format("patch plan: {} LUT(s)\n", r.plan.patches.size());
    for (const auto& e : r.plan.patches) {
      const unsigned bits = init_width(e.k);
      o += fmt::format("  {:<24} {} -> {} (cover {})\n", e.cell, verilog_hex(e.old_init, bits),
                       verilog_hex(e.new_init, bits), verilog_hex(e.coverage, bits));
    }
  }
  if (r.equiv_full)
    o += fmt::format("equivalence (full): {}{}\n", to_string(r.equiv_full->status),
                     r.equiv_full->status == EquivStatus::Inequivalent
                         ? fmt::format(", test vector differs on {}", fmt::join(r.equiv_full->differing, ", "))
                         : "");
  if (r.equiv_care) o += fmt::format("equivalence (care set): {}\n", to_string(r.equiv_care->status));
  for (const auto& m : r.mitigations) {
    const auto& rep = m.report;
    o += fmt::format("mitigation {}: {}\n", m.signal, rep.passed() ? "PASS" : "FAIL");
    o += fmt::format("  original trigger {}, patched trigger {}, outputs {} on {} random vectors{}\n",
                     rep.original_fires ? "fires" : "did not activate", rep.patched_silent ? "stays low" : "fires",
                     rep.outputs_match ? "match" : "differ", rep.vectors_compared,
                     rep.mismatch.empty() ? "" : " (" + rep.mismatch + ")");
    if (rep.original_fires && !rep.patched_silent && rep.outputs_match)
      o += "  the patch only changes payload values; the trigger itself is still live\n";
  }

  o += fmt::format("\nverdict: {}\n", r.trojan_confirmed() ? "Trojan trigger confirmed"
                                      : r.any_unknown()    ? "inconclusive (proof budget exhausted)"
                                                           : "no confirmed trigger");
  return o;
}

std::string mitigation_to_json_text(const MitigationReport& r, const std::string& signal) {
  nlohmann::ordered_json j;
  j["trigger_signal"] = signal;
  j["original_fires"] = r.original_fires;
  j["patched_silent"] = r.patched_silent;
  j["outputs_match"] = r.outputs_match;
  j["vectors_compared"] = r.vectors_compared;
  j["mismatch"] = r.mismatch;
  j["passed"] = r.passed();
  if (!r.original_fires) j["note"] = "original did not activate; inconclusive";
  else if (!r.patched_silent && r.outputs_match) j["note"] = "payload-only patch; trigger still live";
  return j.dump(2);
}

std::string equivalence_to_json_text(const EquivResult& r) {
  nlohmann::ordered_json j;
  j["status"] = to_string(r.status);
  j["mode"] = r.mode;
  if (r.status == EquivStatus::Inequivalent) {
    j["vector"] = nlohmann::ordered_json::parse(r.vector.to_json_text());
    j["differing"] = r.differing;
    j["confirmed"] = r.confirmed;
    j["found_by_screen"] = r.found_by_screen;
  }
  return j.dump(2);
}

} // namespace lutscope
