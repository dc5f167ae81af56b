#include <algorithm>
#include <bit>
#include <functional>
#include <random>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lutscope/bitsim.hpp"
#include "lutscope/reconfig.hpp"

namespace lutscope {

std::uint64_t reconfigure_init(std::uint64_t init, std::uint64_t coverage, unsigned k) {
  if (k < 1 || k > 6) throw Error(fmt::format("LUT size {} out of range 1..6", k));
  return ~(init ^ coverage) & width_mask(init_width(k));
}

std::string PatchPlan::to_json_text() const {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& p : patches) {
    const unsigned bits = init_width(p.k);
    nlohmann::ordered_json j;
    j["cell"] = p.cell;
    j["k"] = p.k;
    j["old_init_hex"] = to_hex(p.old_init, bits);
    j["coverage_hex"] = to_hex(p.coverage, bits);
    j["new_init_hex"] = to_hex(p.new_init, bits);
    arr.push_back(j);
  }
  nlohmann::ordered_json root;
  root["patches"] = arr;
  return root.dump(2);
}

PatchPlan PatchPlan::from_json_text(std::string_view text) {
  PatchPlan plan;
  try {
    auto root = nlohmann::json::parse(text);
    for (const auto& j : root.at("patches")) {
      PatchEntry e;
      e.cell = j.at("cell").get<std::string>();
      e.k = j.at("k").get<unsigned>();
      if (e.k < 1 || e.k > 6) throw Error(fmt::format("plan entry '{}': bad k", e.cell));
      const unsigned bits = init_width(e.k);
      e.old_init = parse_hex(j.at("old_init_hex").get<std::string>(), bits);
      e.coverage = parse_hex(j.at("coverage_hex").get<std::string>(), bits);
      e.new_init = parse_hex(j.at("new_init_hex").get<std::string>(), bits);
      if (e.new_init != reconfigure_init(e.old_init, e.coverage, e.k))
        throw Error(fmt::format("plan entry '{}': new INIT is not the reconfiguration of old INIT", e.cell));
      plan.patches.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("plan: {}", e.what()));
  }
  return plan;
}

PatchPlan make_plan(const Design& d, const AnalysisResult& r, std::span<const std::string> cells) {
  PatchPlan plan;
  std::set<std::string> done;
  for (const auto& cell : cells) {
    if (!done.insert(cell).second) continue;
    const auto* l = r.find_lut(cell);
    if (!l) throw Error(fmt::format("'{}' is not a low-coverage LUT", cell));
    auto li = d.find_lut(cell);
    if (!li) throw Error(fmt::format("design has no LUT '{}'", cell));
    const auto& lut = d.luts()[*li];
    if (lut.init != l->init || lut.k != l->k)
      throw Error(fmt::format("analysis of '{}' does not match the design", cell));
    plan.patches.push_back({cell, lut.k, lut.init, l->cover, reconfigure_init(lut.init, l->cover, lut.k)});
  }
  return plan;
}

std::vector<std::string> confirmed_trigger_luts(const Design& d, const AnalysisResult& r,
                                                std::span<const ProofResult> proofs) {
  std::set<std::string> targets;
  for (const auto& p : proofs) {
    if (p.status != ProofStatus::Fail || !p.confirmed) continue;
    for (const auto& s : p.steps)
      for (const auto& t : s.targets) targets.insert(t);
  }
  std::vector<std::string> out;
  for (const auto& l : r.low_coverage) {
    auto li = d.find_lut(l.cell);
    if (li && targets.count(d.net(d.luts()[*li].out).name)) out.push_back(l.cell);
  }
  return out;
}

Netlist apply_plan(const Netlist& n, const PatchPlan& plan) {
  Netlist out = n.is_flat() ? n : flatten(n);
  auto& top = out.top_module();
  for (const auto& p : plan.patches) {
    Cell* c = top.find_cell(p.cell);
    if (!c) throw StalePlanError(fmt::format("stale plan: no cell '{}'", p.cell));
    if (c->kind != CellKind::Lut) throw StalePlanError(fmt::format("stale plan: '{}' is not a LUT", p.cell));
    if (c->lut_size() != p.k)
      throw StalePlanError(fmt::format("stale plan: '{}' has {} inputs, plan says {}", p.cell, c->lut_size(), p.k));
    if (c->init != p.old_init)
      throw StalePlanError(fmt::format("stale plan: '{}' INIT is {}, plan expects {}", p.cell,
                                       verilog_hex(c->init, init_width(p.k)), verilog_hex(p.old_init, init_width(p.k))));
    c->init = p.new_init;
  }
  return out;
}

std::string_view to_string(EquivStatus s) {
  switch (s) {
    case EquivStatus::Equivalent: return "EQUIVALENT";
    case EquivStatus::Inequivalent: return "INEQUIVALENT";
    case EquivStatus::Unknown: return "UNKNOWN";
  }
  return "?";
}

namespace {

// Points compared by the miter: output bits and register data inputs,
// paired by name.
struct Compare {
  std::string label;
  NetId a;
  NetId b;
  std::optional<std::size_t> dff_a, dff_b;
};

std::vector<Compare> compare_points(const Design& a, const Design& b) {
  std::vector<Compare> out;
  const auto oa = a.output_bits(), ob = b.output_bits();
  if (oa.size() != ob.size()) throw Error("equivalence: designs have different outputs");
  for (std::size_t i = 0; i < oa.size(); ++i) {
    if (a.net(oa[i]).name != b.net(ob[i]).name) throw Error("equivalence: output names differ");
    out.push_back({a.net(oa[i]).name, oa[i], ob[i], std::nullopt, std::nullopt});
  }
  if (a.dffs().size() != b.dffs().size()) throw Error("equivalence: designs have different registers");
  for (std::size_t i = 0; i < a.dffs().size(); ++i) {
    auto j = b.find_dff(a.dffs()[i].name);
    if (!j) throw Error(fmt::format("equivalence: register '{}' missing", a.dffs()[i].name));
    out.push_back({a.dffs()[i].name + ".D", a.dffs()[i].d, b.dffs()[*j].d, i, *j});
  }
  return out;
}

// Leaves shared between the two copies: stimulus inputs and register
// outputs by name. Anything else a cone reaches stays free per copy.
std::vector<std::pair<NetId, NetId>> shared_leaves(const Design& a, const Design& b) {
  std::vector<std::pair<NetId, NetId>> out;
  for (NetId n : a.stimulus_inputs()) {
    auto m = b.find_net(a.net(n).name);
    if (!m || b.net(*m).driver != Design::DriverKind::Input)
      throw Error(fmt::format("equivalence: input '{}' missing", a.net(n).name));
    out.emplace_back(n, *m);
  }
  for (const auto& r : a.dffs()) {
    auto j = b.find_dff(r.name);
    if (!j) throw Error(fmt::format("equivalence: register '{}' missing", r.name));
    out.emplace_back(r.q, b.dffs()[*j].q);
  }
  return out;
}

// Runs one step of both designs from the vector's register values and
// lists compare points whose values differ.
std::vector<std::string> dual_simulate(const Design& a, const Design& b, const Trigger& v,
                                       const std::vector<Compare>& points) {
  auto run = [&v](const Design& d, std::vector<LogicValue>& vals, std::vector<LogicValue>& next) {
    Simulator sim(d);
    for (std::size_t i = 0; i < d.dffs().size(); ++i) {
      auto it = v.initial_state.find(d.net(d.dffs()[i].q).name);
      sim.set_initial_state(i, it == v.initial_state.end() ? LogicValue::Zero : it->second);
    }
    std::vector<LogicValue> row;
    for (NetId n : d.stimulus_inputs()) {
      LogicValue x = LogicValue::Zero;
      if (!v.steps.empty()) {
        auto it = v.steps[0].find(d.net(n).name);
        if (it != v.steps[0].end()) x = it->second;
      }
      row.push_back(x);
    }
    std::vector<Event> ev;
    sim.step(row, ev);
    vals.assign(sim.values().begin(), sim.values().end());
    next.assign(sim.next_state().begin(), sim.next_state().end());
  };
  std::vector<LogicValue> va, na, vb, nb;
  run(a, va, na);
  run(b, vb, nb);
  std::vector<std::string> out;
  for (const auto& p : points) {
    const LogicValue x = p.dff_a ? na[*p.dff_a] : va[p.a];
    const LogicValue y = p.dff_b ? nb[*p.dff_b] : vb[p.b];
    if (x != y) out.push_back(p.label);
  }
  return out;
}

Trigger vector_from(const Design& a, const std::vector<std::pair<NetId, NetId>>& leaves,
                    const std::function<bool(std::size_t)>& value_of) {
  Trigger v;
  v.steps.resize(1);
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const NetId n = leaves[i].first;
    const auto& name = a.net(n).name;
    if (a.net(n).driver == Design::DriverKind::Dff)
      v.initial_state[name] = from_bool(value_of(i));
    else
      v.steps[0][name] = from_bool(value_of(i));
  }
  return v;
}

} // namespace

EquivResult equivalence_check(const Design& a, const Design& b, const EquivOptions& opts) {
  EquivResult res;
  res.mode = opts.care.empty() ? "full" : "care-set";
  const auto points = compare_points(a, b);
  const auto leaves = shared_leaves(a, b);

  if (opts.care.empty() && opts.screen_words > 0) {
    BitSim sa(a, opts.screen_words), sb(b, opts.screen_words);
    std::mt19937_64 rng(opts.seed);
    for (const auto& [na, nb] : leaves) {
      auto wa = sa.net(na), wb = sb.net(nb);
      for (std::size_t w = 0; w < wa.size(); ++w) wa[w] = wb[w] = rng();
    }
    sa.evaluate();
    sb.evaluate();
    for (const auto& p : points) {
      auto wa = sa.net(p.a), wb = sb.net(p.b);
      for (std::size_t w = 0; w < wa.size(); ++w) {
        const std::uint64_t diff = wa[w] ^ wb[w];
        if (!diff) continue;
        const unsigned bit = static_cast<unsigned>(std::countr_zero(diff));
        auto v = vector_from(a, leaves, [&](std::size_t i) { return (sa.net(leaves[i].first)[w] >> bit) & 1u; });
        auto differing = dual_simulate(a, b, v, points);
        if (differing.empty()) continue;
        res.status = EquivStatus::Inequivalent;
        res.vector = std::move(v);
        res.differing = std::move(differing);
        res.confirmed = true;
        res.found_by_screen = true;
        return res;
      }
    }
  }

  SatSolver s;
  FrameEncoder ea(a, s), eb(b, s);
  auto fa = ea.new_frame(), fb = eb.new_frame();
  std::vector<Lit> leaf_lits;
  for (const auto& [na, nb] : leaves) {
    const Lit v = Lit::pos(ea.new_var());
    ea.bind(fa, na, v);
    eb.bind(fb, nb, v);
    leaf_lits.push_back(v);
  }
  std::vector<Lit> any;
  for (const auto& p : points) {
    const Lit x = ea.net(fa, p.a), y = eb.net(fb, p.b);
    const Lit m = Lit::pos(ea.new_var());
    // m -> x != y
    ea.add({~m, x, y});
    ea.add({~m, ~x, ~y});
    any.push_back(m);
  }
  if (any.empty()) {
    res.status = EquivStatus::Equivalent;
    return res;
  }
  ea.add(any);
  auto restrict = [&](const Design& d, FrameEncoder& enc, FrameEncoder::Frame& f) {
    for (const auto& [cell, cover] : opts.care) {
      auto li = d.find_lut(cell);
      if (!li) throw Error(fmt::format("equivalence: care set names unknown LUT '{}'", cell));
      const auto& lut = d.luts()[*li];
      std::vector<Lit> lines;
      for (NetId n : lut.inputs()) lines.push_back(enc.net(f, n));
      for (std::uint64_t m = 0; m < init_width(lut.k); ++m) {
        if ((cover >> m) & 1u) continue;
        std::vector<Lit> c;
        for (unsigned i = 0; i < lut.k; ++i) c.push_back(((m >> i) & 1u) ? ~lines[i] : lines[i]);
        enc.add(c);
      }
    }
  };
  restrict(a, ea, fa);
  restrict(b, eb, fb);

  const auto st = s.solve({}, opts.conflict_budget);
  if (st == SatStatus::Unknown) return res;
  if (st == SatStatus::Unsat) {
    res.status = EquivStatus::Equivalent;
    return res;
  }
  res.status = EquivStatus::Inequivalent;
  res.vector = vector_from(a, leaves, [&](std::size_t i) { return s.model_value(leaf_lits[i]); });
  res.differing = dual_simulate(a, b, res.vector, points);
  res.confirmed = !res.differing.empty();
  return res;
}

namespace {

void start_from_reset(const Design& d, Simulator& sim) {
  for (std::size_t i = 0; i < d.dffs().size(); ++i)
    sim.set_initial_state(i, from_bool(d.dffs()[i].reset && d.dffs()[i].reset_value));
}

} // namespace

MitigationReport verify_mitigation(const Design& original, const Design& patched, const Trigger& trigger,
                                   const std::string& trigger_signal, const MitigationOptions& opts) {
  MitigationReport rep;
  rep.original_fires = trigger_fires(original, trigger, replay(original, trigger));

  auto tn = patched.find_net(trigger_signal);
  if (!tn) throw Error(fmt::format("patched design has no signal '{}'", trigger_signal));
  const auto pt = replay(patched, trigger, {.fill = LogicValue::Zero, .extra_steps = opts.extra_steps});
  rep.patched_silent = !trigger_fires(patched, trigger, pt);
  if (auto idx = pt.find_signal(patched.net(*tn).name)) {
    for (std::uint64_t t = 0; t < pt.length; ++t)
      if (pt.value_at(*idx, t) != LogicValue::Zero) rep.patched_silent = false;
  }

  auto on = original.find_net(trigger_signal);
  if (!on) throw Error(fmt::format("original design has no signal '{}'", trigger_signal));
  const auto outs_a = original.output_bits();
  const auto outs_b = patched.output_bits();
  if (outs_a.size() != outs_b.size()) throw Error("mitigation: designs have different outputs");

  // Outputs are compared cycle by cycle from the reset state. When the
  // original trigger activates, that run is cut off and a fresh one begins,
  // so only non-trigger vectors are counted.
  std::uint64_t segment = 0;
  while (rep.vectors_compared < opts.random_vectors && rep.mismatch.empty()) {
    if (segment > 16 + 4 * opts.random_vectors) {
      rep.mismatch = "random vectors keep activating the original trigger";
      return rep;
    }
    const std::uint64_t want = opts.random_vectors - rep.vectors_compared;
    const auto stim = random_stimulus(original, opts.seed + segment++ * 0x9e3779b97f4a7c15ull, want);
    Simulator sa(original), sb(patched);
    start_from_reset(original, sa);
    start_from_reset(patched, sb);
    std::vector<Event> ev;
    for (std::uint64_t t = 0; t < want; ++t) {
      sa.step(stim.steps[t], ev);
      sb.step(stim.steps[t], ev);
      ev.clear();
      if (sa.value(*on) == LogicValue::One) break;
      for (std::size_t i = 0; i < outs_a.size(); ++i)
        if (sa.value(outs_a[i]) != sb.value(outs_b[i])) {
          rep.mismatch = fmt::format("{} at cycle {} of run {}", original.net(outs_a[i]).name, t, segment - 1);
          break;
        }
      ++rep.vectors_compared;
      if (!rep.mismatch.empty()) break;
    }
  }
  rep.outputs_match = rep.mismatch.empty();
  return rep;
}

} // namespace lutscope
