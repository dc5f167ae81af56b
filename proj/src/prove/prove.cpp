#include <algorithm>
#include <deque>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lutscope/prove.hpp"

namespace lutscope {

std::string_view to_string(ProofStatus s) {
  switch (s) {
    case ProofStatus::Holds: return "HOLDS";
    case ProofStatus::Fail: return "FAIL";
    case ProofStatus::Unknown: return "UNKNOWN";
  }
  return "?";
}

ProofStatus proof_status_from_string(std::string_view s) {
  if (s == "HOLDS") return ProofStatus::Holds;
  if (s == "FAIL") return ProofStatus::Fail;
  if (s == "UNKNOWN") return ProofStatus::Unknown;
  throw Error(fmt::format("unknown proof status '{}'", s));
}

namespace {

// A goal literal constrains either a net in the current frame or the value a
// register will hold after the clock.
struct GoalLit {
  NetId net = 0;
  std::optional<std::size_t> dff;
  bool value = false;
};

struct Leaf {
  NetId net;
  bool value;
};

struct PropertyGoals {
  std::vector<std::vector<GoalLit>> cubes; // violation = any cube satisfied
};

NetId resolve(const Design& d, const std::string& name) {
  auto n = d.find_net(name);
  if (!n) throw Error(fmt::format("property names unknown signal '{}'", name));
  return *n;
}

PropertyGoals goals_of(const Design& d, const Property& p) {
  PropertyGoals g;
  if (p.kind == Property::Kind::Constant) {
    g.cubes.push_back({{resolve(d, p.constant.signal), std::nullopt, !p.constant.value}});
    return g;
  }
  if (p.never.lines.size() != p.never.k) throw Error(fmt::format("property '{}': line count mismatch", p.id));
  std::vector<NetId> lines;
  for (const auto& l : p.never.lines) lines.push_back(resolve(d, l));
  for (const auto& c : p.never.cubes) {
    std::vector<GoalLit> cube;
    // Highest line first, matching the assertion text.
    for (unsigned i = p.never.k; i-- > 0;)
      if ((c.mask >> i) & 1u) cube.push_back({lines[i], std::nullopt, ((c.value >> i) & 1u) != 0});
    g.cubes.push_back(std::move(cube));
  }
  return g;
}

std::string goal_name(const Design& d, const GoalLit& g) {
  return d.net(g.dff ? d.dffs()[*g.dff].d : g.net).name;
}

// "sat -prove a 0 -set b 1" per literal: prove the literal cannot take its
// violating value while the others hold theirs.
std::vector<std::string> render_goals(const Design& d, const std::vector<GoalLit>& goal) {
  if (goal.empty()) return {"sat -prove 1 0"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < goal.size(); ++i) {
    std::string s = fmt::format("sat -prove {} {}", goal_name(d, goal[i]), goal[i].value ? 0 : 1);
    for (std::size_t j = 0; j < goal.size(); ++j)
      if (j != i) s += fmt::format(" -set {} {}", goal_name(d, goal[j]), goal[j].value ? 1 : 0);
    out.push_back(std::move(s));
  }
  return out;
}

bool is_state(const Design& d, NetId n) { return d.net(n).driver == Design::DriverKind::Dff; }

std::vector<CubeLiteral> to_literals(const Design& d, const std::vector<Leaf>& cube) {
  std::vector<CubeLiteral> out;
  for (const auto& l : cube) out.push_back({d.net(l.net).name, l.value, is_state(d, l.net)});
  return out;
}

// Registers first (design order), then inputs grouped by port. A port whose
// every bit is present prints as one hex value.
std::string render_cube(const Design& d, const std::vector<Leaf>& cube) {
  if (cube.empty()) return "N.A.";
  std::vector<std::optional<bool>> val(d.nets().size());
  for (const auto& l : cube) val[l.net] = l.value;
  std::vector<std::string> parts;
  for (const auto& r : d.dffs())
    if (val[r.q]) parts.push_back(fmt::format("{} = {}", d.net(r.q).name, *val[r.q] ? 1 : 0));
  std::vector<char> done(d.nets().size(), 0);
  for (const auto& r : d.dffs()) done[r.q] = 1;
  for (const auto& port : d.ports()) {
    if (port.dir != PortDir::Input) continue;
    bool all = port.bits.size() > 1 && port.bits.size() <= 64;
    for (NetId b : port.bits) all = all && val[b].has_value();
    if (all) {
      std::uint64_t v = 0;
      for (std::size_t i = 0; i < port.bits.size(); ++i) v |= std::uint64_t{*val[port.bits[i]]} << i;
      parts.push_back(fmt::format("{} = {}", port.name, to_hex(v, static_cast<unsigned>(port.bits.size()))));
      for (NetId b : port.bits) done[b] = 1;
      continue;
    }
    for (NetId b : port.bits)
      if (val[b] && !done[b]) {
        parts.push_back(fmt::format("{} = {}", d.net(b).name, *val[b] ? 1 : 0));
        done[b] = 1;
      }
  }
  for (const auto& l : cube)
    if (!done[l.net]) {
      parts.push_back(fmt::format("{} = {}", d.net(l.net).name, l.value ? 1 : 0));
      done[l.net] = 1;
    }
  std::string s;
  for (const auto& p : parts) s += (s.empty() ? "" : ", ") + p;
  return s;
}

struct StepOutcome {
  ProofStatus status = ProofStatus::Unknown;
  std::vector<Leaf> cube;
  std::uint64_t conflicts = 0;
};

// Single frame: find leaf values making every goal literal true, then drop
// literals greedily while the rest still force the goal.
StepOutcome solve_step(const Design& d, const std::vector<GoalLit>& goal, const ProveOptions& opts) {
  SatSolver s;
  FrameEncoder enc(d, s);
  auto f = enc.new_frame();
  std::vector<Lit> g;
  for (const auto& gl : goal) {
    const Lit l = gl.dff ? enc.next_state(f, *gl.dff) : enc.net(f, gl.net);
    g.push_back(gl.value ? l : ~l);
  }
  StepOutcome out;
  const auto st = s.solve(g, opts.conflict_budget);
  out.conflicts = s.stats().conflicts;
  if (st == SatStatus::Unsat) {
    out.status = ProofStatus::Holds;
    return out;
  }
  if (st == SatStatus::Unknown) return out;
  out.status = ProofStatus::Fail;

  // Undriven nets are dropped first, then registers, so cubes lean on
  // primary inputs where possible.
  std::vector<Leaf> support;
  for (int pass = 0; pass < 3; ++pass)
    for (NetId n = 0; n < d.nets().size(); ++n) {
      if (!f.have[n]) continue;
      const auto kind = d.net(n).driver;
      const int rank = kind == Design::DriverKind::None ? 0 : kind == Design::DriverKind::Dff ? 1 : 2;
      if (kind == Design::DriverKind::Lut || kind == Design::DriverKind::Const || rank != pass) continue;
      support.push_back({n, s.model_value(f.lit[n])});
    }
  const Lit act = Lit::pos(enc.new_var());
  std::vector<Lit> neg{~act};
  for (Lit l : g) neg.push_back(~l);
  enc.add(neg);

  std::vector<char> keep(support.size(), 1);
  for (std::size_t i = 0; i < support.size(); ++i) {
    keep[i] = 0;
    std::vector<Lit> as{act};
    for (std::size_t j = 0; j < support.size(); ++j)
      if (keep[j]) as.push_back(support[j].value ? f.lit[support[j].net] : ~f.lit[support[j].net]);
    if (s.solve(as, opts.conflict_budget) != SatStatus::Unsat) keep[i] = 1;
  }
  out.conflicts = s.stats().conflicts;
  for (std::size_t i = 0; i < support.size(); ++i)
    if (keep[i]) out.cube.push_back(support[i]);
  std::sort(out.cube.begin(), out.cube.end(), [](const Leaf& a, const Leaf& b) { return a.net < b.net; });
  return out;
}

void confirm(const Design& d, ProofResult& r) {
  if (!r.trigger) return;
  try {
    r.confirmed = trigger_fires(d, *r.trigger, replay(d, *r.trigger));
  } catch (const Error&) {
    r.confirmed = false;
  }
}

std::vector<Trigger::Expectation> expectations(const Design& d, const std::vector<GoalLit>& goal, std::uint64_t step) {
  std::vector<Trigger::Expectation> out;
  for (const auto& g : goal) out.push_back({d.net(g.net).name, from_bool(g.value), step});
  return out;
}

// Cubes are listed latest first: cubes[0] is the violation itself.
Trigger chain_trigger(const Design& d, const std::vector<std::vector<Leaf>>& cubes, const std::vector<GoalLit>& goal) {
  Trigger t;
  const std::size_t n = cubes.size();
  t.steps.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& l : cubes[i])
      if (d.net(l.net).driver == Design::DriverKind::Input) t.steps[n - 1 - i][d.net(l.net).name] = from_bool(l.value);
  for (const auto& r : d.dffs()) t.initial_state[d.net(r.q).name] = from_bool(r.reset && r.reset_value);
  for (const auto& l : cubes.back())
    if (is_state(d, l.net)) t.initial_state[d.net(l.net).name] = from_bool(l.value);
  t.expect = expectations(d, goal, n - 1);
  return t;
}

ProofStatus combine(ProofStatus a, ProofStatus b) {
  if (a == ProofStatus::Fail || b == ProofStatus::Fail) return ProofStatus::Fail;
  if (a == ProofStatus::Unknown || b == ProofStatus::Unknown) return ProofStatus::Unknown;
  return ProofStatus::Holds;
}

} // namespace

ProofResult prove_combinational(const Design& d, const Property& p, const ProveOptions& opts) {
  ProveOptions one = opts;
  one.max_depth = 1;
  ProofResult r = backtrace_chain(d, p, one);
  r.method = "combinational";
  // A single frame with free registers: any satisfying cube is a violation.
  if (r.status == ProofStatus::Unknown && std::any_of(r.steps.begin(), r.steps.end(), [](const ProofStep& s) {
        return s.status == ProofStatus::Fail;
      })) {
    r.status = ProofStatus::Fail;
    r.note.clear();
  }
  if (r.status == ProofStatus::Fail && !r.trigger) {
    // Counterexample needs specific register values; start from them.
    const auto goals = goals_of(d, p);
    for (const auto& s : r.steps) {
      if (s.status != ProofStatus::Fail) continue;
      std::vector<Leaf> cube;
      for (const auto& l : s.counterexample) cube.push_back({*d.find_net(l.signal), l.value});
      r.trigger = chain_trigger(d, {cube}, goals.cubes[s.cube]);
      break;
    }
    confirm(d, r);
  }
  return r;
}

ProofResult backtrace_chain(const Design& d, const Property& p, const ProveOptions& opts) {
  if (opts.max_depth == 0) throw Error("proof depth must be at least 1");
  const auto goals = goals_of(d, p);
  ProofResult res;
  res.property = p.id;
  res.method = "chain";
  res.status = ProofStatus::Holds;
  for (unsigned ci = 0; ci < goals.cubes.size(); ++ci) {
    std::vector<GoalLit> goal = goals.cubes[ci];
    std::vector<std::vector<Leaf>> cubes;
    ProofStatus status = ProofStatus::Unknown;
    std::string note;
    bool reached = false;
    for (unsigned step = 1;; ++step) {
      ProofStep ps;
      ps.step = step;
      ps.cube = ci;
      ps.goals = render_goals(d, goal);
      for (const auto& g : goal) ps.targets.push_back(goal_name(d, g));
      auto o = solve_step(d, goal, opts);
      res.conflicts += o.conflicts;
      ps.status = o.status;
      if (o.status != ProofStatus::Fail) {
        ps.rendered = "N.A.";
        res.steps.push_back(std::move(ps));
        // An unsatisfiable goal past step 1 means the state the previous
        // step needed can never be produced by the logic.
        status = o.status;
        if (o.status == ProofStatus::Unknown) note = fmt::format("solver budget exhausted at step {}", step);
        break;
      }
      ps.counterexample = to_literals(d, o.cube);
      ps.rendered = render_cube(d, o.cube);
      res.steps.push_back(std::move(ps));
      cubes.push_back(o.cube);

      std::vector<GoalLit> next;
      bool at_reset = true;
      for (const auto& l : o.cube) {
        if (!is_state(d, l.net)) continue;
        const auto dff = d.net(l.net).driver_index;
        const auto& r = d.dffs()[dff];
        if (!r.reset || r.reset_value != l.value) at_reset = false;
        next.push_back({l.net, dff, l.value});
      }
      if (next.empty() || at_reset) {
        status = ProofStatus::Fail;
        reached = true;
        break;
      }
      if (step >= opts.max_depth) {
        status = ProofStatus::Unknown;
        note = fmt::format("depth limit {} reached before primary inputs", opts.max_depth);
        break;
      }
      goal = std::move(next);
    }
    res.status = ci == 0 ? status : combine(res.status, status);
    if (!note.empty() && res.note.empty()) res.note = note;
    if (status == ProofStatus::Fail && !res.trigger) {
      res.trigger = chain_trigger(d, cubes, goals.cubes[ci]);
      res.reaches_inputs = reached;
      confirm(d, res);
    }
  }
  if (res.status != ProofStatus::Unknown && res.status != ProofStatus::Fail) res.note.clear();
  return res;
}

ProofResult prove_bmc(const Design& d, const Property& p, unsigned k, const ProveOptions& opts) {
  if (k == 0) throw Error("bmc bound must be at least 1");
  const auto goals = goals_of(d, p);
  ProofResult res;
  res.property = p.id;
  res.method = "bmc";
  SatSolver s;
  FrameEncoder enc(d, s);
  std::deque<FrameEncoder::Frame> frames;
  for (unsigned t = 0; t < k; ++t) {
    frames.push_back(enc.new_frame());
    auto& f = frames.back();
    if (t == 0) {
      f.leaf = [&d, &enc](NetId n) -> std::optional<Lit> {
        if (!is_state(d, n)) return std::nullopt;
        const auto& r = d.dffs()[d.net(n).driver_index];
        if (!r.reset) return std::nullopt;
        return r.reset_value ? enc.true_lit() : ~enc.true_lit();
      };
    } else {
      f.leaf = [&d, &enc, &frames, t](NetId n) -> std::optional<Lit> {
        if (!is_state(d, n)) return std::nullopt;
        return enc.next_state(frames[t - 1], d.net(n).driver_index);
      };
    }
    // bad_t: some cube holds in frame t.
    const Lit act = Lit::pos(enc.new_var());
    std::vector<Lit> any{~act};
    std::vector<Lit> cube_lits;
    for (const auto& cube : goals.cubes) {
      const Lit c = Lit::pos(enc.new_var());
      for (const auto& g : cube) {
        const Lit l = enc.net(f, g.net);
        enc.add({~c, g.value ? l : ~l});
      }
      any.push_back(c);
      cube_lits.push_back(c);
    }
    enc.add(any);
    const Lit as[] = {act};
    const auto st = s.solve(as, opts.conflict_budget);
    res.conflicts = s.stats().conflicts;
    ProofStep ps;
    ps.step = t + 1;
    ps.goals = render_goals(d, goals.cubes.empty() ? std::vector<GoalLit>{} : goals.cubes[0]);
    for (const auto& g : goals.cubes.empty() ? std::vector<GoalLit>{} : goals.cubes[0])
      ps.targets.push_back(goal_name(d, g));
    if (st == SatStatus::Unknown) {
      ps.status = ProofStatus::Unknown;
      ps.rendered = "N.A.";
      res.steps.push_back(std::move(ps));
      res.status = ProofStatus::Unknown;
      res.note = fmt::format("solver budget exhausted at frame {}", t);
      return res;
    }
    if (st == SatStatus::Unsat) {
      enc.add({~act});
      continue;
    }
    Trigger trig;
    trig.steps.resize(t + 1);
    for (unsigned ft = 0; ft <= t; ++ft)
      for (NetId n : d.stimulus_inputs())
        if (frames[ft].have[n]) trig.steps[ft][d.net(n).name] = from_bool(s.model_value(frames[ft].lit[n]));
    for (const auto& r : d.dffs()) {
      bool v = r.reset && r.reset_value;
      if (!r.reset && frames[0].have[r.q]) v = s.model_value(frames[0].lit[r.q]);
      trig.initial_state[d.net(r.q).name] = from_bool(v);
    }
    std::size_t hit = 0;
    while (hit + 1 < cube_lits.size() && !s.model_value(cube_lits[hit])) ++hit;
    trig.expect = expectations(d, goals.cubes[hit], t);
    std::vector<Leaf> shown;
    for (const auto& g : goals.cubes[hit]) shown.push_back({g.net, g.value});
    ps.status = ProofStatus::Fail;
    ps.cube = static_cast<unsigned>(hit);
    ps.counterexample = to_literals(d, shown);
    ps.rendered = fmt::format("{} at frame {}", render_cube(d, shown), t);
    res.steps.push_back(std::move(ps));
    res.status = ProofStatus::Fail;
    res.trigger = std::move(trig);
    res.reaches_inputs = true;
    confirm(d, res);
    return res;
  }
  ProofStep ps;
  ps.step = k;
  ps.goals = render_goals(d, goals.cubes.empty() ? std::vector<GoalLit>{} : goals.cubes[0]);
  ps.status = ProofStatus::Holds;
  ps.rendered = "N.A.";
  res.steps.push_back(std::move(ps));
  res.status = ProofStatus::Holds;
  res.note = fmt::format("no violation within {} frames of reset", k);
  return res;
}

CnfFormula property_cnf(const Design& d, const Property& p) {
  const auto goals = goals_of(d, p);
  CnfFormula f;
  SatSolver s;
  FrameEncoder enc(d, s, &f);
  auto fr = enc.new_frame();
  std::vector<Lit> any;
  for (const auto& cube : goals.cubes) {
    const Lit c = Lit::pos(enc.new_var());
    for (const auto& g : cube) {
      const Lit l = enc.net(fr, g.net);
      enc.add({~c, g.value ? l : ~l});
    }
    any.push_back(c);
  }
  enc.add(any);
  return f;
}

std::string render_proof_table(const ProofResult& r) {
  std::size_t goal_w = 4, status_w = 6;
  for (const auto& s : r.steps)
    for (const auto& g : s.goals) goal_w = std::max(goal_w, g.size());
  std::string out = fmt::format("{:<5} {:<{}} {:<{}} {}\n", "step", "goal", goal_w, "status", status_w, "counterexample");
  for (const auto& s : r.steps) {
    for (std::size_t i = 0; i < s.goals.size(); ++i) {
      const std::string step = i == 0 ? std::to_string(s.step) : "";
      out += fmt::format("{:<5} {:<{}} {:<{}} {}\n", step, s.goals[i], goal_w, to_string(s.status), status_w,
                         s.rendered);
    }
  }
  return out;
}

std::string ProofResult::to_json_text() const {
  nlohmann::ordered_json j;
  j["property"] = property;
  j["method"] = method;
  j["status"] = to_string(status);
  j["confirmed"] = confirmed;
  j["reaches_inputs"] = reaches_inputs;
  j["note"] = note;
  j["conflicts"] = conflicts;
  auto steps_j = nlohmann::ordered_json::array();
  for (const auto& s : steps) {
    nlohmann::ordered_json o;
    o["step"] = s.step;
    o["cube"] = s.cube;
    o["goals"] = s.goals;
    o["targets"] = s.targets;
    o["status"] = to_string(s.status);
    auto cex = nlohmann::ordered_json::array();
    for (const auto& l : s.counterexample)
      cex.push_back({{"signal", l.signal}, {"value", l.value ? 1 : 0}, {"state", l.state}});
    o["counterexample"] = cex;
    o["rendered"] = s.rendered;
    steps_j.push_back(o);
  }
  j["steps"] = steps_j;
  if (trigger) j["trigger"] = nlohmann::ordered_json::parse(trigger->to_json_text());
  return j.dump(2);
}

ProofResult ProofResult::from_json_text(std::string_view text) {
  ProofResult r;
  try {
    auto j = nlohmann::json::parse(text);
    r.property = j.at("property").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.status = proof_status_from_string(j.at("status").get<std::string>());
    r.confirmed = j.value("confirmed", false);
    r.reaches_inputs = j.value("reaches_inputs", false);
    r.note = j.value("note", std::string{});
    r.conflicts = j.value("conflicts", std::uint64_t{0});
    for (const auto& o : j.at("steps")) {
      ProofStep s;
      s.step = o.at("step").get<unsigned>();
      s.cube = o.value("cube", 0u);
      s.goals = o.at("goals").get<std::vector<std::string>>();
      s.targets = o.value("targets", std::vector<std::string>{});
      s.status = proof_status_from_string(o.at("status").get<std::string>());
      for (const auto& l : o.at("counterexample"))
        s.counterexample.push_back({l.at("signal").get<std::string>(), l.at("value").get<int>() != 0, l.value("state", false)});
      s.rendered = o.value("rendered", std::string{});
      r.steps.push_back(std::move(s));
    }
    if (j.contains("trigger")) r.trigger = Trigger::from_json_text(j.at("trigger").dump());
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("proof result: {}", e.what()));
  }
  return r;
}

} // namespace lutscope
