#pragma once

// Shared helpers for the test binaries: fixture loading and small, deliberately
// naive reference implementations used as oracles.

#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lutscope/design.hpp"
#include "lutscope/netlist.hpp"
#include "lutscope/sim.hpp"

namespace lutscope::testing {

inline std::string fixture_path(const std::string& name) { return std::string(LUTSCOPE_FIXTURE_DIR) + "/" + name; }

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Design load_design(const std::string& name, const PortRoles& roles = {}) {
  return Design::build(parse_netlist(read_fixture(name)), roles);
}

/// Settled value of every trace signal at every step: m[t][signal].
inline std::vector<std::vector<LogicValue>> trace_matrix(const EventTrace& t) {
  std::vector<std::vector<LogicValue>> m(t.length, std::vector<LogicValue>(t.signals.size(), LogicValue::X));
  std::vector<LogicValue> cur(t.signals.size(), LogicValue::X);
  std::size_t e = 0;
  for (std::uint64_t step = 0; step < t.length; ++step) {
    while (e < t.events.size() && t.events[e].time == step) {
      cur[t.events[e].signal] = t.events[e].value;
      ++e;
    }
    m[step] = cur;
  }
  return m;
}

/// LUT evaluation by enumerating every resolution of the unknown lines.
inline LogicValue oracle_lut(std::uint64_t init, const std::vector<LogicValue>& addr) {
  bool saw0 = false, saw1 = false;
  const unsigned k = static_cast<unsigned>(addr.size());
  for (unsigned a = 0; a < (1u << k); ++a) {
    bool fits = true;
    for (unsigned i = 0; i < k; ++i) {
      bool bit = (a >> i) & 1u;
      if (addr[i] == LogicValue::Zero && bit) fits = false;
      if (addr[i] == LogicValue::One && !bit) fits = false;
    }
    if (!fits) continue;
    if ((init >> a) & 1u) saw1 = true;
    else saw0 = true;
  }
  if (saw0 && saw1) return LogicValue::X;
  return saw1 ? LogicValue::One : LogicValue::Zero;
}

/// Full re-evaluation simulator over a flat netlist, keyed by signal name.
/// Every LUT and assign is recomputed until nothing changes, each step.
class OracleSim {
public:
  explicit OracleSim(const Netlist& flat) : m_(flat.top_module()) {
    for (const auto& b : module_bits(m_)) vals_[b.str()] = LogicValue::X;
    std::map<std::string, bool> driven;
    for (const auto& p : m_.ports)
      if (p.dir == PortDir::Input)
        for (const auto& b : module_bits(Module{"", {p}, {}, {}, {}, {}})) driven[b.str()] = true;
    for (const auto& c : m_.cells) driven[c.output.str()] = true;
    for (const auto& a : m_.assigns) driven[a.lhs.str()] = true;
    for (auto& [name, v] : vals_)
      if (!driven.count(name)) undriven_.push_back(name);
  }

  std::map<std::string, LogicValue> step(const std::map<std::string, LogicValue>& inputs) {
    if (time_ == 0) {
      for (const auto& n : undriven_) vals_[n] = LogicValue::Z;
      for (const auto& c : m_.cells) {
        if (c.kind == CellKind::Const0) vals_[c.output.str()] = LogicValue::Zero;
        if (c.kind == CellKind::Const1) vals_[c.output.str()] = LogicValue::One;
        if (c.kind == CellKind::Dff) vals_[c.output.str()] = LogicValue::X;
      }
    } else {
      for (const auto& [q, v] : next_) vals_[q] = v;
    }
    for (const auto& [n, v] : inputs) vals_[n] = v;
    for (int round = 0;; ++round) {
      if (round > 10000) throw std::runtime_error("oracle: no fixpoint");
      bool changed = false;
      for (const auto& c : m_.cells) {
        if (c.kind != CellKind::Lut) continue;
        std::vector<LogicValue> addr;
        for (const auto& in : c.inputs) addr.push_back(read(in));
        changed |= write(c.output.str(), oracle_lut(c.init, addr));
      }
      for (const auto& a : m_.assigns) changed |= write(a.lhs.str(), read(a.rhs));
      if (!changed) break;
    }
    next_.clear();
    for (const auto& c : m_.cells) {
      if (c.kind != CellKind::Dff) continue;
      LogicValue d = read(c.data);
      LogicValue r = c.reset ? read(*c.reset) : LogicValue::Zero;
      LogicValue rv = from_bool(c.reset_value);
      LogicValue nv;
      if (r == LogicValue::One) nv = rv;
      else if (r == LogicValue::Zero) nv = d;
      else nv = d == rv ? rv : LogicValue::X;
      next_[c.output.str()] = nv;
    }
    ++time_;
    return vals_;
  }

private:
  LogicValue read(const NetBit& b) const {
    if (b.kind == NetBit::Kind::Const0) return LogicValue::Zero;
    if (b.kind == NetBit::Kind::Const1) return LogicValue::One;
    LogicValue v = vals_.at(b.str());
    return v;
  }
  bool write(const std::string& n, LogicValue v) {
    auto& slot = vals_[n];
    if (slot == v) return false;
    slot = v;
    return true;
  }

  const Module& m_;
  std::map<std::string, LogicValue> vals_;
  std::map<std::string, LogicValue> next_;
  std::vector<std::string> undriven_;
  std::uint64_t time_ = 0;
};

/// Runs the oracle on `flat` under stimulus `s` and returns m[t][trace signal]
/// in the signal order of `signals`.
inline std::vector<std::vector<LogicValue>> oracle_matrix(const Netlist& flat, const Stimulus& s, std::uint64_t cycles,
                                                          const std::vector<std::string>& signals) {
  OracleSim sim(flat);
  std::vector<std::vector<LogicValue>> m;
  for (std::uint64_t t = 0; t < cycles; ++t) {
    std::map<std::string, LogicValue> in;
    for (std::size_t i = 0; i < s.inputs.size(); ++i) in[s.inputs[i]] = s.steps[t][i];
    auto vals = sim.step(in);
    std::vector<LogicValue> row;
    for (const auto& sig : signals) row.push_back(vals.at(sig));
    m.push_back(std::move(row));
  }
  return m;
}

/// Random single-module netlist: LUTs over inputs, earlier LUTs and register
/// outputs, with a few registers closing sequential loops. Always valid.
inline std::string random_netlist_text(std::uint64_t seed, int max_luts = 24) {
  std::mt19937_64 rng(seed);
  const int n_in = 2 + static_cast<int>(rng() % 5);
  const int n_lut = 1 + static_cast<int>(rng() % max_luts);
  const int n_ff = static_cast<int>(rng() % 4);
  const int n_out = 1 + static_cast<int>(rng() % 3);
  const bool with_const = rng() % 3 == 0;
  std::ostringstream o;
  o << "module rnd(input clk, input [" << n_in - 1 << ":0] x, output [" << n_out - 1 << ":0] y);\n";
  o << "  wire [" << n_lut - 1 << ":0] w;\n";
  if (n_ff) o << "  wire [" << n_ff - 1 << ":0] q;\n";
  if (with_const) o << "  wire k;\n  CONST1 c (.O(k));\n";
  for (int i = 0; i < n_lut; ++i) {
    const unsigned k = 1 + static_cast<unsigned>(rng() % 4);
    const std::uint64_t init = rng() & width_mask(1u << k);
    o << "  LUT" << k << " #(.INIT(" << verilog_hex(init, 1u << k) << ")) l" << i << " (";
    for (unsigned a = 0; a < k; ++a) {
      const int pool = n_in + i + n_ff + (with_const ? 1 : 0);
      int pick = static_cast<int>(rng() % static_cast<std::uint64_t>(pool));
      std::string src;
      if (pick < n_in) src = "x[" + std::to_string(pick) + "]";
      else if ((pick -= n_in) < i) src = "w[" + std::to_string(pick) + "]";
      else if ((pick -= i) < n_ff) src = "q[" + std::to_string(pick) + "]";
      else src = "k";
      o << ".I" << a << "(" << src << "), ";
    }
    o << ".O(w[" << i << "]));\n";
  }
  for (int f = 0; f < n_ff; ++f)
    o << "  DFF r" << f << " (.C(clk), .D(w[" << rng() % static_cast<std::uint64_t>(n_lut) << "]), .Q(q[" << f << "]));\n";
  for (int y = 0; y < n_out; ++y) o << "  assign y[" << y << "] = w[" << rng() % static_cast<std::uint64_t>(n_lut) << "];\n";
  o << "endmodule\n";
  return o.str();
}

} // namespace lutscope::testing
