#include <functional>
#include <set>

#include <fmt/format.h>

#include "lutscope/netlist.hpp"

namespace lutscope {
namespace {

std::string ref(const NetBit& b) {
  switch (b.kind) {
  case NetBit::Kind::Const0: return "1'b0";
  case NetBit::Kind::Const1: return "1'b1";
  case NetBit::Kind::Signal: break;
  }
  std::string id = verilog_identifier(b.name);
  return b.index < 0 ? id : fmt::format("{}[{}]", id, b.index);
}

std::string range_text(const Range& r) { return r.vector ? fmt::format("[{}:{}] ", r.msb, r.lsb) : std::string(); }

std::string binding_text(const std::vector<NetBit>& bits) {
  if (bits.size() == 1) return ref(bits[0]);
  std::string s = "{";
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (i) s += ", ";
    s += ref(bits[i]);
  }
  return s + "}";
}

void emit_module(const Module& m, std::string& out) {
  out += fmt::format("module {}", verilog_identifier(m.name));
  if (!m.ports.empty()) {
    out += "(";
    for (std::size_t i = 0; i < m.ports.size(); ++i) {
      if (i) out += ", ";
      out += verilog_identifier(m.ports[i].name);
    }
    out += ")";
  }
  out += ";\n";
  for (const auto& p : m.ports)
    out += fmt::format("  {} {}{};\n", p.dir == PortDir::Input ? "input" : "output", range_text(p.range),
                       verilog_identifier(p.name));
  for (const auto& w : m.wires) out += fmt::format("  wire {}{};\n", range_text(w.range), verilog_identifier(w.name));
  for (const auto& c : m.cells) {
    const std::string name = verilog_identifier(c.name);
    switch (c.kind) {
    case CellKind::Lut: {
      unsigned k = c.lut_size();
      out += fmt::format("  LUT{} #(.INIT({})) {} (", k, verilog_hex(c.init, init_width(k)), name);
      for (unsigned i = 0; i < k; ++i) out += fmt::format(".I{}({}), ", i, ref(c.inputs[i]));
      out += fmt::format(".O({}));\n", ref(c.output));
      break;
    }
    case CellKind::Dff:
      if (c.reset) {
        out += fmt::format("  DFF #(.RESET_VALUE(1'b{})) {} (.C({}), .D({}), .R({}), .Q({}));\n", c.reset_value ? 1 : 0,
                           name, ref(c.clock), ref(c.data), ref(*c.reset), ref(c.output));
      } else {
        out += fmt::format("  DFF {} (.C({}), .D({}), .Q({}));\n", name, ref(c.clock), ref(c.data), ref(c.output));
      }
      break;
    case CellKind::Const0:
    case CellKind::Const1:
      out += fmt::format("  {} {} (.O({}));\n", c.kind == CellKind::Const0 ? "CONST0" : "CONST1", name, ref(c.output));
      break;
    }
  }
  for (const auto& inst : m.instances) {
    out += fmt::format("  {} {} (", verilog_identifier(inst.module), verilog_identifier(inst.name));
    for (std::size_t i = 0; i < inst.bindings.size(); ++i) {
      if (i) out += ", ";
      out += fmt::format(".{}({})", verilog_identifier(inst.bindings[i].port), binding_text(inst.bindings[i].bits));
    }
    out += ");\n";
  }
  for (const auto& a : m.assigns) out += fmt::format("  assign {} = {};\n", ref(a.lhs), ref(a.rhs));
  out += "endmodule\n";
}

} // namespace

std::string emit_netlist(const Netlist& n) {
  // Children before parents; modules unreachable from top go first, by name.
  std::vector<std::string> order;
  std::set<std::string> done;
  std::function<void(const std::string&)> visit = [&](const std::string& name) {
    if (done.contains(name)) return;
    done.insert(name);
    auto it = n.modules.find(name);
    if (it == n.modules.end()) return;
    for (const auto& inst : it->second.instances) visit(inst.module);
    order.push_back(name);
  };
  std::set<std::string> reachable;
  std::function<void(const std::string&)> mark = [&](const std::string& name) {
    if (!reachable.insert(name).second) return;
    auto it = n.modules.find(name);
    if (it == n.modules.end()) return;
    for (const auto& inst : it->second.instances) mark(inst.module);
  };
  mark(n.top);
  for (const auto& [name, m] : n.modules)
    if (!reachable.contains(name)) visit(name);
  visit(n.top);

  std::string out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i) out += "\n";
    emit_module(n.modules.at(order[i]), out);
  }
  return out;
}

} // namespace lutscope
