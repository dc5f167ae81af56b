#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "lutscope/netlist.hpp"

namespace lutscope {

std::vector<int> Range::indices_msb_first() const {
  std::vector<int> out;
  if (!vector) return {-1};
  if (msb >= lsb)
    for (int i = msb; i >= lsb; --i) out.push_back(i);
  else
    for (int i = msb; i <= lsb; ++i) out.push_back(i);
  return out;
}

std::string NetBit::str() const {
  switch (kind) {
  case Kind::Const0: return "1'b0";
  case Kind::Const1: return "1'b1";
  case Kind::Signal: break;
  }
  return index < 0 ? name : fmt::format("{}[{}]", name, index);
}

const Port* Module::find_port(std::string_view n) const {
  auto it = std::find_if(ports.begin(), ports.end(), [&](const Port& p) { return p.name == n; });
  return it == ports.end() ? nullptr : &*it;
}

const Wire* Module::find_wire(std::string_view n) const {
  auto it = std::find_if(wires.begin(), wires.end(), [&](const Wire& w) { return w.name == n; });
  return it == wires.end() ? nullptr : &*it;
}

std::optional<Range> Module::find_range(std::string_view n) const {
  if (const Port* p = find_port(n)) return p->range;
  if (const Wire* w = find_wire(n)) return w->range;
  return std::nullopt;
}

const Cell* Module::find_cell(std::string_view n) const {
  auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) { return c.name == n; });
  return it == cells.end() ? nullptr : &*it;
}

Cell* Module::find_cell(std::string_view n) {
  auto it = std::find_if(cells.begin(), cells.end(), [&](const Cell& c) { return c.name == n; });
  return it == cells.end() ? nullptr : &*it;
}

const Module& Netlist::top_module() const {
  auto it = modules.find(top);
  if (it == modules.end()) throw Error(fmt::format("top module '{}' not defined", top));
  return it->second;
}

Module& Netlist::top_module() {
  auto it = modules.find(top);
  if (it == modules.end()) throw Error(fmt::format("top module '{}' not defined", top));
  return it->second;
}

bool Netlist::is_flat() const { return modules.size() == 1 && top_module().instances.empty(); }

std::vector<NetBit> module_bits(const Module& m) {
  std::vector<NetBit> out;
  auto add = [&](const std::string& name, const Range& r) {
    if (!r.vector) {
      out.push_back(NetBit::signal(name));
      return;
    }
    auto idx = r.indices_msb_first();
    for (auto it = idx.rbegin(); it != idx.rend(); ++it) out.push_back(NetBit::signal(name, *it));
  };
  for (const auto& p : m.ports) add(p.name, p.range);
  for (const auto& w : m.wires) add(w.name, w.range);
  return out;
}

std::string verilog_identifier(std::string_view name) {
  static const char* const keywords[] = {"module", "endmodule", "input", "output", "wire", "assign", "inout", "reg"};
  bool simple = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_');
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$')) simple = false;
  for (const char* k : keywords)
    if (name == k) simple = false;
  if (simple) return std::string(name);
  return fmt::format("\\{} ", name);
}

std::string_view to_string(Diagnostic::Kind k) {
  switch (k) {
  case Diagnostic::Kind::Undeclared: return "undeclared-net";
  case Diagnostic::Kind::MultiDriver: return "multiple-drivers";
  case Diagnostic::Kind::CombLoop: return "combinational-loop";
  case Diagnostic::Kind::BadInstance: return "bad-instance";
  case Diagnostic::Kind::BadCell: return "bad-cell";
  case Diagnostic::Kind::BadTop: return "bad-top";
  }
  return "unknown";
}

} // namespace lutscope
