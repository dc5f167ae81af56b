#include <set>

#include <fmt/format.h>

#include "lutscope/netlist.hpp"

namespace lutscope {
namespace {

class Flattener {
public:
  explicit Flattener(const Netlist& n) : n_(n) {}

  Netlist run() {
    const Module& top = n_.top_module();
    out_.name = top.name;
    out_.ports = top.ports;
    for (const auto& p : top.ports) claim(p.name);
    for (const auto& w : top.wires) {
      claim(w.name);
      out_.wires.push_back(w);
    }
    stack_.push_back(top.name);
    for (const auto& c : top.cells) add_cell(c, "");
    for (const auto& a : top.assigns) out_.assigns.push_back(a);
    for (const auto& inst : top.instances) expand(inst, "");
    Netlist flat;
    flat.top = out_.name;
    flat.modules.emplace(out_.name, std::move(out_));
    return flat;
  }

private:
  void claim(const std::string& name) {
    if (!names_.insert(name).second) throw Error(fmt::format("flatten: name collision on '{}'", name));
  }

  static NetBit rename(const NetBit& b, const std::string& prefix) {
    if (b.is_const() || prefix.empty()) return b;
    return NetBit::signal(prefix + b.name, b.index);
  }

  void add_cell(const Cell& c, const std::string& prefix) {
    Cell copy = c;
    copy.name = prefix + c.name;
    if (!cell_names_.insert(copy.name).second) throw Error(fmt::format("flatten: duplicate cell '{}'", copy.name));
    for (auto& i : copy.inputs) i = rename(i, prefix);
    copy.output = rename(c.output, prefix);
    copy.clock = rename(c.clock, prefix);
    copy.data = rename(c.data, prefix);
    if (copy.reset) copy.reset = rename(*c.reset, prefix);
    out_.cells.push_back(std::move(copy));
  }

  // `prefix` is the parent's path including trailing dot ("" at top).
  void expand(const Instance& inst, const std::string& prefix) {
    auto it = n_.modules.find(inst.module);
    if (it == n_.modules.end()) throw Error(fmt::format("flatten: unknown module '{}'", inst.module));
    const Module& child = it->second;
    for (const auto& s : stack_)
      if (s == child.name) throw Error(fmt::format("flatten: recursive instantiation of module '{}'", child.name));
    stack_.push_back(child.name);

    const std::string path = prefix + inst.name + ".";
    for (const auto& p : child.ports) {
      claim(path + p.name);
      out_.wires.push_back({path + p.name, p.range});
    }
    for (const auto& w : child.wires) {
      claim(path + w.name);
      out_.wires.push_back({path + w.name, w.range});
    }
    for (const auto& c : child.cells) add_cell(c, path);
    for (const auto& a : child.assigns) out_.assigns.push_back({rename(a.lhs, path), rename(a.rhs, path), a.line});

    for (const auto& b : inst.bindings) {
      const Port* p = child.find_port(b.port);
      if (!p) throw Error(fmt::format("flatten: module '{}' has no port '{}'", child.name, b.port));
      auto idx = p->range.indices_msb_first();
      if (idx.size() != b.bits.size())
        throw Error(fmt::format("flatten: width mismatch on port '{}' of '{}'", b.port, inst.name));
      for (std::size_t i = 0; i < idx.size(); ++i) {
        NetBit inner = NetBit::signal(path + p->name, idx[i]);
        NetBit outer = rename(b.bits[i], prefix);
        if (p->dir == PortDir::Input)
          out_.assigns.push_back({inner, outer, inst.line});
        else
          out_.assigns.push_back({outer, inner, inst.line});
      }
    }
    for (const auto& sub : child.instances) expand(sub, path);
    stack_.pop_back();
  }

  const Netlist& n_;
  Module out_;
  std::set<std::string> names_;
  std::set<std::string> cell_names_;
  std::vector<std::string> stack_;
};

} // namespace

Netlist flatten(const Netlist& n) { return Flattener(n).run(); }

} // namespace lutscope
