#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "lutscope/netlist.hpp"

namespace lutscope {
namespace {

void check_ref(const Module& m, const NetBit& b, const std::string& where, int line, std::vector<Diagnostic>& out) {
  if (b.is_const()) return;
  auto r = m.find_range(b.name);
  if (!r) {
    out.push_back({Diagnostic::Kind::Undeclared, m.name, fmt::format("{} references undeclared net '{}'", where, b.name), line});
    return;
  }
  if (b.index < 0 && r->vector) {
    out.push_back({Diagnostic::Kind::Undeclared, m.name,
                   fmt::format("{} references vector '{}' without a bit index", where, b.name), line});
  } else if (b.index >= 0 && (!r->vector || !r->contains(b.index))) {
    out.push_back({Diagnostic::Kind::Undeclared, m.name, fmt::format("{} references '{}' out of range", where, b.str()),
                   line});
  }
}

void check_module(const Netlist& n, const Module& m, std::vector<Diagnostic>& out) {
  // driver bookkeeping: bit -> descriptions
  std::map<std::string, std::vector<std::string>> drivers;
  std::map<std::string, int> driver_line;
  auto drive = [&](const NetBit& b, std::string who, int line) {
    if (b.is_const()) return;
    auto& d = drivers[b.str()];
    d.push_back(std::move(who));
    if (!driver_line.contains(b.str()) || line > 0) driver_line[b.str()] = line;
  };
  for (const auto& p : m.ports)
    if (p.dir == PortDir::Input)
      for (int i : p.range.indices_msb_first()) drive(NetBit::signal(p.name, i), fmt::format("input port {}", p.name), 0);

  std::set<std::string> cell_names;
  for (const auto& c : m.cells) {
    if (!cell_names.insert(c.name).second)
      out.push_back({Diagnostic::Kind::BadCell, m.name, fmt::format("duplicate cell name '{}'", c.name), c.line});
    const std::string where = fmt::format("cell {}", c.name);
    switch (c.kind) {
    case CellKind::Lut: {
      unsigned k = c.lut_size();
      if (k < 1 || k > 6) {
        out.push_back({Diagnostic::Kind::BadCell, m.name, fmt::format("LUT '{}' has {} inputs (1..6 allowed)", c.name, k), c.line});
        break;
      }
      if (c.init & ~width_mask(init_width(k)))
        out.push_back({Diagnostic::Kind::BadCell, m.name,
                       fmt::format("INIT of '{}' is wider than {} bits", c.name, init_width(k)), c.line});
      for (const auto& i : c.inputs) check_ref(m, i, where, c.line, out);
      break;
    }
    case CellKind::Dff:
      if (c.clock.is_const())
        out.push_back({Diagnostic::Kind::BadCell, m.name, fmt::format("DFF '{}' has a constant clock", c.name), c.line});
      check_ref(m, c.clock, where, c.line, out);
      check_ref(m, c.data, where, c.line, out);
      if (c.reset) check_ref(m, *c.reset, where, c.line, out);
      break;
    case CellKind::Const0:
    case CellKind::Const1: break;
    }
    if (c.output.is_const())
      out.push_back({Diagnostic::Kind::BadCell, m.name, fmt::format("output of '{}' is a constant", c.name), c.line});
    check_ref(m, c.output, where, c.line, out);
    drive(c.output, where, c.line);
  }
  for (const auto& a : m.assigns) {
    check_ref(m, a.lhs, "assign", a.line, out);
    check_ref(m, a.rhs, "assign", a.line, out);
    if (a.lhs.is_const())
      out.push_back({Diagnostic::Kind::BadCell, m.name, "assign to a constant", a.line});
    drive(a.lhs, fmt::format("assign {} = {}", a.lhs.str(), a.rhs.str()), a.line);
  }
  for (const auto& inst : m.instances) {
    auto it = n.modules.find(inst.module);
    if (it == n.modules.end()) {
      out.push_back({Diagnostic::Kind::BadInstance, m.name,
                     fmt::format("instance '{}' of undefined module '{}'", inst.name, inst.module), inst.line});
      continue;
    }
    const Module& child = it->second;
    for (const auto& b : inst.bindings) {
      const Port* p = child.find_port(b.port);
      if (!p) {
        out.push_back({Diagnostic::Kind::BadInstance, m.name,
                       fmt::format("instance '{}': module '{}' has no port '{}'", inst.name, child.name, b.port), inst.line});
        continue;
      }
      if (static_cast<int>(b.bits.size()) != p->range.width())
        out.push_back({Diagnostic::Kind::BadInstance, m.name,
                       fmt::format("instance '{}': port '{}' width {} bound to {} bits", inst.name, b.port,
                                   p->range.width(), b.bits.size()), inst.line});
      for (const auto& bit : b.bits) {
        check_ref(m, bit, fmt::format("instance {}", inst.name), inst.line, out);
        if (p->dir == PortDir::Output) drive(bit, fmt::format("instance {} port {}", inst.name, b.port), inst.line);
      }
    }
  }
  for (const auto& [bit, who] : drivers) {
    if (who.size() < 2) continue;
    std::string list;
    for (std::size_t i = 0; i < who.size(); ++i) list += (i ? ", " : "") + who[i];
    out.push_back({Diagnostic::Kind::MultiDriver, m.name, fmt::format("net {} has multiple drivers: {}", bit, list),
                   driver_line[bit]});
  }
}

// Tarjan SCC over the LUT/assign dependency graph of a flat module.
void check_loops(const Module& m, std::vector<Diagnostic>& out) {
  std::unordered_map<std::string, int> id;
  auto node = [&](const NetBit& b) {
    auto [it, inserted] = id.try_emplace(b.str(), static_cast<int>(id.size()));
    return it->second;
  };
  struct Edge {
    int to;
    const Cell* cell; // null for assigns
  };
  std::vector<std::vector<Edge>> adj;
  auto add_edge = [&](int from, int to, const Cell* c) {
    std::size_t need = static_cast<std::size_t>(std::max(from, to)) + 1;
    if (adj.size() < need) adj.resize(need);
    adj[static_cast<std::size_t>(from)].push_back({to, c});
  };
  for (const auto& c : m.cells) {
    if (c.kind != CellKind::Lut || c.output.is_const()) continue;
    int o = node(c.output);
    for (const auto& i : c.inputs)
      if (!i.is_const()) add_edge(node(i), o, &c);
  }
  for (const auto& a : m.assigns)
    if (!a.lhs.is_const() && !a.rhs.is_const()) add_edge(node(a.rhs), node(a.lhs), nullptr);
  adj.resize(id.size());

  const int n = static_cast<int>(adj.size());
  std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
  std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<int> stack;
  int counter = 0;
  std::vector<std::vector<int>> sccs;
  // iterative Tarjan: frames of (node, next edge)
  for (int root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] >= 0) continue;
    std::vector<std::pair<int, std::size_t>> frames{{root, 0}};
    index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = counter++;
    stack.push_back(root);
    on_stack[static_cast<std::size_t>(root)] = 1;
    while (!frames.empty()) {
      auto& [v, ei] = frames.back();
      const auto& edges = adj[static_cast<std::size_t>(v)];
      if (ei < edges.size()) {
        int w = edges[ei++].to;
        auto wu = static_cast<std::size_t>(w);
        if (index[wu] < 0) {
          index[wu] = low[wu] = counter++;
          stack.push_back(w);
          on_stack[wu] = 1;
          frames.emplace_back(w, 0);
        } else if (on_stack[wu]) {
          low[static_cast<std::size_t>(v)] = std::min(low[static_cast<std::size_t>(v)], index[wu]);
        }
        continue;
      }
      auto vu = static_cast<std::size_t>(v);
      if (low[vu] == index[vu]) {
        std::vector<int> comp;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(w)] = 0;
          comp.push_back(w);
        } while (w != v);
        sccs.push_back(std::move(comp));
      }
      int done = v;
      frames.pop_back();
      if (!frames.empty()) {
        auto pu = static_cast<std::size_t>(frames.back().first);
        low[pu] = std::min(low[pu], low[static_cast<std::size_t>(done)]);
      }
    }
  }
  for (const auto& comp : sccs) {
    std::set<int> members(comp.begin(), comp.end());
    std::set<std::string> cells;
    int line = 0;
    bool cyclic = comp.size() > 1;
    for (int v : comp)
      for (const auto& e : adj[static_cast<std::size_t>(v)])
        if (members.contains(e.to)) {
          if (comp.size() == 1) cyclic = true; // self loop
          if (e.cell) {
            cells.insert(e.cell->name);
            if (!line) line = e.cell->line;
          }
        }
    if (!cyclic) continue;
    std::string list;
    for (const auto& c : cells) list += (list.empty() ? "" : ", ") + c;
    if (list.empty()) list = "assign aliases only";
    out.push_back({Diagnostic::Kind::CombLoop, m.name, fmt::format("combinational loop through: {}", list), line});
  }
}

bool recursive(const Netlist& n, std::vector<Diagnostic>& out) {
  std::map<std::string, int> state; // 0 new, 1 active, 2 done
  bool found = false;
  std::function<void(const std::string&)> dfs = [&](const std::string& name) {
    state[name] = 1;
    auto it = n.modules.find(name);
    if (it != n.modules.end()) {
      for (const auto& inst : it->second.instances) {
        int s = state[inst.module];
        if (s == 1) {
          out.push_back({Diagnostic::Kind::BadInstance, name,
                         fmt::format("recursive instantiation: '{}' instantiates '{}'", name, inst.module), inst.line});
          found = true;
        } else if (s == 0) {
          dfs(inst.module);
        }
      }
    }
    state[name] = 2;
  };
  for (const auto& [name, m] : n.modules)
    if (state[name] == 0) dfs(name);
  return found;
}

} // namespace

std::vector<Diagnostic> validate(const Netlist& n) {
  std::vector<Diagnostic> out;
  if (!n.modules.contains(n.top)) {
    out.push_back({Diagnostic::Kind::BadTop, n.top, fmt::format("top module '{}' is not defined", n.top), 0});
    return out;
  }
  bool rec = recursive(n, out);
  for (const auto& [name, m] : n.modules) check_module(n, m, out);
  if (rec) return out;
  bool structural = std::any_of(out.begin(), out.end(), [](const Diagnostic& d) {
    return d.kind == Diagnostic::Kind::BadInstance || d.kind == Diagnostic::Kind::Undeclared;
  });
  if (structural) return out;
  if (n.is_flat()) {
    check_loops(n.top_module(), out);
  } else {
    Netlist flat = flatten(n);
    check_loops(flat.top_module(), out);
  }
  return out;
}

} // namespace lutscope
