#include "lutscope/design.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace lutscope {

std::string_view to_string(PortRole r) {
  switch (r) {
  case PortRole::Free: return "free";
  case PortRole::Clock: return "clock";
  case PortRole::Reset: return "reset";
  }
  return "free";
}

PortRoles PortRoles::from_json_text(std::string_view text) {
  PortRoles r;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("port roles: {}", e.what()));
  }
  auto read_list = [&](const char* key, PortRole role) {
    if (!j.contains(key)) return;
    for (const auto& name : j.at(key)) r.roles[name.get<std::string>()] = role;
  };
  read_list("clock", PortRole::Clock);
  read_list("reset", PortRole::Reset);
  read_list("free", PortRole::Free);
  if (j.contains("reset_cycles")) r.reset_cycles = j.at("reset_cycles").get<int>();
  if (r.reset_cycles < 0) throw Error("port roles: reset_cycles must be >= 0");
  return r;
}

std::string PortRoles::to_json_text() const {
  nlohmann::json j;
  j["clock"] = nlohmann::json::array();
  j["reset"] = nlohmann::json::array();
  j["free"] = nlohmann::json::array();
  for (const auto& [name, role] : roles) j[std::string(to_string(role))].push_back(name);
  j["reset_cycles"] = reset_cycles;
  return j.dump(2);
}

namespace {

struct UnionFind {
  std::vector<std::uint32_t> parent;
  std::uint32_t add() {
    parent.push_back(static_cast<std::uint32_t>(parent.size()));
    return parent.back();
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b); // keep the earliest-declared root
  }
};

int depth_of(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '.')); }

PortRole guess_role(const std::string& name) {
  std::string l;
  for (char c : name) l += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (l == "clk" || l == "clock" || l == "clk_i" || l == "i_clk") return PortRole::Clock;
  if (l == "rst" || l == "reset" || l == "rst_i" || l == "i_rst") return PortRole::Reset;
  return PortRole::Free;
}

} // namespace

Design Design::build(const Netlist& n, const PortRoles& roles) { return compile(n, roles, true); }

Design Design::build_unchecked(const Netlist& n, const PortRoles& roles) { return compile(n, roles, false); }

Design Design::compile(const Netlist& input, const PortRoles& roles, bool check_loops) {
  auto diags = validate(input);
  for (const auto& d : diags) {
    if (!check_loops && d.kind == Diagnostic::Kind::CombLoop) continue;
    throw Error(fmt::format("invalid netlist ({}): {}", to_string(d.kind), d.message));
  }
  Design D;
  D.flat_ = input.is_flat() ? input : flatten(input);
  D.reset_cycles_ = roles.reset_cycles;
  const Module& m = D.flat_.top_module();

  // Union-find nodes: 0/1 literal constants, then every declared bit.
  UnionFind uf;
  uf.add();
  uf.add();
  std::unordered_map<std::string, std::uint32_t> node_of;
  std::vector<std::string> node_name{"1'b0", "1'b1"};
  for (const auto& b : module_bits(m)) {
    node_of.emplace(b.str(), uf.add());
    node_name.push_back(b.str());
  }
  auto node = [&](const NetBit& b) -> std::uint32_t {
    if (b.kind == NetBit::Kind::Const0) return 0;
    if (b.kind == NetBit::Kind::Const1) return 1;
    return node_of.at(b.str());
  };
  for (const auto& a : m.assigns) uf.unite(node(a.lhs), node(a.rhs));
  if (uf.find(0) == uf.find(1)) throw Error("assigns short constant 0 to constant 1");

  // Group members in node order; pick the canonical name.
  std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
  for (std::uint32_t i = 0; i < uf.parent.size(); ++i) groups[uf.find(i)].push_back(i);
  std::vector<NetId> net_of_node(uf.parent.size());
  // Literal-only groups first so kConst0/kConst1 hold.
  for (std::uint32_t lit : {0u, 1u}) {
    Net net;
    net.name = node_name[lit];
    net.hidden = true;
    net.driver = DriverKind::Const;
    D.nets_.push_back(net);
  }
  std::vector<std::uint32_t> roots;
  for (const auto& [root, members] : groups) roots.push_back(root);
  for (std::uint32_t root : roots) {
    const auto& members = groups[root];
    std::vector<std::uint32_t> named;
    bool has_lit0 = false, has_lit1 = false;
    for (auto v : members) {
      if (v == 0) has_lit0 = true;
      else if (v == 1) has_lit1 = true;
      else named.push_back(v);
    }
    if (named.empty()) {
      for (auto v : members) net_of_node[v] = v; // the literal nets 0/1
      continue;
    }
    auto best = *std::min_element(named.begin(), named.end(), [&](std::uint32_t a, std::uint32_t b) {
      int da = depth_of(node_name[a]), db = depth_of(node_name[b]);
      if (da != db) return da < db;
      return a < b;
    });
    Net net;
    net.name = node_name[best];
    for (auto v : named)
      if (v != best) net.aliases.push_back(node_name[v]);
    NetId id = static_cast<NetId>(D.nets_.size());
    if (has_lit0 || has_lit1) {
      net.driver = DriverKind::Const;
      net.driver_index = static_cast<std::uint32_t>(D.consts_.size());
      D.consts_.push_back({"", id, has_lit1});
    }
    D.nets_.push_back(std::move(net));
    for (auto v : named) net_of_node[v] = id;
    // literal nodes keep pointing at the hidden nets for LUT pins
    if (has_lit0) net_of_node[0] = 0;
    if (has_lit1) net_of_node[1] = 1;
  }
  net_of_node[0] = kConst0;
  net_of_node[1] = kConst1;
  auto net_id = [&](const NetBit& b) { return net_of_node[node(b)]; };
  for (NetId i = 0; i < D.nets_.size(); ++i) {
    D.by_name_.emplace(D.nets_[i].name, i);
    for (const auto& a : D.nets_[i].aliases) D.by_name_.emplace(a, i);
  }

  auto set_driver = [&](NetId id, DriverKind kind, std::uint32_t index, const std::string& who) {
    Net& net = D.nets_[id];
    if (net.driver != DriverKind::None)
      throw Error(fmt::format("net {} has multiple drivers (second: {})", net.name, who));
    net.driver = kind;
    net.driver_index = index;
  };

  // Ports.
  D.input_roles_.assign(D.nets_.size(), PortRole::Free);
  std::vector<char> dff_clock(D.nets_.size(), 0);
  for (const auto& c : m.cells)
    if (c.kind == CellKind::Dff && !c.clock.is_const()) dff_clock[net_id(c.clock)] = 1;
  for (const auto& p : m.ports) {
    PortInfo info;
    info.name = p.name;
    info.range = p.range;
    info.dir = p.dir;
    auto idx = p.range.indices_msb_first();
    std::reverse(idx.begin(), idx.end());
    for (int i : idx) {
      NetBit b = NetBit::signal(p.name, i);
      info.bits.push_back(net_id(b));
      info.bit_names.push_back(b.str());
    }
    if (p.dir == PortDir::Input) {
      auto it = roles.roles.find(p.name);
      if (it != roles.roles.end()) {
        info.role = it->second;
      } else {
        info.role = guess_role(p.name);
        for (NetId b : info.bits)
          if (dff_clock[b]) info.role = PortRole::Clock;
      }
      for (std::size_t i = 0; i < info.bits.size(); ++i) {
        set_driver(info.bits[i], DriverKind::Input, static_cast<std::uint32_t>(D.ports_.size()), "input " + p.name);
        D.input_roles_[info.bits[i]] = info.role;
        if (info.role == PortRole::Clock) D.nets_[info.bits[i]].clock = true;
        else D.stim_inputs_.push_back(info.bits[i]);
      }
    }
    D.ports_.push_back(std::move(info));
  }
  for (const auto& [name, role] : roles.roles)
    if (!D.find_port(name)) throw Error(fmt::format("port roles name unknown port '{}'", name));

  // Cells.
  for (const auto& c : m.cells) {
    switch (c.kind) {
    case CellKind::Lut: {
      Lut l;
      l.name = c.name;
      l.init = c.init;
      l.k = c.lut_size();
      for (unsigned i = 0; i < l.k; ++i) l.in[i] = net_id(c.inputs[i]);
      l.out = net_id(c.output);
      auto idx = static_cast<std::uint32_t>(D.luts_.size());
      set_driver(l.out, DriverKind::Lut, idx, "LUT " + c.name);
      D.lut_by_name_.emplace(c.name, idx);
      D.luts_.push_back(std::move(l));
      break;
    }
    case CellKind::Dff: {
      Dff f;
      f.name = c.name;
      f.clock = net_id(c.clock);
      f.d = net_id(c.data);
      f.q = net_id(c.output);
      if (c.reset) f.reset = net_id(*c.reset);
      f.reset_value = c.reset_value;
      auto idx = static_cast<std::uint32_t>(D.dffs_.size());
      set_driver(f.q, DriverKind::Dff, idx, "DFF " + c.name);
      D.dff_by_name_.emplace(c.name, idx);
      D.dffs_.push_back(std::move(f));
      break;
    }
    case CellKind::Const0:
    case CellKind::Const1: {
      Const k{c.name, net_id(c.output), c.kind == CellKind::Const1};
      set_driver(k.out, DriverKind::Const, static_cast<std::uint32_t>(D.consts_.size()), "constant " + c.name);
      D.consts_.push_back(std::move(k));
      break;
    }
    }
  }

  // Trace table.
  D.trace_index_.assign(D.nets_.size(), -1);
  for (NetId i = 0; i < D.nets_.size(); ++i) {
    if (D.nets_[i].hidden || D.nets_[i].clock) continue;
    D.trace_index_[i] = static_cast<std::int32_t>(D.traced_.size());
    D.traced_.push_back(i);
  }

  // LUT fanout (CSR).
  std::vector<std::vector<std::uint32_t>> fo(D.nets_.size());
  for (std::uint32_t li = 0; li < D.luts_.size(); ++li) {
    const auto& l = D.luts_[li];
    for (NetId in : l.inputs())
      if (fo[in].empty() || fo[in].back() != li) fo[in].push_back(li);
  }
  D.fanout_offsets_.assign(D.nets_.size() + 1, 0);
  for (std::size_t i = 0; i < fo.size(); ++i) {
    std::sort(fo[i].begin(), fo[i].end());
    fo[i].erase(std::unique(fo[i].begin(), fo[i].end()), fo[i].end());
    D.fanout_offsets_[i + 1] = D.fanout_offsets_[i] + static_cast<std::uint32_t>(fo[i].size());
  }
  for (auto& v : fo) D.fanout_.insert(D.fanout_.end(), v.begin(), v.end());

  // Kahn over LUT->LUT edges.
  std::vector<std::uint32_t> indeg(D.luts_.size(), 0);
  for (std::uint32_t li = 0; li < D.luts_.size(); ++li)
    for (NetId in : D.luts_[li].inputs())
      if (D.nets_[in].driver == DriverKind::Lut) ++indeg[li];
  std::queue<std::uint32_t> ready;
  for (std::uint32_t li = 0; li < D.luts_.size(); ++li)
    if (indeg[li] == 0) ready.push(li);
  while (!ready.empty()) {
    auto li = ready.front();
    ready.pop();
    D.lut_order_.push_back(li);
    NetId out = D.luts_[li].out;
    for (auto r : D.lut_fanout(out)) {
      for (NetId in : D.luts_[r].inputs())
        if (in == out && --indeg[r] == 0) ready.push(r);
    }
  }
  if (D.lut_order_.size() != D.luts_.size()) {
    if (check_loops) throw Error("combinational loop through LUTs");
    D.lut_order_.clear();
  }
  return D;
}

std::optional<NetId> Design::find_net(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Design::find_lut(std::string_view cell) const {
  auto it = lut_by_name_.find(std::string(cell));
  if (it == lut_by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Design::find_dff(std::string_view cell) const {
  auto it = dff_by_name_.find(std::string(cell));
  if (it == dff_by_name_.end()) return std::nullopt;
  return it->second;
}

const Design::PortInfo* Design::find_port(std::string_view name) const {
  for (const auto& p : ports_)
    if (p.name == name) return &p;
  return nullptr;
}

PortRole Design::input_role(NetId id) const { return input_roles_[id]; }

std::optional<std::uint32_t> Design::trace_index(NetId id) const {
  if (id >= trace_index_.size() || trace_index_[id] < 0) return std::nullopt;
  return static_cast<std::uint32_t>(trace_index_[id]);
}

std::span<const std::uint32_t> Design::lut_fanout(NetId id) const {
  return {fanout_.data() + fanout_offsets_[id], fanout_offsets_[id + 1] - fanout_offsets_[id]};
}

std::vector<NetId> Design::output_bits() const {
  std::vector<NetId> out;
  for (const auto& p : ports_)
    if (p.dir == PortDir::Output) out.insert(out.end(), p.bits.begin(), p.bits.end());
  return out;
}

} // namespace lutscope
