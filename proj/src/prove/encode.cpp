#include <algorithm>

#include <fmt/format.h>

#include "lutscope/prove.hpp"

namespace lutscope {

Cone extract_cone(const Design& d, std::span<const NetId> roots) {
  Cone c;
  std::vector<char> seen(d.nets().size(), 0);
  std::vector<char> in_cone(d.luts().size(), 0);
  std::vector<NetId> stack(roots.begin(), roots.end());
  while (!stack.empty()) {
    const NetId n = stack.back();
    stack.pop_back();
    if (n >= seen.size()) throw Error(fmt::format("cone: net id {} out of range", n));
    if (seen[n]) continue;
    seen[n] = 1;
    const auto& net = d.net(n);
    switch (net.driver) {
      case Design::DriverKind::Lut: {
        in_cone[net.driver_index] = 1;
        for (NetId i : d.luts()[net.driver_index].inputs()) stack.push_back(i);
        break;
      }
      case Design::DriverKind::Const: break;
      default: c.leaves.push_back(n);
    }
  }
  for (auto li : d.lut_order())
    if (in_cone[li]) c.luts.push_back(li);
  std::sort(c.leaves.begin(), c.leaves.end());
  return c;
}

FrameEncoder::FrameEncoder(const Design& d, SatSolver& s, CnfFormula* log) : d_(d), s_(s), log_(log) {
  true_ = Lit::pos(new_var());
  add({true_});
}

std::uint32_t FrameEncoder::new_var() {
  const auto v = s_.new_var();
  if (log_) log_->num_vars = std::max(log_->num_vars, v + 1);
  return v;
}

void FrameEncoder::add(std::initializer_list<Lit> c) { add(std::span(c.begin(), c.size())); }

void FrameEncoder::add(std::span<const Lit> c) {
  s_.add_clause(c);
  if (log_) log_->clauses.emplace_back(c.begin(), c.end());
}

FrameEncoder::Frame FrameEncoder::new_frame() {
  Frame f;
  f.lit.resize(d_.nets().size());
  f.have.assign(d_.nets().size(), 0);
  f.lit[Design::kConst0] = ~true_;
  f.lit[Design::kConst1] = true_;
  f.have[Design::kConst0] = f.have[Design::kConst1] = 1;
  for (const auto& c : d_.consts()) {
    f.lit[c.out] = c.value ? true_ : ~true_;
    f.have[c.out] = 1;
  }
  return f;
}

void FrameEncoder::bind(Frame& f, NetId n, Lit l) {
  if (d_.net(n).driver == Design::DriverKind::Lut || d_.net(n).driver == Design::DriverKind::Const)
    throw Error(fmt::format("cannot bind driven net '{}'", d_.net(n).name));
  f.lit[n] = l;
  f.have[n] = 1;
}

Lit FrameEncoder::net(Frame& f, NetId root) {
  if (f.have[root]) return f.lit[root];
  // Iterative post-order so deep LUT chains do not recurse.
  std::vector<std::pair<NetId, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if (f.have[n]) continue;
    const auto& net = d_.net(n);
    if (net.driver != Design::DriverKind::Lut) {
      if (f.leaf) {
        if (auto l = f.leaf(n)) {
          f.lit[n] = *l;
          f.have[n] = 1;
          continue;
        }
      }
      f.lit[n] = Lit::pos(new_var());
      f.have[n] = 1;
      continue;
    }
    const auto& lut = d_.luts()[net.driver_index];
    if (!expanded) {
      stack.push_back({n, true});
      for (NetId i : lut.inputs())
        if (!f.have[i]) stack.push_back({i, false});
      continue;
    }
    const Lit out = Lit::pos(new_var());
    std::vector<Lit> clause(lut.k + 1);
    for (std::uint64_t m = 0; m < init_width(lut.k); ++m) {
      // (inputs != m) or (out == init[m])
      for (unsigned i = 0; i < lut.k; ++i) {
        const Lit in = f.lit[lut.in[i]];
        clause[i] = ((m >> i) & 1u) ? ~in : in;
      }
      clause[lut.k] = ((lut.init >> m) & 1u) ? out : ~out;
      add(clause);
    }
    f.lit[n] = out;
    f.have[n] = 1;
  }
  return f.lit[root];
}

Lit FrameEncoder::next_state(Frame& f, std::size_t dff) {
  const auto& r = d_.dffs()[dff];
  const Lit data = net(f, r.d);
  if (!r.reset) return data;
  const Lit rst = net(f, *r.reset);
  const Lit rv = r.reset_value ? true_ : ~true_;
  const Lit ns = Lit::pos(new_var());
  add({~rst, ~rv, ns});
  add({~rst, rv, ~ns});
  add({rst, ~data, ns});
  add({rst, data, ~ns});
  return ns;
}

} // namespace lutscope
