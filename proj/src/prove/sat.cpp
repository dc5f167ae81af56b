#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "lutscope/logic.hpp"
#include "lutscope/sat.hpp"

namespace lutscope {

std::string_view to_string(SatStatus s) {
  switch (s) {
    case SatStatus::Sat: return "SAT";
    case SatStatus::Unsat: return "UNSAT";
    case SatStatus::Unknown: return "UNKNOWN";
  }
  return "?";
}

std::string CnfFormula::to_dimacs() const {
  std::string out = fmt::format("p cnf {} {}\n", num_vars, clauses.size());
  for (const auto& c : clauses) {
    for (Lit l : c) out += fmt::format("{} ", l.negated() ? -static_cast<long>(l.var() + 1) : static_cast<long>(l.var() + 1));
    out += "0\n";
  }
  return out;
}

CnfFormula CnfFormula::from_dimacs(std::string_view text) {
  CnfFormula f;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = false;
  std::vector<Lit> cur;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c') continue;
    std::istringstream ls(line);
    if (line[0] == 'p') {
      std::string p, cnf;
      std::size_t n = 0, m = 0;
      if (!(ls >> p >> cnf >> n >> m) || cnf != "cnf") throw Error("dimacs: bad header");
      f.num_vars = static_cast<std::uint32_t>(n);
      header = true;
      continue;
    }
    if (!header) throw Error("dimacs: clause before header");
    long v = 0;
    while (ls >> v) {
      if (v == 0) {
        f.clauses.push_back(cur);
        cur.clear();
        continue;
      }
      const auto var = static_cast<std::uint32_t>(std::labs(v) - 1);
      if (var >= f.num_vars) throw Error(fmt::format("dimacs: variable {} out of range", std::labs(v)));
      cur.push_back(Lit::make(var, v > 0));
    }
    if (!ls.eof()) throw Error(fmt::format("dimacs: bad token in '{}'", line));
  }
  if (!cur.empty()) throw Error("dimacs: unterminated clause");
  return f;
}

bool CnfFormula::satisfied_by(const std::vector<bool>& model) const {
  for (const auto& c : clauses) {
    bool sat = false;
    for (Lit l : c)
      if (l.var() < model.size() && model[l.var()] != l.negated()) {
        sat = true;
        break;
      }
    if (!sat) return false;
  }
  return true;
}

std::uint32_t SatSolver::new_var() {
  const auto v = static_cast<std::uint32_t>(assign_.size());
  assign_.push_back(kUndef);
  level_.push_back(0);
  reason_.push_back(kNoReason);
  polarity_.push_back(false);
  activity_.push_back(0.0);
  seen_.push_back(0);
  heap_pos_.push_back(-1);
  watches_.emplace_back();
  watches_.emplace_back();
  heap_insert(v);
  return v;
}

void SatSolver::add_formula(const CnfFormula& f) {
  while (num_vars() < f.num_vars) new_var();
  for (const auto& c : f.clauses) add_clause(c);
}

bool SatSolver::add_clause(std::span<const Lit> lits) {
  if (!ok_) return false;
  backtrack(0);
  std::vector<Lit> c(lits.begin(), lits.end());
  for (Lit l : c)
    while (l.var() >= num_vars()) new_var();
  std::sort(c.begin(), c.end());
  std::vector<Lit> kept;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i > 0 && c[i] == c[i - 1]) continue;
    if (i > 0 && c[i] == ~c[i - 1]) return true; // tautology
    const auto v = value(c[i]);
    if (v == kTrue) return true;
    if (v == kFalse) continue;
    kept.push_back(c[i]);
  }
  if (kept.empty()) return ok_ = false;
  if (kept.size() == 1) {
    enqueue(kept[0], kNoReason);
    return ok_ = !propagate().has_value();
  }
  clauses_.push_back({std::move(kept), false, 0.0});
  attach(static_cast<std::uint32_t>(clauses_.size() - 1));
  return true;
}

void SatSolver::attach(std::uint32_t ci) {
  const auto& c = clauses_[ci].lits;
  watches_[(~c[0]).x].push_back({ci, c[1]});
  watches_[(~c[1]).x].push_back({ci, c[0]});
}

void SatSolver::enqueue(Lit l, std::uint32_t reason) {
  assign_[l.var()] = l.negated() ? kFalse : kTrue;
  level_[l.var()] = level();
  reason_[l.var()] = reason;
  trail_.push_back(l);
}

// Watches are keyed by the negation of the watched literal: when literal p
// becomes true, every clause watching ~p must find a new watch.
std::optional<std::uint32_t> SatSolver::propagate() {
  while (qhead_ < trail_.size()) {
    const Lit p = trail_[qhead_++];
    ++stats_.propagations;
    auto& ws = watches_[p.x];
    std::size_t i = 0, j = 0;
    const Lit false_lit = ~p;
    while (i < ws.size()) {
      const Watch w = ws[i++];
      if (value(w.blocker) == kTrue) {
        ws[j++] = w;
        continue;
      }
      auto& c = clauses_[w.clause].lits;
      if (c[0] == false_lit) std::swap(c[0], c[1]);
      const Lit first = c[0];
      if (first != w.blocker && value(first) == kTrue) {
        ws[j++] = {w.clause, first};
        continue;
      }
      bool moved = false;
      for (std::size_t k = 2; k < c.size(); ++k) {
        if (value(c[k]) != kFalse) {
          std::swap(c[1], c[k]);
          watches_[(~c[1]).x].push_back({w.clause, first});
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = {w.clause, first};
      if (value(first) == kFalse) {
        while (i < ws.size()) ws[j++] = ws[i++];
        ws.resize(j);
        qhead_ = trail_.size();
        return w.clause;
      }
      enqueue(first, w.clause);
    }
    ws.resize(j);
  }
  return std::nullopt;
}

void SatSolver::bump_var(std::uint32_t v) {
  if ((activity_[v] += var_inc_) > 1e100) {
    for (auto& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_pos_[v] >= 0) heap_up(static_cast<std::size_t>(heap_pos_[v]));
}

void SatSolver::bump_clause(Clause& c) {
  if ((c.activity += cla_inc_) > 1e20) {
    for (auto ci : learnts_) clauses_[ci].activity *= 1e-20;
    cla_inc_ *= 1e-20;
  }
}

void SatSolver::analyze(std::uint32_t conflict, std::vector<Lit>& learnt, std::uint32_t& back_level) {
  learnt.assign(1, Lit{});
  int pending = 0;
  Lit p{};
  bool have_p = false;
  std::size_t index = trail_.size();
  std::uint32_t ci = conflict;
  do {
    auto& c = clauses_[ci];
    if (c.learnt) bump_clause(c);
    for (std::size_t k = have_p ? 1 : 0; k < c.lits.size(); ++k) {
      const Lit q = c.lits[k];
      const auto v = q.var();
      if (seen_[v] || level_[v] == 0) continue;
      seen_[v] = 1;
      bump_var(v);
      if (level_[v] >= level())
        ++pending;
      else
        learnt.push_back(q);
    }
    while (!seen_[trail_[--index].var()]) {
    }
    p = trail_[index];
    have_p = true;
    ci = reason_[p.var()];
    seen_[p.var()] = 0;
    --pending;
    // The reason clause has p in position 0 once propagated.
    if (pending > 0 && ci != kNoReason && clauses_[ci].lits[0] != p) {
      auto& rl = clauses_[ci].lits;
      auto it = std::find(rl.begin(), rl.end(), p);
      std::iter_swap(rl.begin(), it);
    }
  } while (pending > 0);
  learnt[0] = ~p;

  for (std::size_t k = 1; k < learnt.size(); ++k) seen_[learnt[k].var()] = 0;

  back_level = 0;
  if (learnt.size() > 1) {
    std::size_t max_i = 1;
    for (std::size_t k = 2; k < learnt.size(); ++k)
      if (level_[learnt[k].var()] > level_[learnt[max_i].var()]) max_i = k;
    std::swap(learnt[1], learnt[max_i]);
    back_level = level_[learnt[1].var()];
  }
}

void SatSolver::backtrack(std::uint32_t lvl) {
  if (level() <= lvl) return;
  for (std::size_t i = trail_.size(); i-- > trail_lim_[lvl];) {
    const auto v = trail_[i].var();
    polarity_[v] = !trail_[i].negated();
    assign_[v] = kUndef;
    reason_[v] = kNoReason;
    if (heap_pos_[v] < 0) heap_insert(v);
  }
  trail_.resize(trail_lim_[lvl]);
  trail_lim_.resize(lvl);
  qhead_ = trail_.size();
}

void SatSolver::heap_insert(std::uint32_t v) {
  heap_pos_[v] = static_cast<std::int64_t>(heap_.size());
  heap_.push_back(v);
  heap_up(heap_.size() - 1);
}

void SatSolver::heap_up(std::size_t i) {
  const auto v = heap_[i];
  while (i > 0) {
    const std::size_t parent = (i - 1) / 2;
    if (activity_[heap_[parent]] >= activity_[v]) break;
    heap_[i] = heap_[parent];
    heap_pos_[heap_[i]] = static_cast<std::int64_t>(i);
    i = parent;
  }
  heap_[i] = v;
  heap_pos_[v] = static_cast<std::int64_t>(i);
}

void SatSolver::heap_down(std::size_t i) {
  const auto v = heap_[i];
  for (;;) {
    std::size_t child = 2 * i + 1;
    if (child >= heap_.size()) break;
    if (child + 1 < heap_.size() && activity_[heap_[child + 1]] > activity_[heap_[child]]) ++child;
    if (activity_[heap_[child]] <= activity_[v]) break;
    heap_[i] = heap_[child];
    heap_pos_[heap_[i]] = static_cast<std::int64_t>(i);
    i = child;
  }
  heap_[i] = v;
  heap_pos_[v] = static_cast<std::int64_t>(i);
}

std::uint32_t SatSolver::heap_pop() {
  const auto top = heap_[0];
  heap_pos_[top] = -1;
  heap_[0] = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_pos_[heap_[0]] = 0;
    heap_down(0);
  }
  return top;
}

std::optional<Lit> SatSolver::pick_branch() {
  while (!heap_.empty()) {
    const auto v = heap_pop();
    if (assign_[v] == kUndef) return Lit::make(v, polarity_[v]);
  }
  return std::nullopt;
}

void SatSolver::reduce_learnts() {
  // Drop the less active half of learnt clauses that are not reasons.
  std::vector<std::uint32_t> sorted = learnts_;
  std::sort(sorted.begin(), sorted.end(),
            [&](std::uint32_t a, std::uint32_t b) { return clauses_[a].activity < clauses_[b].activity; });
  std::vector<char> drop(clauses_.size(), 0);
  for (std::size_t i = 0; i < sorted.size() / 2; ++i) {
    const auto ci = sorted[i];
    const auto& c = clauses_[ci].lits;
    if (c.size() <= 2) continue;
    const Lit l0 = c[0];
    if (value(l0) == kTrue && reason_[l0.var()] == ci) continue;
    drop[ci] = 1;
  }
  // Compact the clause store and remap reasons.
  std::vector<std::uint32_t> remap(clauses_.size(), kNoReason);
  std::vector<Clause> kept;
  kept.reserve(clauses_.size());
  for (std::uint32_t ci = 0; ci < clauses_.size(); ++ci) {
    if (drop[ci]) continue;
    remap[ci] = static_cast<std::uint32_t>(kept.size());
    kept.push_back(std::move(clauses_[ci]));
  }
  clauses_ = std::move(kept);
  for (auto& r : reason_)
    if (r != kNoReason) r = remap[r];
  learnts_.clear();
  for (auto& ws : watches_) ws.clear();
  for (std::uint32_t ci = 0; ci < clauses_.size(); ++ci) {
    if (clauses_[ci].learnt) learnts_.push_back(ci);
    attach(ci);
  }
}

namespace {

double luby(double y, std::uint64_t x) {
  std::uint64_t size = 1, seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return std::pow(y, static_cast<double>(seq));
}

} // namespace

SatStatus SatSolver::solve(std::span<const Lit> assumptions, std::uint64_t conflict_budget) {
  model_.clear();
  if (!ok_) return SatStatus::Unsat;
  for (Lit a : assumptions)
    while (a.var() >= num_vars()) new_var();
  backtrack(0);
  if (propagate()) return ok_ = false, SatStatus::Unsat;

  const std::uint64_t start = stats_.conflicts;
  std::uint64_t restart_no = 0;
  std::uint64_t restart_left = static_cast<std::uint64_t>(100 * luby(2.0, restart_no));
  std::vector<Lit> learnt;

  for (;;) {
    if (auto conflict = propagate()) {
      ++stats_.conflicts;
      if (level() == 0) return ok_ = false, SatStatus::Unsat;
      std::uint32_t back_level = 0;
      analyze(*conflict, learnt, back_level);
      backtrack(back_level);
      if (learnt.size() == 1) {
        enqueue(learnt[0], kNoReason);
      } else {
        clauses_.push_back({learnt, true, 0.0});
        const auto ci = static_cast<std::uint32_t>(clauses_.size() - 1);
        learnts_.push_back(ci);
        attach(ci);
        bump_clause(clauses_[ci]);
        enqueue(learnt[0], ci);
      }
      var_inc_ /= 0.95;
      cla_inc_ /= 0.999;
      if (restart_left > 0) --restart_left;
      continue;
    }
    if (conflict_budget != 0 && stats_.conflicts - start >= conflict_budget) {
      backtrack(0);
      return SatStatus::Unknown;
    }
    if (restart_left == 0) {
      backtrack(0);
      restart_left = static_cast<std::uint64_t>(100 * luby(2.0, ++restart_no));
    }
    if (learnts_.size() >= max_learnts_ + trail_.size()) {
      reduce_learnts();
      max_learnts_ += max_learnts_ / 10;
    }

    // Assumptions occupy the first decision levels.
    std::optional<Lit> next;
    while (level() < assumptions.size()) {
      const Lit a = assumptions[level()];
      const auto v = value(a);
      if (v == kTrue) {
        trail_lim_.push_back(trail_.size());
      } else if (v == kFalse) {
        backtrack(0);
        return SatStatus::Unsat;
      } else {
        next = a;
        break;
      }
    }
    if (!next) {
      next = pick_branch();
      if (!next) {
        model_.resize(num_vars());
        for (std::uint32_t v = 0; v < num_vars(); ++v) model_[v] = assign_[v] == kTrue;
        backtrack(0);
        if (!verify_model()) throw Error("sat: internal error, model violates a clause");
        return SatStatus::Sat;
      }
      ++stats_.decisions;
    }
    trail_lim_.push_back(trail_.size());
    enqueue(*next, kNoReason);
  }
}

bool SatSolver::verify_model() const {
  for (const auto& c : clauses_) {
    if (c.learnt) continue;
    bool sat = false;
    for (Lit l : c.lits)
      if (model_[l.var()] != l.negated()) {
        sat = true;
        break;
      }
    if (!sat) return false;
  }
  return true;
}

SatResult sat_check(const CnfFormula& f, std::span<const Lit> assumptions, std::uint64_t conflict_budget) {
  SatSolver s;
  s.add_formula(f);
  SatResult r;
  r.status = s.solve(assumptions, conflict_budget);
  r.stats = s.stats();
  if (r.status == SatStatus::Sat) {
    r.model = s.model();
    r.model.resize(f.num_vars);
    if (!f.satisfied_by(r.model)) throw Error("sat: model does not satisfy the formula");
    for (Lit a : assumptions)
      if (r.model[a.var()] == a.negated()) throw Error("sat: model violates an assumption");
  }
  return r;
}

} // namespace lutscope
