#pragma once

// Small CDCL SAT solver (watched literals, VSIDS, first-UIP learning, Luby
// restarts). Supports assumptions and a conflict budget; clauses may be added
// between solve() calls.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lutscope {

/// Literal: 2 * var + (negated ? 1 : 0). Variables start at 0.
struct Lit {
  std::uint32_t x = 0;

  static Lit pos(std::uint32_t var) { return {var << 1}; }
  static Lit neg(std::uint32_t var) { return {(var << 1) | 1u}; }
  static Lit make(std::uint32_t var, bool value) { return value ? pos(var) : neg(var); }
  std::uint32_t var() const { return x >> 1; }
  bool negated() const { return x & 1u; }
  Lit operator~() const { return {x ^ 1u}; }
  bool operator==(const Lit&) const = default;
  auto operator<=>(const Lit&) const = default;
};

enum class SatStatus : std::uint8_t { Sat, Unsat, Unknown };

std::string_view to_string(SatStatus s);

/// Plain CNF, for DIMACS exchange and one-shot checks.
struct CnfFormula {
  std::uint32_t num_vars = 0;
  std::vector<std::vector<Lit>> clauses;

  std::uint32_t new_var() { return num_vars++; }
  void add(std::vector<Lit> c) { clauses.push_back(std::move(c)); }
  std::string to_dimacs() const;
  static CnfFormula from_dimacs(std::string_view text);
  /// True when `model` (indexed by var) satisfies every clause.
  bool satisfied_by(const std::vector<bool>& model) const;
};

struct SatStats {
  std::uint64_t conflicts = 0;
  std::uint64_t decisions = 0;
  std::uint64_t propagations = 0;
};

class SatSolver {
public:
  SatSolver() = default;

  std::uint32_t new_var();
  std::uint32_t num_vars() const { return static_cast<std::uint32_t>(assign_.size()); }
  /// Returns false if the formula became trivially unsatisfiable.
  bool add_clause(std::span<const Lit> lits);
  bool add_clause(std::initializer_list<Lit> lits) { return add_clause(std::span(lits.begin(), lits.size())); }
  void add_formula(const CnfFormula& f);

  /// `conflict_budget` == 0 means unlimited. Unknown when the budget runs out.
  SatStatus solve(std::span<const Lit> assumptions = {}, std::uint64_t conflict_budget = 0);

  /// Model of the last Sat answer.
  bool model_value(std::uint32_t var) const { return model_[var]; }
  bool model_value(Lit l) const { return model_[l.var()] != l.negated(); }
  const std::vector<bool>& model() const { return model_; }
  const SatStats& stats() const { return stats_; }

private:
  enum : std::uint8_t { kFalse = 0, kTrue = 1, kUndef = 2 };

  struct Clause {
    std::vector<Lit> lits;
    bool learnt = false;
    double activity = 0;
  };
  struct Watch {
    std::uint32_t clause;
    Lit blocker;
  };

  std::uint8_t value(Lit l) const {
    const std::uint8_t v = assign_[l.var()];
    if (v == kUndef) return kUndef;
    return static_cast<std::uint8_t>(v ^ static_cast<std::uint8_t>(l.negated()));
  }
  std::uint32_t level() const { return static_cast<std::uint32_t>(trail_lim_.size()); }
  void enqueue(Lit l, std::uint32_t reason);
  std::optional<std::uint32_t> propagate();
  void analyze(std::uint32_t conflict, std::vector<Lit>& learnt, std::uint32_t& back_level);
  void backtrack(std::uint32_t lvl);
  void attach(std::uint32_t ci);
  void bump_var(std::uint32_t v);
  void bump_clause(Clause& c);
  void reduce_learnts();
  std::optional<Lit> pick_branch();
  void heap_insert(std::uint32_t v);
  void heap_up(std::size_t i);
  void heap_down(std::size_t i);
  std::uint32_t heap_pop();
  bool verify_model() const;

  static constexpr std::uint32_t kNoReason = UINT32_MAX;

  std::vector<Clause> clauses_;
  std::vector<std::uint32_t> learnts_;
  std::vector<std::vector<Watch>> watches_; // indexed by literal
  std::vector<std::uint8_t> assign_;
  std::vector<std::uint32_t> level_;
  std::vector<std::uint32_t> reason_;
  std::vector<bool> polarity_;
  std::vector<double> activity_;
  std::vector<Lit> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
  std::vector<std::uint32_t> heap_;
  std::vector<std::int64_t> heap_pos_;
  std::vector<char> seen_;
  std::vector<bool> model_;
  double var_inc_ = 1.0;
  double cla_inc_ = 1.0;
  bool ok_ = true;
  SatStats stats_;
  std::size_t max_learnts_ = 2000;
};

struct SatResult {
  SatStatus status = SatStatus::Unknown;
  std::vector<bool> model;
  SatStats stats;
};

/// One-shot check of `f` under `assumptions`; models are checked against the
/// formula before being returned.
SatResult sat_check(const CnfFormula& f, std::span<const Lit> assumptions = {}, std::uint64_t conflict_budget = 0);

} // namespace lutscope
