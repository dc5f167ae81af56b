#pragma once

// Exhaustive CNF oracle shared by the SAT tests and the acceptance run.

#include <cstdint>
#include <random>
#include <vector>

#include "lutscope/sat.hpp"

namespace lutscope::testing {

struct Clause {
  std::uint32_t pos = 0;
  std::uint32_t neg = 0;
};

inline std::vector<Clause> masks_of(const CnfFormula& f) {
  std::vector<Clause> out;
  for (const auto& c : f.clauses) {
    Clause m;
    for (Lit l : c) (l.negated() ? m.neg : m.pos) |= 1u << l.var();
    out.push_back(m);
  }
  return out;
}

// Exhaustive satisfiability with some variables pinned.
inline bool brute_sat(const CnfFormula& f, std::uint32_t fixed_mask = 0, std::uint32_t fixed_value = 0) {
  const auto cs = masks_of(f);
  for (std::uint32_t a = 0; a < (1u << f.num_vars); ++a) {
    if ((a & fixed_mask) != fixed_value) continue;
    bool ok = true;
    for (const auto& c : cs)
      if (!((a & c.pos) | (~a & c.neg))) {
        ok = false;
        break;
      }
    if (ok) return true;
  }
  return false;
}

inline CnfFormula random_cnf(std::mt19937_64& rng, std::uint32_t n, std::size_t m) {
  CnfFormula f;
  f.num_vars = n;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<Lit> c;
    const std::size_t len = 1 + rng() % 4;
    for (std::size_t j = 0; j < len; ++j) c.push_back(Lit::make(static_cast<std::uint32_t>(rng() % n), rng() & 1u));
    f.add(c);
  }
  return f;
}

} // namespace lutscope::testing
