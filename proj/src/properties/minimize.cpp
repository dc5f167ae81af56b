#include <algorithm>
#include <bit>
#include <set>

#include <fmt/format.h>

#include "lutscope/properties.hpp"

namespace lutscope {

unsigned Cube::literals() const { return static_cast<unsigned>(std::popcount(mask)); }

std::string Cube::key(unsigned k) const {
  std::string s;
  for (unsigned i = k; i-- > 0;) s += ((mask >> i) & 1u) ? (((value >> i) & 1u) ? '1' : '0') : '-';
  return s;
}

namespace {

void check_k(unsigned k) {
  if (k < 1 || k > 6) throw Error(fmt::format("LUT size {} out of range 1..6", k));
}

std::uint64_t minterms_of(const Cube& c, unsigned k) {
  std::uint64_t bits = 0;
  for (std::uint64_t m = 0; m < init_width(k); ++m)
    if (c.contains(m)) bits |= std::uint64_t{1} << m;
  return bits;
}

struct ByKey {
  unsigned k;
  bool operator()(const Cube& a, const Cube& b) const { return a.key(k) < b.key(k); }
};

} // namespace

std::vector<Cube> prime_implicants(unsigned k, std::uint64_t onset) {
  check_k(k);
  const std::uint64_t full = width_mask(k);
  onset &= width_mask(init_width(k));
  std::vector<Cube> level;
  for (std::uint64_t m = 0; m < init_width(k); ++m)
    if ((onset >> m) & 1u) level.push_back({full, m});

  std::vector<Cube> primes;
  while (!level.empty()) {
    std::vector<char> merged(level.size(), 0);
    std::set<std::pair<std::uint64_t, std::uint64_t>> next;
    for (std::size_t i = 0; i < level.size(); ++i) {
      for (std::size_t j = i + 1; j < level.size(); ++j) {
        if (level[i].mask != level[j].mask) continue;
        const std::uint64_t diff = level[i].value ^ level[j].value;
        if (std::popcount(diff) != 1) continue;
        merged[i] = merged[j] = 1;
        next.insert({level[i].mask & ~diff, level[i].value & ~diff});
      }
    }
    for (std::size_t i = 0; i < level.size(); ++i)
      if (!merged[i]) primes.push_back(level[i]);
    level.clear();
    for (auto [mask, value] : next) level.push_back({mask, value});
  }
  std::sort(primes.begin(), primes.end(), ByKey{k});
  return primes;
}

namespace {

// Branch-and-bound cover search. Equal-cost covers are all visited so the
// lexicographic tie-break is exact.
class CoverSearch {
public:
  CoverSearch(unsigned k, std::vector<Cube> primes) : primes_(std::move(primes)) {
    for (const auto& p : primes_) {
      cover_.push_back(minterms_of(p, k));
      keys_.push_back(p.key(k));
    }
  }

  std::vector<std::size_t> run(std::uint64_t onset) {
    std::vector<std::size_t> chosen;
    // Essential primes are part of every cover.
    std::uint64_t left = onset;
    for (std::uint64_t m = 0; m < 64; ++m) {
      if (!((onset >> m) & 1u)) continue;
      std::size_t only = SIZE_MAX, count = 0;
      for (std::size_t p = 0; p < primes_.size(); ++p)
        if ((cover_[p] >> m) & 1u) {
          only = p;
          ++count;
        }
      if (count == 1 && std::find(chosen.begin(), chosen.end(), only) == chosen.end()) {
        chosen.push_back(only);
        left &= ~cover_[only];
      }
    }
    search(chosen, left);
    return best_;
  }

private:
  struct Cost {
    std::size_t cubes;
    unsigned literals;
    std::vector<std::string> keys;
    auto operator<=>(const Cost&) const = default;
  };

  Cost cost_of(const std::vector<std::size_t>& set) const {
    Cost c{set.size(), 0, {}};
    for (auto p : set) {
      c.literals += primes_[p].literals();
      c.keys.push_back(keys_[p]);
    }
    std::sort(c.keys.begin(), c.keys.end());
    return c;
  }

  void search(std::vector<std::size_t>& chosen, std::uint64_t left) {
    if (left == 0) {
      Cost c = cost_of(chosen);
      if (!have_best_ || c < best_cost_) {
        best_cost_ = std::move(c);
        best_ = chosen;
        have_best_ = true;
      }
      return;
    }
    if (have_best_ && chosen.size() + 1 > best_cost_.cubes) return;
    // Branch on the minterm with the fewest candidate primes.
    std::uint64_t pick = 0;
    std::size_t fewest = SIZE_MAX;
    for (std::uint64_t m = 0; m < 64; ++m) {
      if (!((left >> m) & 1u)) continue;
      std::size_t n = 0;
      for (auto c : cover_) n += (c >> m) & 1u;
      if (n < fewest) {
        fewest = n;
        pick = m;
      }
    }
    for (std::size_t p = 0; p < primes_.size(); ++p) {
      if (!((cover_[p] >> pick) & 1u)) continue;
      chosen.push_back(p);
      search(chosen, left & ~cover_[p]);
      chosen.pop_back();
    }
  }

  std::vector<Cube> primes_;
  std::vector<std::uint64_t> cover_;
  std::vector<std::string> keys_;
  std::vector<std::size_t> best_;
  Cost best_cost_;
  bool have_best_ = false;
};

} // namespace

std::vector<Cube> minimize(unsigned k, std::uint64_t onset) {
  check_k(k);
  onset &= width_mask(init_width(k));
  if (onset == 0) return {};
  auto primes = prime_implicants(k, onset);
  CoverSearch search(k, primes);
  std::vector<Cube> out;
  for (auto i : search.run(onset)) out.push_back(primes[i]);
  std::sort(out.begin(), out.end(), ByKey{k});
  return out;
}

} // namespace lutscope
