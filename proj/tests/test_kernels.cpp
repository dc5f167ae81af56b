#include <gtest/gtest.h>

#include <random>

#include "lutscope/bitsim.hpp"
#include "lutscope/sim.hpp"
#include "support.hpp"

using namespace lutscope;

namespace {

// Restores the dispatch choice after each test.
class KernelTest : public ::testing::Test {
protected:
  void TearDown() override { set_active_isa(detected_isa()); }
};

std::vector<std::vector<std::uint64_t>> random_lines(std::mt19937_64& rng, unsigned k, std::size_t words) {
  std::vector<std::vector<std::uint64_t>> lines(k, std::vector<std::uint64_t>(words));
  for (auto& l : lines)
    for (auto& w : l) w = rng();
  return lines;
}

} // namespace

TEST_F(KernelTest, ScalarMatchesPerBitLookup) {
  std::mt19937_64 rng(21);
  for (unsigned k = 1; k <= 6; ++k) {
    for (int rep = 0; rep < 20; ++rep) {
      const std::uint64_t init = rng() & width_mask(1u << k);
      auto lines = random_lines(rng, k, 3);
      std::vector<const std::uint64_t*> ptrs;
      for (auto& l : lines) ptrs.push_back(l.data());
      std::vector<std::uint64_t> out(3);
      kernels::lut_eval_words_scalar(init, k, ptrs.data(), out.data(), 3);
      for (std::size_t w = 0; w < 3; ++w) {
        for (unsigned b = 0; b < 64; ++b) {
          unsigned addr = 0;
          for (unsigned i = 0; i < k; ++i) addr |= ((lines[i][w] >> b) & 1u) << i;
          ASSERT_EQ((out[w] >> b) & 1u, (init >> addr) & 1u);
        }
      }
    }
  }
}

TEST_F(KernelTest, Avx2MatchesScalar) {
  if (detected_isa() != KernelIsa::Avx2) GTEST_SKIP() << "CPU lacks AVX2";
  std::mt19937_64 rng(22);
  for (unsigned k = 1; k <= 6; ++k) {
    // Odd lengths exercise the scalar tail of the vector kernel.
    for (std::size_t words : {1u, 3u, 4u, 7u, 64u, 129u}) {
      const std::uint64_t init = rng() & width_mask(1u << k);
      auto lines = random_lines(rng, k, words);
      std::vector<const std::uint64_t*> ptrs;
      for (auto& l : lines) ptrs.push_back(l.data());
      std::vector<std::uint64_t> a(words), b(words);
      kernels::lut_eval_words_scalar(init, k, ptrs.data(), a.data(), words);
      kernels::lut_eval_words_avx2(init, k, ptrs.data(), b.data(), words);
      ASSERT_EQ(a, b) << "k=" << k << " words=" << words;
    }
  }
}

TEST_F(KernelTest, DispatchOverride) {
  set_active_isa(KernelIsa::Scalar);
  EXPECT_EQ(active_isa(), KernelIsa::Scalar);
  if (detected_isa() != KernelIsa::Avx2) {
    EXPECT_THROW(set_active_isa(KernelIsa::Avx2), Error);
  }
}

TEST_F(KernelTest, EnumerationPatterns) {
  std::vector<std::uint64_t> w(4);
  for (unsigned var = 0; var < 8; ++var) {
    fill_enumeration(w, var);
    for (std::uint64_t p = 0; p < 256; ++p) ASSERT_EQ((w[p / 64] >> (p % 64)) & 1u, (p >> var) & 1u);
  }
}

// Bit-parallel design evaluation agrees with the four-valued simulator
// whenever every input is known.
TEST_F(KernelTest, BitSimMatchesSimulator) {
  auto d = lutscope::testing::load_design("hier.v");
  for (KernelIsa isa : {KernelIsa::Scalar, detected_isa()}) {
    set_active_isa(isa);
    std::mt19937_64 rng(5);
    BitSim bs(d, 2);
    std::vector<std::vector<LogicValue>> patterns(128);
    for (auto& p : patterns) {
      p.resize(d.stimulus_inputs().size() + d.dffs().size());
      for (auto& v : p) v = from_bool(rng() & 1u);
    }
    auto place = [&](NetId n, std::size_t col) {
      auto words = bs.net(n);
      std::fill(words.begin(), words.end(), 0);
      for (std::size_t p = 0; p < 128; ++p)
        if (patterns[p][col] == LogicValue::One) words[p / 64] |= std::uint64_t{1} << (p % 64);
    };
    const auto& ins = d.stimulus_inputs();
    for (std::size_t i = 0; i < ins.size(); ++i) place(ins[i], i);
    for (std::size_t f = 0; f < d.dffs().size(); ++f) place(d.dffs()[f].q, ins.size() + f);
    bs.evaluate();
    for (std::size_t p = 0; p < 128; ++p) {
      Simulator sim(d);
      for (std::size_t f = 0; f < d.dffs().size(); ++f) sim.set_initial_state(f, patterns[p][ins.size() + f]);
      std::vector<Event> ev;
      sim.step(std::span(patterns[p]).first(ins.size()), ev);
      for (const auto& l : d.luts()) {
        bool bit = (bs.net(l.out)[p / 64] >> (p % 64)) & 1u;
        ASSERT_EQ(sim.value(l.out), from_bool(bit)) << l.name;
      }
    }
  }
}
