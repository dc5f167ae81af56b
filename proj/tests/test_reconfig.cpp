#include <gtest/gtest.h>

#include <random>

#include "lutscope/bitsim.hpp"
#include "lutscope/reconfig.hpp"
#include "support.hpp"

using namespace lutscope;
using lutscope::testing::load_design;
using lutscope::testing::random_netlist_text;

namespace {

Design rebuild(const Netlist& n) { return Design::build(n); }

AnalysisResult with_lut(const Design& d, const std::string& cell, std::uint64_t cover) {
  const auto& l = d.luts()[*d.find_lut(cell)];
  AnalysisResult r;
  r.low_coverage.push_back({cell, d.net(l.out).name, l.k, l.init, cover});
  return r;
}

} // namespace

TEST(Reconfigure, PayloadExample) { EXPECT_EQ(reconfigure_init(0xACCC, 0x0FFF, 4), 0x5CCCu); }

// Bitwise oracle: covered bits keep INIT, uncovered bits are inverted.
TEST(Reconfigure, FlipsExactlyUncoveredBits) {
  std::mt19937_64 rng(51);
  for (int i = 0; i < 1000; ++i) {
    const unsigned k = 1 + rng() % 6;
    const std::uint64_t init = rng() & width_mask(init_width(k)), cover = rng() & width_mask(init_width(k));
    const std::uint64_t out = reconfigure_init(init, cover, k);
    for (unsigned b = 0; b < init_width(k); ++b) {
      const bool want = ((cover >> b) & 1u) ? ((init >> b) & 1u) : !((init >> b) & 1u);
      ASSERT_EQ(((out >> b) & 1u) != 0, want);
    }
    EXPECT_EQ(out & ~width_mask(init_width(k)), 0u);
    EXPECT_EQ(reconfigure_init(init, width_mask(init_width(k)), k), init);
  }
  EXPECT_THROW(reconfigure_init(0, 0, 7), Error);
}

TEST(Plan, JsonRoundTripAndConsistency) {
  PatchPlan p;
  p.patches.push_back({"pay", 4, 0xACCC, 0x0FFF, 0x5CCC});
  p.patches.push_back({"root", 2, 0x8, 0x7, 0x0});
  EXPECT_EQ(PatchPlan::from_json_text(p.to_json_text()), p);
  EXPECT_NE(p.to_json_text().find("\"new_init_hex\": \"5ccc\""), std::string::npos);
  auto bad = p;
  bad.patches[0].new_init = 0x1234;
  EXPECT_THROW(PatchPlan::from_json_text(bad.to_json_text()), Error);
}

TEST(Plan, OnlyLowCoverageCells) {
  auto d = load_design("sdc.v");
  auto r = with_lut(d, "pay", 0x0FFF);
  std::vector<std::string> ok = {"pay"}, bad = {"enc"};
  auto plan = make_plan(d, r, ok);
  ASSERT_EQ(plan.patches.size(), 1u);
  EXPECT_EQ(plan.patches[0].new_init, 0x5CCCu);
  EXPECT_THROW(make_plan(d, r, bad), Error);
}

TEST(Plan, ApplyAndStale) {
  auto d = load_design("sdc.v");
  PatchPlan plan;
  plan.patches.push_back({"pay", 4, 0xACCC, 0x0FFF, 0x5CCC});
  auto patched = apply_plan(d.netlist(), plan);
  EXPECT_EQ(patched.top_module().find_cell("pay")->init, 0x5CCCu);
  EXPECT_EQ(d.netlist().top_module().find_cell("pay")->init, 0xACCCu);
  EXPECT_THROW(apply_plan(patched, plan), StalePlanError);
  PatchPlan missing;
  missing.patches.push_back({"nope", 2, 0, 0, 0xF});
  EXPECT_THROW(apply_plan(d.netlist(), missing), StalePlanError);
  PatchPlan not_lut;
  not_lut.patches.push_back({"r1", 2, 0, 0, 0xF});
  EXPECT_THROW(apply_plan(d.netlist(), not_lut), StalePlanError);
}

TEST(Plan, HierarchicalNetlistIsFlattened) {
  auto d = load_design("hier.v");
  PatchPlan plan;
  const auto& cell = d.luts()[*d.find_lut("fa0.cor")];
  plan.patches.push_back({"fa0.cor", cell.k, cell.init, 0x7, reconfigure_init(cell.init, 0x7, cell.k)});
  auto text = lutscope::testing::read_fixture("hier.v");
  auto patched = apply_plan(parse_netlist(text), plan);
  EXPECT_TRUE(patched.is_flat());
  EXPECT_EQ(patched.top_module().find_cell("fa0.cor")->init, plan.patches[0].new_init);
}

TEST(Equivalence, IdenticalDesigns) {
  auto d = load_design("sdc.v");
  auto r = equivalence_check(d, d);
  EXPECT_EQ(r.status, EquivStatus::Equivalent);
  EXPECT_EQ(r.mode, "full");
}

TEST(Equivalence, PayloadPatchFullAndCareSet) {
  auto d = load_design("sdc.v");
  PatchPlan plan;
  plan.patches.push_back({"pay", 4, 0xACCC, 0x0FFF, 0x5CCC});
  auto p = rebuild(apply_plan(d.netlist(), plan));
  for (std::size_t words : {std::size_t{0}, std::size_t{16}}) {
    auto full = equivalence_check(d, p, {.screen_words = words});
    ASSERT_EQ(full.status, EquivStatus::Inequivalent);
    EXPECT_TRUE(full.confirmed);
    EXPECT_EQ(full.differing, (std::vector<std::string>{"out"}));
    EXPECT_EQ(full.vector.initial_state.at("dc1"), LogicValue::One);
    EXPECT_EQ(full.vector.initial_state.at("dc2"), LogicValue::One);
  }
  auto care = equivalence_check(d, p, {.care = {{"pay", 0x0FFF}}});
  EXPECT_EQ(care.status, EquivStatus::Equivalent);
  EXPECT_EQ(care.mode, "care-set");
}

// Patch a random LUT with a random coverage: care-set equivalence always
// holds; full equivalence matches exhaustive enumeration of the leaves and
// every distinguishing vector is confirmed by simulation.
TEST(Equivalence, RandomPatchesAgainstEnumeration) {
  std::mt19937_64 rng(52);
  int inequivalent = 0, equivalent = 0;
  for (std::uint64_t seed = 300; seed < 360; ++seed) {
    auto d = Design::build(parse_netlist(random_netlist_text(seed, 12)));
    const auto li = rng() % d.luts().size();
    const auto& lut = d.luts()[li];
    const std::uint64_t cover = rng() & width_mask(init_width(lut.k));
    PatchPlan plan;
    plan.patches.push_back({lut.name, lut.k, lut.init, cover, reconfigure_init(lut.init, cover, lut.k)});
    auto p = rebuild(apply_plan(d.netlist(), plan));

    auto care = equivalence_check(d, p, {.care = {{lut.name, cover}}});
    ASSERT_EQ(care.status, EquivStatus::Equivalent) << "seed " << seed;

    std::vector<NetId> leaves = d.stimulus_inputs();
    for (const auto& r : d.dffs()) leaves.push_back(r.q);
    if (leaves.size() > 12) continue;
    BitSim a(d, 64), b(p, 64);
    for (unsigned i = 0; i < leaves.size(); ++i) {
      fill_enumeration(a.net(leaves[i]), i);
      fill_enumeration(b.net(*p.find_net(d.net(leaves[i]).name)), i);
    }
    a.evaluate();
    b.evaluate();
    std::vector<std::pair<NetId, NetId>> pts;
    for (NetId o : d.output_bits()) pts.emplace_back(o, *p.find_net(d.net(o).name));
    for (std::size_t i = 0; i < d.dffs().size(); ++i) pts.emplace_back(d.dffs()[i].d, p.dffs()[i].d);
    bool differs = false;
    const std::uint64_t total = std::uint64_t{1} << leaves.size();
    for (auto [x, y] : pts)
      for (std::uint64_t pat = 0; pat < total; ++pat)
        if (((a.net(x)[pat / 64] ^ b.net(y)[pat / 64]) >> (pat % 64)) & 1u) differs = true;

    auto full = equivalence_check(d, p, {.screen_words = 0});
    ASSERT_EQ(full.status, differs ? EquivStatus::Inequivalent : EquivStatus::Equivalent) << "seed " << seed;
    if (differs) {
      EXPECT_TRUE(full.confirmed);
      ++inequivalent;
    } else {
      ++equivalent;
    }
  }
  EXPECT_GT(inequivalent, 10);
  EXPECT_GT(equivalent, 0);
}

TEST(Equivalence, MismatchedInterfacesRejected) {
  auto a = load_design("sdc.v");
  auto b = load_design("lock2.v");
  EXPECT_THROW(equivalence_check(a, b), Error);
}

TEST(Mitigation, PatchingTheComparatorSilencesTheTrigger) {
  auto d = load_design("lock2.v");
  auto proof = backtrace_chain(d, extract_constant("Tj_Trig", LogicValue::Zero));
  ASSERT_TRUE(proof.confirmed);
  std::vector<ProofResult> proofs = {proof};
  // Every address but the trigger pattern 1010 was observed.
  auto r = with_lut(d, "cmp", 0xFBFF);
  r.low_coverage.push_back(with_lut(d, "pay", 0x3).low_coverage[0]);
  auto cells = confirmed_trigger_luts(d, r, proofs);
  ASSERT_EQ(cells, (std::vector<std::string>{"cmp"}));
  auto plan = make_plan(d, r, cells);
  EXPECT_EQ(plan.patches[0].new_init, 0u);
  auto p = rebuild(apply_plan(d.netlist(), plan));
  auto rep = verify_mitigation(d, p, *proof.trigger, "Tj_Trig");
  EXPECT_TRUE(rep.original_fires);
  EXPECT_TRUE(rep.patched_silent);
  EXPECT_TRUE(rep.outputs_match) << rep.mismatch;
  EXPECT_EQ(rep.vectors_compared, 1000u);
  EXPECT_TRUE(rep.passed());
}

TEST(Mitigation, UnpatchedDesignFails) {
  auto d = load_design("lock2.v");
  auto proof = backtrace_chain(d, extract_constant("Tj_Trig", LogicValue::Zero));
  auto rep = verify_mitigation(d, d, *proof.trigger, "Tj_Trig");
  EXPECT_TRUE(rep.original_fires);
  EXPECT_FALSE(rep.patched_silent);
  EXPECT_FALSE(rep.passed());
}

// Patching the payload instead changes outputs on the trigger path, which
// random vectors that avoid the trigger never see.
TEST(Mitigation, PayloadPatchKeepsTriggerAlive) {
  auto d = load_design("lock2.v");
  auto proof = backtrace_chain(d, extract_constant("Tj_Trig", LogicValue::Zero));
  auto r = with_lut(d, "pay", 0x3);
  std::vector<std::string> cells = {"pay"};
  auto p = rebuild(apply_plan(d.netlist(), make_plan(d, r, cells)));
  auto rep = verify_mitigation(d, p, *proof.trigger, "Tj_Trig");
  EXPECT_FALSE(rep.patched_silent);
  EXPECT_TRUE(rep.outputs_match) << rep.mismatch;
}
