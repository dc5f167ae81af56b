#include <gtest/gtest.h>

#include <random>

#include "lutscope/benchgen.hpp"
#include "lutscope/bitsim.hpp"
#include "lutscope/prove.hpp"
#include "support.hpp"

using namespace lutscope;

namespace {

LogicValue at(const EventTrace& t, const std::string& sig, std::uint64_t step) {
  return t.value_at(*t.find_signal(sig), step);
}

} // namespace

TEST(Benchgen, ArchetypeNames) {
  for (auto a : {Archetype::PatternLock, Archetype::CounterLock, Archetype::SdcPair})
    EXPECT_EQ(archetype_from_string(to_string(a)), a);
  EXPECT_THROW(archetype_from_string("ring-osc"), Error);
}

TEST(Benchgen, OutputIsValidAndDeterministic) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (const auto& spec : {BenchSpec{Archetype::PatternLock, 16, 0xBEEF & (seed * 977), 1 + unsigned(seed % 2), 8, 0, seed},
                             BenchSpec{Archetype::CounterLock, 8, 0, 1, 6, seed * 3, seed},
                             BenchSpec{Archetype::SdcPair, 8, 0, 1, 8, 0, seed}}) {
      auto a = generate(spec), b = generate(spec);
      EXPECT_EQ(a.text, b.text);
      EXPECT_EQ(a.truth.to_json_text(), b.truth.to_json_text());
      EXPECT_TRUE(validate(a.netlist).empty()) << a.text;
      // Re-parses the emitted text to the same netlist.
      EXPECT_EQ(emit_netlist(parse_netlist(a.text)), emit_netlist(a.netlist));
    }
  }
  EXPECT_NE(gen_pattern_lock(16, 0xA5, 1).text, gen_pattern_lock(16, 0xA5, 2).text);
}

TEST(Benchgen, RejectsBadParameters) {
  EXPECT_THROW(gen_pattern_lock(0, 0, 1), Error);
  EXPECT_THROW(gen_pattern_lock(33, 0, 1), Error);
  EXPECT_THROW(gen_pattern_lock(8, 0x1A5, 1), Error);
  EXPECT_THROW(gen_pattern_lock(8, 0xA5, 1, 3), Error);
  EXPECT_THROW(gen_counter_lock(3, 8, 1), Error);
  EXPECT_THROW(gen_counter_lock(0, 0, 1), Error);
  EXPECT_THROW(gen_counter_lock(13, 0, 1), Error);
  EXPECT_THROW(gen_sdc_pair(1, 3), Error);
}

TEST(Benchgen, GroundTruthJsonRoundTrip) {
  for (const auto& b : {gen_pattern_lock(12, 0x5A5, 3, 2), gen_counter_lock(5, 17, 4), gen_sdc_pair(5)}) {
    auto t = GroundTruth::from_json_text(b.truth.to_json_text());
    EXPECT_EQ(t.to_json_text(), b.truth.to_json_text());
    EXPECT_EQ(t.trigger, b.truth.trigger);
    EXPECT_EQ(t.spec.seed, b.truth.spec.seed);
  }
  EXPECT_THROW(GroundTruth::from_json_text("{\"archetype\": \"pattern-lock\"}"), Error);
}

TEST(PatternLock, FiresTheCycleAfterThePattern) {
  auto b = gen_pattern_lock(8, 0xA5, 1);
  auto d = Design::build(b.netlist);
  Trigger t;
  t.steps.resize(3);
  t.set_port(0, *d.find_port("data"), 0xA5);
  t.set_port(1, *d.find_port("data"), 0x00);
  t.initial_state["Tj_Trig"] = LogicValue::Zero;
  auto tr = replay(d, t);
  EXPECT_EQ(at(tr, "Tj_Trig", 0), LogicValue::Zero);
  EXPECT_EQ(at(tr, "Tj_Trig", 1), LogicValue::One);
  EXPECT_EQ(at(tr, "Tj_Trig", 2), LogicValue::Zero);
  EXPECT_TRUE(trigger_fires(d, b.truth.trigger, replay(d, b.truth.trigger)));
}

TEST(PatternLock, TwoStagesFireTwoCyclesLater) {
  auto b = gen_pattern_lock(16, 0xC0DE, 9, 2);
  auto d = Design::build(b.netlist);
  auto tr = replay(d, b.truth.trigger);
  EXPECT_EQ(at(tr, "Tj_Trig", 1), LogicValue::Zero);
  EXPECT_EQ(at(tr, "Tj_Trig", 2), LogicValue::One);
  EXPECT_TRUE(trigger_fires(d, b.truth.trigger, tr));
}

// Any input other than the pattern leaves the trigger low.
TEST(PatternLock, RandomNonPatternInputsNeverFire) {
  auto b = gen_pattern_lock(8, 0xA5, 1);
  auto d = Design::build(b.netlist);
  std::mt19937_64 rng(61);
  Trigger t;
  t.initial_state["Tj_Trig"] = LogicValue::Zero;
  t.steps.resize(1000);
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    std::uint64_t v;
    do v = rng() & 0xFF;
    while (v == 0xA5);
    t.set_port(i, *d.find_port("data"), v);
  }
  auto tr = replay(d, t);
  for (std::uint64_t s = 0; s < tr.length; ++s) ASSERT_EQ(at(tr, "Tj_Trig", s), LogicValue::Zero) << s;
}

// Enumerate every input word: exactly the pattern drives trig_d high.
TEST(PatternLock, ComparatorMatchesOnlyThePattern) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const std::uint64_t pattern = (seed * 0x9E37) & 0xFFF;
    auto b = gen_pattern_lock(12, pattern, seed);
    auto d = Design::build(b.netlist);
    BitSim sim(d, 64);
    const auto& port = *d.find_port("data");
    for (unsigned i = 0; i < 12; ++i) fill_enumeration(sim.net(port.bits[i]), i);
    sim.evaluate();
    auto w = sim.net(*d.find_net("trig_d"));
    for (std::uint64_t v = 0; v < 4096; ++v) ASSERT_EQ(((w[v / 64] >> (v % 64)) & 1u) != 0, v == pattern) << v;
  }
}

// The payload changes at least one output when the trigger is high.
TEST(PatternLock, PayloadFlipsOutputs) {
  auto b = gen_pattern_lock(8, 0x3C, 7);
  auto d = Design::build(b.netlist);
  ASSERT_FALSE(b.truth.payload_cells.empty());
  auto tr = replay(d, b.truth.trigger);
  Trigger quiet = b.truth.trigger;
  quiet.steps[0].clear();
  auto tq = replay(d, quiet);
  bool differs = false;
  for (const auto& bit : d.find_port("out")->bit_names) differs |= at(tr, bit, 1) != at(tq, bit, 1);
  EXPECT_TRUE(differs);
}

TEST(CounterLock, BmcFindsTheThresholdCycle) {
  auto b = gen_counter_lock(3, 7, 1);
  auto d = Design::build(b.netlist);
  EXPECT_TRUE(trigger_fires(d, b.truth.trigger, replay(d, b.truth.trigger)));
  auto p = extract_constant("Tj_Trig", LogicValue::Zero);
  auto r = prove_bmc(d, p, 8);
  ASSERT_EQ(r.status, ProofStatus::Fail);
  EXPECT_TRUE(r.confirmed);
  ASSERT_TRUE(r.trigger);
  EXPECT_EQ(r.trigger->expect[0].step, 7u);
  EXPECT_EQ(prove_bmc(d, p, 7).status, ProofStatus::Holds);
}

TEST(CounterLock, ThresholdZeroFiresRightAfterReset) {
  auto b = gen_counter_lock(4, 0, 2);
  auto d = Design::build(b.netlist);
  auto tr = replay(d, b.truth.trigger, {.extra_steps = 3});
  EXPECT_EQ(at(tr, "Tj_Trig", 0), LogicValue::One);
  EXPECT_EQ(at(tr, "Tj_Trig", 1), LogicValue::Zero);
  EXPECT_TRUE(trigger_fires(d, b.truth.trigger, tr));
}

// The counter repeats with period 2^bits, so the trigger is high on exactly
// one cycle in each period.
TEST(CounterLock, PeriodicUnderFreeRun) {
  auto b = gen_counter_lock(5, 19, 3);
  auto d = Design::build(b.netlist);
  Trigger t = b.truth.trigger;
  t.steps.assign(200, {{"rst", LogicValue::Zero}});
  auto tr = replay(d, t);
  for (std::uint64_t s = 0; s < 200; ++s) ASSERT_EQ(at(tr, "Tj_Trig", s), from_bool(s % 32 == 19)) << s;
}

TEST(SdcPair, BothRegistersToggleButNeverTogether) {
  auto b = gen_sdc_pair(4);
  auto d = Design::build(b.netlist);
  auto tr = simulate(d, random_stimulus(d, 9, 5000), 5000);
  int t1 = 0, t2 = 0;
  for (std::uint64_t s = 1; s < tr.length; ++s) {
    t1 += at(tr, "dc1", s) != at(tr, "dc1", s - 1);
    t2 += at(tr, "dc2", s) != at(tr, "dc2", s - 1);
    ASSERT_FALSE(at(tr, "dc1", s) == LogicValue::One && at(tr, "dc2", s) == LogicValue::One);
  }
  EXPECT_GE(t1, 100);
  EXPECT_GE(t2, 100);
}

// Exhaustive enumeration of the register outputs feeding the pair.
TEST(SdcPair, NextStatesAreMutuallyExclusive) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto b = gen_sdc_pair(seed);
    auto d = Design::build(b.netlist);
    BitSim sim(d, 4);
    std::vector<NetId> qs;
    for (const auto& r : d.dffs())
      if (d.net(r.q).name.starts_with("x[")) qs.push_back(r.q);
    ASSERT_EQ(qs.size(), 8u);
    for (unsigned i = 0; i < qs.size(); ++i) fill_enumeration(sim.net(qs[i]), i);
    sim.evaluate();
    auto a = sim.net(*d.find_net("dc1_d")), c = sim.net(*d.find_net("dc2_d"));
    std::uint64_t any1 = 0, any2 = 0;
    for (std::size_t w = 0; w < 4; ++w) {
      EXPECT_EQ(a[w] & c[w], 0u);
      any1 |= a[w];
      any2 |= c[w];
    }
    EXPECT_NE(any1, 0u);
    EXPECT_NE(any2, 0u);
  }
}

// From the unreachable state the key leaks to the output.
TEST(SdcPair, GroundTruthTriggerShowsPayloadDivergence) {
  auto b = gen_sdc_pair(6);
  auto d = Design::build(b.netlist);
  EXPECT_FALSE(b.truth.trigger_reachable);
  auto tr = replay(d, b.truth.trigger);
  EXPECT_TRUE(trigger_fires(d, b.truth.trigger, tr));
  Trigger normal = b.truth.trigger;
  normal.initial_state["dc1"] = LogicValue::Zero;
  normal.initial_state["dc2"] = LogicValue::Zero;
  EXPECT_EQ(at(replay(d, normal), "out[0]", 0), LogicValue::Zero);
  EXPECT_EQ(b.truth.payload_cells.size(), 8u);
}
