#include <gtest/gtest.h>

#include <random>

#include "lutscope/sim.hpp"
#include "support.hpp"

using namespace lutscope;
using namespace lutscope::testing;

namespace {

constexpr LogicValue k0 = LogicValue::Zero;
constexpr LogicValue k1 = LogicValue::One;
constexpr LogicValue kX = LogicValue::X;
constexpr LogicValue kZ = LogicValue::Z;

LogicValue eval(std::uint64_t init, std::vector<LogicValue> addr) { return lut_eval(init, addr); }

Stimulus rows(const Design& d, const std::vector<std::string>& values) {
  Stimulus s;
  for (NetId n : d.stimulus_inputs()) s.inputs.push_back(d.net(n).name);
  for (const auto& r : values) {
    std::vector<LogicValue> row;
    for (char c : r) row.push_back(logic_from_char(c));
    s.steps.push_back(row);
  }
  return s;
}

} // namespace

TEST(LutEval, Basics) {
  EXPECT_EQ(eval(0x8, {k1, k1}), k1);
  EXPECT_EQ(eval(0x8, {k0, kX}), k0);
  EXPECT_EQ(eval(0x6, {k1, kX}), kX);
  EXPECT_EQ(eval(0x8, {kZ, k0}), k0);
  EXPECT_EQ(eval(0xF, {kX, kZ}), k1);
}

TEST(LutEval, MatchesEnumerationOracle) {
  std::mt19937_64 rng(3);
  const LogicValue vals[] = {k0, k1, kX, kZ};
  for (int i = 0; i < 20000; ++i) {
    unsigned k = 1 + rng() % 6;
    std::uint64_t init = rng() & width_mask(1u << k);
    std::vector<LogicValue> addr(k);
    for (auto& a : addr) a = vals[rng() % 4];
    ASSERT_EQ(lut_eval(init, addr), oracle_lut(init, addr));
  }
}

// Refining an X line to 0/1 never contradicts the coarser answer.
TEST(LutEval, XMonotone) {
  std::mt19937_64 rng(4);
  const LogicValue vals[] = {k0, k1, kX};
  for (int i = 0; i < 20000; ++i) {
    unsigned k = 1 + rng() % 6;
    std::uint64_t init = rng() & width_mask(1u << k);
    std::vector<LogicValue> addr(k);
    for (auto& a : addr) a = vals[rng() % 3];
    auto refined = addr;
    for (auto& a : refined)
      if (a == kX && rng() % 2) a = from_bool(rng() % 2);
    LogicValue coarse = lut_eval(init, addr);
    LogicValue fine = lut_eval(init, refined);
    ASSERT_TRUE(coarse == kX || coarse == fine);
  }
}

TEST(LutEval, TooManyLines) { EXPECT_THROW(eval(0, std::vector<LogicValue>(7, k0)), Error); }

TEST(Simulate, ConstantNetSingleEvent) {
  auto d = Design::build(parse_netlist("module c(output y);\n  CONST0 g (.O(y));\nendmodule\n"));
  Stimulus s = rows(d, {"", "", "", ""});
  auto t = simulate(d, s, 4);
  ASSERT_EQ(t.events.size(), 1u);
  EXPECT_EQ(t.events[0], (Event{0, *t.find_signal("y"), k0}));
}

TEST(Simulate, AndTruthTable) {
  auto d = load_design("and2.v");
  // Inputs ordered a, b; the first step leaves b unknown.
  auto t = simulate(d, rows(d, {"0x", "00", "10", "01", "11"}), 5);
  auto y = *t.find_signal("y");
  EXPECT_EQ(t.value_at(y, 0), k0);
  EXPECT_EQ(t.value_at(y, 3), k0);
  EXPECT_EQ(t.value_at(y, 4), k1);
  auto t2 = simulate(d, rows(d, {"1x", "11"}), 2);
  EXPECT_EQ(t2.value_at(y, 0), kX);
  EXPECT_EQ(t2.value_at(y, 1), k1);
}

TEST(Simulate, CounterMatchesOracle) {
  auto d = load_design("counter3.v");
  auto s = random_stimulus(d, 1, 20);
  auto t = simulate(d, s, 20);
  auto flat = flatten(parse_netlist(read_fixture("counter3.v")));
  EXPECT_EQ(trace_matrix(t), oracle_matrix(flat, s, 20, t.signals));
  // Reset in step 0, then counting from 0.
  auto q = [&](std::uint64_t step) {
    unsigned v = 0;
    for (int b = 0; b < 3; ++b)
      if (t.value_at(*t.find_signal("q[" + std::to_string(b) + "]"), step) == k1) v |= 1u << b;
    return v;
  };
  EXPECT_EQ(t.value_at(*t.find_signal("q[0]"), 0), kX);
  for (std::uint64_t step = 1; step < 20; ++step) EXPECT_EQ(q(step), (step - 1) % 8) << step;
}

TEST(Simulate, FixturesMatchOracle) {
  for (const char* f : {"and2.v", "counter3.v", "hier.v", "mixed.v"}) {
    auto n = parse_netlist(read_fixture(f));
    auto d = Design::build(n);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      auto s = random_stimulus(d, seed, 60);
      auto t = simulate(d, s, 60);
      EXPECT_EQ(trace_matrix(t), oracle_matrix(flatten(n), s, 60, t.signals)) << f << " seed " << seed;
    }
  }
}

TEST(Simulate, UndrivenIsZAndReadAsX) {
  auto d = load_design("mixed.v");
  auto t = simulate(d, random_stimulus(d, 9, 5), 5);
  EXPECT_EQ(t.value_at(*t.find_signal("floating"), 0), kZ);
  EXPECT_EQ(t.value_at(*t.find_signal("z_out"), 4), kX);
}

TEST(Simulate, EventListIsMinimalAndSorted) {
  auto d = load_design("hier.v");
  auto t = simulate(d, random_stimulus(d, 8, 200), 200);
  std::vector<LogicValue> last(t.signals.size(), kX);
  std::uint64_t prev = 0;
  for (const auto& e : t.events) {
    ASSERT_GE(e.time, prev);
    prev = e.time;
    ASSERT_NE(last[e.signal], e.value);
    last[e.signal] = e.value;
  }
}

TEST(Simulate, Deterministic) {
  auto d = load_design("hier.v");
  auto s = random_stimulus(d, 77, 150);
  EXPECT_EQ(simulate(d, s, 150), simulate(d, s, 150));
}

TEST(Simulate, OscillationReported) {
  auto n = parse_netlist("module o(input a, output y);\n  LUT2 #(.INIT(4'h7)) ring (.I0(a), .I1(y), .O(y));\nendmodule\n",
                         {.strict = false});
  auto d = Design::build_unchecked(n);
  Stimulus s = rows(d, {"0", "1"});
  try {
    simulate(d, s, 2);
    FAIL();
  } catch (const OscillationError& e) {
    ASSERT_EQ(e.nets().size(), 1u);
    EXPECT_EQ(e.nets()[0], "y");
  }
}

TEST(Stimulus, Determinism) {
  auto d = load_design("hier.v");
  EXPECT_EQ(random_stimulus(d, 5, 100).steps, random_stimulus(d, 5, 100).steps);
  EXPECT_NE(random_stimulus(d, 5, 100).steps, random_stimulus(d, 6, 100).steps);
  EXPECT_TRUE(random_stimulus(d, 5, 0).steps.empty());
}

TEST(Stimulus, PrefixProperty) {
  auto d = load_design("hier.v");
  auto s1 = random_stimulus(d, 12, 37);
  auto s2 = random_stimulus(d, 12, 500);
  for (std::size_t t = 0; t < s1.steps.size(); ++t) ASSERT_EQ(s1.steps[t], s2.steps[t]);
}

TEST(Stimulus, ResetHeldForConfiguredCycles) {
  PortRoles roles;
  roles.reset_cycles = 3;
  auto d = load_design("counter3.v", roles);
  auto s = random_stimulus(d, 1, 6);
  for (std::size_t t = 0; t < 6; ++t) EXPECT_EQ(s.steps[t][0], from_bool(t < 3));
}

TEST(Stimulus, JsonRoundTrip) {
  auto d = load_design("mixed.v");
  auto s = random_stimulus(d, 3, 10);
  auto back = Stimulus::from_json_text(s.to_json_text());
  EXPECT_EQ(back.inputs, s.inputs);
  EXPECT_EQ(back.steps, s.steps);
  EXPECT_EQ(back.seed, 3u);
}

TEST(Vcd, RoundTrip) {
  auto d = load_design("counter3.v");
  auto t = simulate(d, random_stimulus(d, 1, 40), 40);
  auto back = import_vcd(export_vcd(t), &d);
  EXPECT_EQ(back, t);
  EXPECT_EQ(import_vcd(export_vcd(t)), t);
}

TEST(Vcd, RoundTripTrailingQuietSteps) {
  auto d = load_design("and2.v");
  auto t = simulate(d, rows(d, {"11", "11", "11", "11"}), 4);
  EXPECT_EQ(import_vcd(export_vcd(t)), t);
}

TEST(Vcd, MinimalHandWritten) {
  const char* text = "$timescale 1ns $end\n$scope module top $end\n$var wire 1 ! s $end\n$upscope $end\n"
                     "$enddefinitions $end\n#0\n$dumpvars\n0!\n$end\n#5\n1!\n";
  auto t = import_vcd(text);
  ASSERT_EQ(t.events.size(), 2u);
  EXPECT_EQ(t.events[1], (Event{5, 0, k1}));
  EXPECT_EQ(t.length, 6u);
}

TEST(Vcd, VectorValues) {
  const char* text = "$scope module top $end\n$var wire 4 # d [3:0] $end\n$upscope $end\n$enddefinitions $end\n"
                     "#0\nb101 #\n#1\nbx #\n";
  auto t = import_vcd(text);
  EXPECT_EQ(t.value_at(*t.find_signal("d[0]"), 0), k1);
  EXPECT_EQ(t.value_at(*t.find_signal("d[1]"), 0), k0);
  EXPECT_EQ(t.value_at(*t.find_signal("d[3]"), 0), k0);
  EXPECT_EQ(t.value_at(*t.find_signal("d[2]"), 1), kX);
}

TEST(Vcd, UndeclaredIdentifier) {
  const char* text = "$scope module top $end\n$var wire 1 ! s $end\n$upscope $end\n$enddefinitions $end\n#0\n1?\n";
  try {
    import_vcd(text);
    FAIL();
  } catch (const VcdError& e) {
    EXPECT_NE(std::string(e.what()).find("'?'"), std::string::npos);
  }
}

TEST(Vcd, MalformedTimestamp) {
  EXPECT_THROW(import_vcd("$enddefinitions $end\n#abc\n"), VcdError);
}

TEST(Vcd, UnknownSignalWithDesign) {
  auto d = load_design("and2.v");
  EXPECT_THROW(import_vcd("$scope module top $end\n$var wire 1 ! nope $end\n$upscope $end\n$enddefinitions $end\n", &d),
               VcdError);
}

TEST(Replay, InitialStateAndInputs) {
  auto d = load_design("counter3.v");
  Trigger trig;
  trig.initial_state = {{"q[0]", k1}, {"q[1]", k1}, {"q[2]", k0}};
  trig.steps.resize(2);
  trig.steps[0]["rst"] = k0;
  trig.expect = {{"q[2]", k1, 1}};
  auto t = replay(d, trig);
  EXPECT_TRUE(trigger_fires(d, trig, t));
  auto back = Trigger::from_json_text(trig.to_json_text());
  EXPECT_EQ(back, trig);
}

TEST(Replay, UnknownNamesRejected) {
  auto d = load_design("counter3.v");
  Trigger bad_input;
  bad_input.steps.push_back({{"nope", k1}});
  EXPECT_THROW(replay(d, bad_input), Error);
  Trigger bad_state;
  bad_state.initial_state["wrap"] = k1;
  EXPECT_THROW(replay(d, bad_state), Error);
}
