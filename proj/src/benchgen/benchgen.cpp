#include <algorithm>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lutscope/benchgen.hpp"

namespace lutscope {

std::string_view to_string(Archetype a) {
  switch (a) {
    case Archetype::PatternLock: return "pattern-lock";
    case Archetype::CounterLock: return "counter-lock";
    case Archetype::SdcPair: return "sdc-pair";
  }
  return "?";
}

Archetype archetype_from_string(std::string_view s) {
  if (s == "pattern-lock") return Archetype::PatternLock;
  if (s == "counter-lock") return Archetype::CounterLock;
  if (s == "sdc-pair") return Archetype::SdcPair;
  throw Error(fmt::format("unknown archetype '{}' (pattern-lock, counter-lock, sdc-pair)", s));
}

namespace {

// Only raw engine output is used so that the same seed produces the same
// netlist with any standard library.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : e_(seed) {}
  std::uint64_t bits() { return e_(); }
  std::uint64_t below(std::uint64_t n) { return e_() % n; }
  /// `count` distinct values from [0, n).
  std::vector<unsigned> distinct(unsigned n, unsigned count) {
    std::vector<unsigned> v(n);
    std::iota(v.begin(), v.end(), 0u);
    for (unsigned i = 0; i < count; ++i) std::swap(v[i], v[i + below(n - i)]);
    v.resize(count);
    return v;
  }

private:
  std::mt19937_64 e_;
};

class Writer {
public:
  void wire(const std::string& name) { wires_.push_back(name); }
  void lut(const std::string& cell, std::uint64_t init, const std::vector<std::string>& in, const std::string& out) {
    const unsigned k = static_cast<unsigned>(in.size());
    std::string pins;
    for (unsigned i = 0; i < k; ++i) pins += fmt::format(".I{}({}), ", i, in[i]);
    body_ += fmt::format("  LUT{} #(.INIT({})) {} ({}.O({}));\n", k, verilog_hex(init, init_width(k)), cell, pins, out);
  }
  void dff(const std::string& cell, const std::string& d, const std::string& q, const std::string& reset = {}) {
    if (reset.empty())
      body_ += fmt::format("  DFF {} (.C(clk), .D({}), .Q({}));\n", cell, d, q);
    else
      body_ += fmt::format("  DFF #(.RESET_VALUE(1'b0)) {} (.C(clk), .D({}), .R({}), .Q({}));\n", cell, d, reset, q);
  }
  void assign(const std::string& lhs, const std::string& rhs) { body_ += fmt::format("  assign {} = {};\n", lhs, rhs); }
  void comment(const std::string& text) { body_ += "\n  // " + text + "\n"; }

  std::string module(const std::string& header, const std::string& ports, const std::string& decls) const {
    std::string out = header + ports + decls;
    for (const auto& w : wires_) out += fmt::format("  wire {};\n", w);
    return out + body_ + "endmodule\n";
  }

private:
  std::vector<std::string> wires_;
  std::string body_;
};

std::uint64_t nonconstant_init(Rng& rng, unsigned k) {
  const std::uint64_t full = width_mask(init_width(k));
  for (;;) {
    const std::uint64_t v = rng.bits() & full;
    if (v != 0 && v != full) return v;
  }
}

// One-hot match LUTs over groups of up to four bits of `bits`, equal to the
// corresponding bits of `value`. Returns the match nets.
std::vector<std::string> slice_matches(Writer& w, const std::string& prefix, const std::vector<std::string>& bits,
                                       std::uint64_t value) {
  std::vector<std::string> out;
  for (std::size_t lo = 0, i = 0; lo < bits.size(); lo += 4, ++i) {
    const auto k = static_cast<unsigned>(std::min<std::size_t>(4, bits.size() - lo));
    const std::uint64_t want = (value >> lo) & width_mask(k);
    std::vector<std::string> in(bits.begin() + static_cast<long>(lo), bits.begin() + static_cast<long>(lo + k));
    const std::string net = fmt::format("{}_m{}", prefix, i);
    w.wire(net);
    w.lut(fmt::format("{}_s{}", prefix, i), std::uint64_t{1} << want, in, net);
    out.push_back(net);
  }
  return out;
}

// Balanced tree of 2-input ANDs ending in `root_net`. Pairing keeps every
// internal node's 01/10 addresses common; only the all-match address at the
// root is as rare as the full pattern. Returns the root cell name.
std::string and_tree(Writer& w, const std::string& prefix, std::vector<std::string> level, const std::string& root_net) {
  if (level.size() == 1) {
    const std::string cell = prefix + "_root";
    w.lut(cell, 0x2, {level[0]}, root_net);
    return cell;
  }
  unsigned node = 0;
  for (;;) {
    std::vector<std::string> next;
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
      const bool last = level.size() == 2;
      const std::string cell = last ? prefix + "_root" : fmt::format("{}_a{}", prefix, node);
      const std::string net = last ? root_net : fmt::format("{}_n{}", prefix, node);
      if (!last) w.wire(net);
      w.lut(cell, 0x8, {level[i], level[i + 1]}, net);
      next.push_back(net);
      ++node;
      if (last) return cell;
    }
    if (level.size() % 2) next.push_back(level.back());
    level = std::move(next);
  }
}

struct Datapath {
  std::vector<std::string> benign; // per output bit
  std::vector<std::string> payload_cells;
};

// Benign LUT per output over random input bits, then XOR of the trigger onto
// the outputs selected by a hidden nonzero constant.
Datapath benign_and_payload(Writer& w, Rng& rng, unsigned width, const std::string& in_port,
                            const std::string& trigger) {
  Datapath dp;
  const unsigned k = std::min(4u, width);
  w.comment("benign datapath");
  for (unsigned i = 0; i < width; ++i) {
    std::vector<std::string> in;
    for (unsigned b : rng.distinct(width, k)) in.push_back(fmt::format("{}[{}]", in_port, b));
    const std::string net = fmt::format("bn{}", i);
    w.wire(net);
    w.lut(fmt::format("ben{}", i), nonconstant_init(rng, k), in, net);
    dp.benign.push_back(net);
  }
  std::uint64_t secret = rng.bits() & width_mask(width);
  if (secret == 0) secret = 1;
  w.comment("payload: leak a constant while triggered");
  for (unsigned i = 0; i < width; ++i) {
    const std::string out = fmt::format("out[{}]", i);
    if ((secret >> i) & 1u) {
      const std::string cell = fmt::format("pay{}", i);
      w.lut(cell, 0x6, {dp.benign[i], trigger}, out);
      dp.payload_cells.push_back(cell);
    } else {
      w.assign(out, dp.benign[i]);
    }
  }
  return dp;
}

Bench finish(std::string text, GroundTruth truth) {
  Bench b;
  b.netlist = parse_netlist(text);
  b.text = std::move(text);
  b.truth = std::move(truth);
  return b;
}

} // namespace

Bench gen_pattern_lock(unsigned width, std::uint64_t pattern, std::uint64_t seed, unsigned stages) {
  if (width == 0 || width > 32) throw Error(fmt::format("pattern-lock width {} out of range 1..32", width));
  if (pattern & ~width_mask(width)) throw Error(fmt::format("pattern {:#x} is wider than {} bits", pattern, width));
  if (stages < 1 || stages > 2) throw Error(fmt::format("pattern-lock stages {} out of range 1..2", stages));
  Rng rng(seed);
  Writer w;
  std::vector<std::string> data;
  for (unsigned i = 0; i < width; ++i) data.push_back(fmt::format("data[{}]", i));

  w.comment("trigger: compare the input against the planted pattern");
  auto matches = slice_matches(w, "cmp", data, pattern);
  if (stages == 2) {
    for (std::size_t i = 0; i < matches.size(); ++i) {
      const std::string q = fmt::format("cmp_q{}", i);
      w.wire(q);
      w.dff(fmt::format("r_cmp{}", i), matches[i], q);
      matches[i] = q;
    }
  }
  w.wire("trig_d");
  w.wire("Tj_Trig");
  const std::string root = and_tree(w, "cmp", matches, "trig_d");
  w.dff("r_trig", "trig_d", "Tj_Trig");
  auto dp = benign_and_payload(w, rng, width, "data", "Tj_Trig");

  const std::string text = w.module(
      fmt::format("// pattern-lock: width {}, pattern {}, {} register stage(s), seed {}\n", width,
                  verilog_hex(pattern, width), stages, seed),
      fmt::format("module pattern_lock(clk, data, out);\n  input clk;\n  input [{}:0] data;\n  output [{}:0] out;\n",
                  width - 1, width - 1),
      "");

  GroundTruth t;
  t.archetype = Archetype::PatternLock;
  t.spec = {Archetype::PatternLock, width, pattern, stages, 0, 0, seed};
  t.trigger_signal = "Tj_Trig";
  t.trigger.steps.resize(stages + 1);
  for (unsigned i = 0; i < width; ++i) t.trigger.steps[0][data[i]] = from_bool((pattern >> i) & 1u);
  t.trigger.initial_state["Tj_Trig"] = LogicValue::Zero;
  if (stages == 2)
    for (std::size_t i = 0; i < matches.size(); ++i) t.trigger.initial_state[matches[i]] = LogicValue::Zero;
  t.trigger.expect = {{"Tj_Trig", LogicValue::One, stages}};
  t.payload_cells = dp.payload_cells;
  t.expected_low_coverage_cells = {root};
  t.expected_low_coverage_cells.insert(t.expected_low_coverage_cells.end(), dp.payload_cells.begin(),
                                       dp.payload_cells.end());
  t.expected_low_switch = {"trig_d", "Tj_Trig"};
  return finish(text, std::move(t));
}

Bench gen_counter_lock(unsigned counter_bits, std::uint64_t threshold, std::uint64_t seed, unsigned width) {
  if (counter_bits == 0 || counter_bits > 12)
    throw Error(fmt::format("counter-lock counter_bits {} out of range 1..12", counter_bits));
  if (threshold >> counter_bits)
    throw Error(fmt::format("threshold {} does not fit in {} counter bits", threshold, counter_bits));
  if (width == 0 || width > 32) throw Error(fmt::format("counter-lock width {} out of range 1..32", width));
  Rng rng(seed);
  Writer w;
  w.comment("free-running counter");
  std::vector<std::string> count;
  for (unsigned i = 0; i < counter_bits; ++i) count.push_back(fmt::format("cnt[{}]", i));
  std::string carry = count[0];
  w.lut("inc0", 0x1, {count[0]}, "nxt[0]");
  for (unsigned i = 1; i < counter_bits; ++i) {
    if (i > 1) {
      const std::string c = fmt::format("cy{}", i);
      w.wire(c);
      w.lut(fmt::format("carry{}", i), 0x8, {carry, count[i - 1]}, c);
      carry = c;
    }
    w.lut(fmt::format("inc{}", i), 0x6, {count[i], carry}, fmt::format("nxt[{}]", i));
  }
  for (unsigned i = 0; i < counter_bits; ++i) w.dff(fmt::format("r_cnt{}", i), fmt::format("nxt[{}]", i), count[i], "rst");

  w.comment("trigger: count reaches the threshold");
  auto matches = slice_matches(w, "cmp", count, threshold);
  w.wire("Tj_Trig");
  const std::string root = and_tree(w, "cmp", matches, "Tj_Trig");
  auto dp = benign_and_payload(w, rng, width, "data", "Tj_Trig");

  const std::string text = w.module(
      fmt::format("// counter-lock: {} counter bits, threshold {}, width {}, seed {}\n", counter_bits, threshold, width,
                  seed),
      fmt::format("module counter_lock(clk, rst, data, out);\n  input clk;\n  input rst;\n  input [{}:0] data;\n"
                  "  output [{}:0] out;\n",
                  width - 1, width - 1),
      fmt::format("  wire [{}:0] cnt;\n  wire [{}:0] nxt;\n", counter_bits - 1, counter_bits - 1));

  GroundTruth t;
  t.archetype = Archetype::CounterLock;
  t.spec = {Archetype::CounterLock, width, 0, 1, counter_bits, threshold, seed};
  t.trigger_signal = "Tj_Trig";
  for (const auto& c : count) t.trigger.initial_state[c] = LogicValue::Zero;
  t.trigger.steps.assign(threshold + 1, {{"rst", LogicValue::Zero}});
  t.trigger.expect = {{"Tj_Trig", LogicValue::One, threshold}};
  t.payload_cells = dp.payload_cells;
  // The counter wraps, so a long enough random run covers the comparator.
  (void)root;
  return finish(text, std::move(t));
}

Bench gen_sdc_pair(std::uint64_t seed, unsigned width) {
  if (width < 4 || width > 32) throw Error(fmt::format("sdc-pair width {} out of range 4..32", width));
  Rng rng(seed);
  Writer w;
  w.comment("input register");
  std::vector<std::string> x;
  for (unsigned i = 0; i < width; ++i) {
    x.push_back(fmt::format("x[{}]", i));
    w.dff(fmt::format("r_x{}", i), fmt::format("in[{}]", i), x.back());
  }
  const auto pick = rng.distinct(width, 4);
  const auto &a = x[pick[0]], &b = x[pick[1]], &c = x[pick[2]], &e = x[pick[3]];
  w.comment("dc1 needs a != b, dc2 needs a == b: never both high");
  w.wire("dc1_d");
  w.wire("dc2_d");
  w.wire("dc1");
  w.wire("dc2");
  w.lut("sdc1", 0x60, {a, b, c}, "dc1_d");
  w.lut("sdc2", 0x90, {a, b, e}, "dc2_d");
  w.dff("r_dc1", "dc1_d", "dc1");
  w.dff("r_dc2", "dc2_d", "dc2");

  w.comment("cipher stand-in and payload multiplexers");
  std::vector<std::string> payload;
  std::vector<std::uint64_t> g_of;
  for (unsigned i = 0; i < width; ++i) {
    const auto jm = rng.distinct(width, 2);
    const std::uint64_t g = rng.bits() & 0xF;
    std::uint64_t init = 0;
    for (unsigned addr = 0; addr < 8; ++addr)
      if (((addr & 1u) ^ ((g >> (addr >> 1)) & 1u)) != 0) init |= std::uint64_t{1} << addr;
    const std::string cipher = fmt::format("ct{}", i);
    w.wire(cipher);
    w.lut(fmt::format("enc{}", i), init, {fmt::format("in[{}]", i), x[jm[0]], x[jm[1]]}, cipher);
    const std::string cell = fmt::format("pay{}", i);
    w.lut(cell, 0xACCC, {fmt::format("key[{}]", i), cipher, "dc2", "dc1"}, fmt::format("out[{}]", i));
    payload.push_back(cell);
    g_of.push_back(g);
  }

  const std::string text = w.module(
      fmt::format("// sdc-pair: width {}, seed {}\n", width, seed),
      fmt::format("module sdc_pair(clk, in, key, out);\n  input clk;\n  input [{}:0] in;\n  input [{}:0] key;\n"
                  "  output [{}:0] out;\n  wire [{}:0] x;\n",
                  width - 1, width - 1, width - 1, width - 1),
      "");

  GroundTruth t;
  t.archetype = Archetype::SdcPair;
  t.spec = {Archetype::SdcPair, width, 0, 1, 0, 0, seed};
  // Witness from the unreachable state: with x = 0 the cipher bit is
  // in[0] ^ g(0,0); choosing in[0] = g(0,0) makes it 0 while key[0] = 1
  // shows up on out[0].
  for (const auto& q : x) t.trigger.initial_state[q] = LogicValue::Zero;
  t.trigger.initial_state["dc1"] = LogicValue::One;
  t.trigger.initial_state["dc2"] = LogicValue::One;
  t.trigger.steps.resize(1);
  t.trigger.steps[0]["in[0]"] = from_bool(g_of[0] & 1u);
  t.trigger.steps[0]["key[0]"] = LogicValue::One;
  t.trigger.expect = {{"out[0]", LogicValue::One, 0}};
  t.trigger_reachable = false;
  t.payload_cells = payload;
  t.expected_low_coverage_cells = payload;
  return finish(text, std::move(t));
}

Bench generate(const BenchSpec& s) {
  switch (s.archetype) {
    case Archetype::PatternLock: return gen_pattern_lock(s.width, s.pattern, s.seed, s.stages);
    case Archetype::CounterLock: return gen_counter_lock(s.counter_bits, s.threshold, s.seed, s.width);
    case Archetype::SdcPair: return gen_sdc_pair(s.seed, s.width);
  }
  throw Error("unknown archetype");
}

std::string GroundTruth::to_json_text() const {
  nlohmann::ordered_json j;
  j["archetype"] = to_string(archetype);
  nlohmann::ordered_json s;
  s["width"] = spec.width;
  s["seed"] = spec.seed;
  if (archetype == Archetype::PatternLock) {
    s["pattern_hex"] = to_hex(spec.pattern, spec.width);
    s["stages"] = spec.stages;
  }
  if (archetype == Archetype::CounterLock) {
    s["counter_bits"] = spec.counter_bits;
    s["threshold"] = spec.threshold;
  }
  j["spec"] = s;
  j["trigger_signal"] = trigger_signal;
  j["trigger"] = nlohmann::ordered_json::parse(trigger.to_json_text());
  j["trigger_reachable"] = trigger_reachable;
  j["payload_cells"] = payload_cells;
  j["expected_low_coverage_cells"] = expected_low_coverage_cells;
  j["expected_low_switch"] = expected_low_switch;
  return j.dump(2);
}

GroundTruth GroundTruth::from_json_text(std::string_view text) {
  GroundTruth t;
  try {
    auto j = nlohmann::json::parse(text);
    t.archetype = archetype_from_string(j.at("archetype").get<std::string>());
    const auto& s = j.at("spec");
    t.spec.archetype = t.archetype;
    t.spec.width = s.at("width").get<unsigned>();
    t.spec.seed = s.at("seed").get<std::uint64_t>();
    if (s.contains("pattern_hex")) t.spec.pattern = parse_hex(s.at("pattern_hex").get<std::string>(), t.spec.width);
    t.spec.stages = s.value("stages", 1u);
    t.spec.counter_bits = s.value("counter_bits", 8u);
    t.spec.threshold = s.value("threshold", std::uint64_t{0});
    t.trigger_signal = j.at("trigger_signal").get<std::string>();
    t.trigger = Trigger::from_json_text(j.at("trigger").dump());
    t.trigger_reachable = j.value("trigger_reachable", true);
    t.payload_cells = j.at("payload_cells").get<std::vector<std::string>>();
    t.expected_low_coverage_cells = j.at("expected_low_coverage_cells").get<std::vector<std::string>>();
    t.expected_low_switch = j.value("expected_low_switch", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("ground truth: {}", e.what()));
  }
  return t;
}

} // namespace lutscope
