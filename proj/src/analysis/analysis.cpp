#include <algorithm>
#include <array>
#include <bit>
#include <set>
#include <utility>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lutscope/analysis.hpp"

namespace lutscope {

std::string_view to_string(LowSwitchReason r) {
  switch (r) {
  case LowSwitchReason::Constant: return "constant";
  case LowSwitchReason::HighZ: return "high_z";
  case LowSwitchReason::Unknown: return "unknown";
  case LowSwitchReason::CandidateTrigger: return "candidate_trigger";
  }
  return "unknown";
}

LowSwitchReason low_switch_reason_from_string(std::string_view s) {
  for (auto r : {LowSwitchReason::Constant, LowSwitchReason::HighZ, LowSwitchReason::Unknown,
                 LowSwitchReason::CandidateTrigger})
    if (to_string(r) == s) return r;
  throw Error(fmt::format("unknown low-switch reason '{}'", s));
}

unsigned LowCoverageLut::uncovered_count() const {
  return init_width(k) - static_cast<unsigned>(std::popcount(cover & width_mask(init_width(k))));
}

const LowSwitchSignal* AnalysisResult::find_signal(std::string_view name) const {
  for (const auto& s : low_switch)
    if (s.signal == name) return &s;
  return nullptr;
}

const LowCoverageLut* AnalysisResult::find_lut(std::string_view cell) const {
  for (const auto& l : low_coverage)
    if (l.cell == cell) return &l;
  return nullptr;
}

std::vector<char> structural_constants(const Design& d) {
  std::vector<LogicValue> v(d.nets().size(), LogicValue::X);
  std::vector<char> is_const(d.nets().size(), 0);
  v[Design::kConst0] = LogicValue::Zero;
  v[Design::kConst1] = LogicValue::One;
  is_const[Design::kConst0] = is_const[Design::kConst1] = 1;
  for (const auto& c : d.consts()) {
    v[c.out] = from_bool(c.value);
    is_const[c.out] = 1;
  }
  std::array<LogicValue, 6> addr{};
  for (auto li : d.lut_order()) {
    const auto& l = d.luts()[li];
    for (unsigned i = 0; i < l.k; ++i) addr[i] = v[l.in[i]];
    LogicValue out = lut_eval(l.init, std::span(addr.data(), l.k));
    if (is_known(out)) {
      v[l.out] = out;
      is_const[l.out] = 1;
    }
  }
  return is_const;
}

Analyzer::Analyzer(const Design& d, std::span<const std::string> trace_signals)
    : d_(d),
      value_(d.nets().size(), LogicValue::X),
      seen_(d.nets().size(), 0),
      cover_(d.luts().size(), 0),
      structural_const_(structural_constants(d)),
      pending_flag_(d.luts().size(), 0) {
  value_[Design::kConst0] = LogicValue::Zero;
  value_[Design::kConst1] = LogicValue::One;
  for (const auto& s : trace_signals) {
    auto n = d.find_net(s);
    if (!n) throw Error(fmt::format("trace signal '{}' is not a net of the design", s));
    signal_net_.push_back(*n);
  }
}

void Analyzer::sample(std::uint32_t lut) {
  const auto& l = d_.luts()[lut];
  std::uint64_t addr = 0;
  for (unsigned i = 0; i < l.k; ++i) {
    LogicValue v = value_[l.in[i]];
    if (!is_known(v)) return;
    if (v == LogicValue::One) addr |= std::uint64_t{1} << i;
  }
  cover_[lut] |= std::uint64_t{1} << addr;
}

void Analyzer::consume(std::span<const Event> events, std::uint64_t length) {
  if (length <= length_) return;
  std::size_t e = 0;
  while (e < events.size() && events[e].time < length_) ++e; // already consumed
  if (!started_ && (e == events.size() || events[e].time > 0)) {
    // A quiet first step still exposes constant-only addresses.
    for (std::uint32_t li = 0; li < d_.luts().size(); ++li) sample(li);
    started_ = true;
  }
  while (e < events.size() && events[e].time < length) {
    const std::uint64_t t = events[e].time;
    for (; e < events.size() && events[e].time == t; ++e) {
      const auto& ev = events[e];
      if (ev.signal >= signal_net_.size()) throw Error(fmt::format("event references signal #{}", ev.signal));
      NetId n = signal_net_[ev.signal];
      value_[n] = ev.value;
      seen_[n] |= ev.value == LogicValue::Zero ? 1 : ev.value == LogicValue::One ? 2 : ev.value == LogicValue::Z ? 4 : 0;
      for (auto li : d_.lut_fanout(n)) {
        if (!pending_flag_[li]) {
          pending_flag_[li] = 1;
          pending_.push_back(li);
        }
      }
    }
    if (!started_) {
      for (std::uint32_t li = 0; li < d_.luts().size(); ++li) sample(li);
      started_ = true;
    } else {
      for (auto li : pending_) sample(li);
    }
    for (auto li : pending_) pending_flag_[li] = 0;
    pending_.clear();
  }
  length_ = length;
}

AnalysisResult Analyzer::result() const {
  AnalysisResult r;
  r.trace_len = length_;
  r.signal_count = d_.traced_nets().size();
  r.lut_count = d_.luts().size();
  for (NetId n : d_.traced_nets()) {
    const std::uint8_t s = seen_[n];
    if ((s & 3) == 3) continue;
    LowSwitchSignal ls;
    ls.signal = d_.net(n).name;
    if (structural_const_[n]) {
      ls.reason = LowSwitchReason::Constant;
      ls.value = (s & 2) ? LogicValue::One : LogicValue::Zero;
    } else if (s & 3) {
      ls.reason = LowSwitchReason::CandidateTrigger;
      ls.value = (s & 2) ? LogicValue::One : LogicValue::Zero;
    } else if (s & 4) {
      ls.reason = LowSwitchReason::HighZ;
      ls.value = LogicValue::Z;
    } else {
      ls.reason = LowSwitchReason::Unknown;
    }
    r.low_switch.push_back(std::move(ls));
  }
  for (std::size_t i = 0; i < d_.luts().size(); ++i) {
    const auto& l = d_.luts()[i];
    if (cover_[i] == width_mask(init_width(l.k))) continue;
    r.low_coverage.push_back({l.name, d_.net(l.out).name, l.k, l.init, cover_[i]});
  }
  return r;
}

AnalysisResult analyze(const Design& d, const EventTrace& t) {
  Analyzer a(d, t.signals);
  a.consume(t.events, t.length);
  return a.result();
}

namespace {

using Signature = std::pair<std::set<std::string>, std::set<std::string>>;

Signature signature(const AnalysisResult& r) {
  Signature s;
  for (const auto& x : r.low_switch) s.first.insert(x.signal);
  for (const auto& x : r.low_coverage) s.second.insert(x.cell);
  return s;
}

} // namespace

ConvergenceReport converge(const Design& d, const ConvergeOptions& opts) {
  if (opts.schedule.empty()) throw Error("convergence schedule is empty");
  for (std::size_t i = 1; i < opts.schedule.size(); ++i)
    if (opts.schedule[i] <= opts.schedule[i - 1]) throw Error("convergence schedule must be strictly increasing");
  if (opts.stable_rounds < 1) throw Error("stable rounds must be at least 1");

  const auto stim = random_stimulus(d, opts.seed, opts.schedule.back());
  Simulator sim(d);
  EventTrace trace = make_trace_header(d);
  Analyzer analyzer(d, trace.signals);
  ConvergenceReport rep;
  std::vector<Signature> sigs;
  std::uint64_t done = 0;
  for (auto len : opts.schedule) {
    std::size_t first = trace.events.size();
    for (; done < len; ++done) sim.step(stim.steps[done], trace.events);
    trace.length = len;
    analyzer.consume(std::span(trace.events).subspan(first), len);
    rep.final = analyzer.result();
    rep.history.push_back({len, rep.final.low_switch.size(), rep.final.low_coverage.size()});
    sigs.push_back(signature(rep.final));
    const auto m = static_cast<std::size_t>(opts.stable_rounds);
    if (!rep.converged && sigs.size() >= m &&
        std::all_of(sigs.end() - static_cast<std::ptrdiff_t>(m), sigs.end(), [&](const Signature& s) { return s == sigs.back(); }))
      rep.converged = true;
    if (rep.converged && !opts.run_full_schedule) break;
  }
  return rep;
}

std::string analysis_to_json_text(const AnalysisResult& r, const ConvergenceReport* conv) {
  nlohmann::ordered_json j;
  j["trace_len"] = r.trace_len;
  j["signal_count"] = r.signal_count;
  j["lut_count"] = r.lut_count;
  j["low_switch"] = nlohmann::ordered_json::array();
  for (const auto& s : r.low_switch)
    j["low_switch"].push_back({{"signal", s.signal}, {"reason", to_string(s.reason)}, {"value", std::string(1, to_char(s.value))}});
  j["low_coverage"] = nlohmann::ordered_json::array();
  for (const auto& l : r.low_coverage) {
    const unsigned bits = init_width(l.k);
    j["low_coverage"].push_back({{"cell", l.cell},
                                 {"output", l.output},
                                 {"k", l.k},
                                 {"init_hex", to_hex(l.init, bits)},
                                 {"cover_hex", to_hex(l.cover, bits)},
                                 {"uncovered_count", l.uncovered_count()}});
  }
  if (conv) {
    j["converged"] = conv->converged;
    j["history"] = nlohmann::ordered_json::array();
    for (const auto& h : conv->history)
      j["history"].push_back({{"length", h.length}, {"low_switch", h.low_switch}, {"low_coverage", h.low_coverage}});
  }
  return j.dump(2);
}

AnalysisResult analysis_from_json_text(std::string_view text) {
  AnalysisResult r;
  try {
    auto j = nlohmann::json::parse(text);
    r.trace_len = j.at("trace_len").get<std::uint64_t>();
    r.signal_count = j.value("signal_count", std::size_t{0});
    r.lut_count = j.value("lut_count", std::size_t{0});
    for (const auto& s : j.at("low_switch")) {
      LowSwitchSignal ls;
      ls.signal = s.at("signal").get<std::string>();
      ls.reason = low_switch_reason_from_string(s.at("reason").get<std::string>());
      auto v = s.value("value", std::string("x"));
      ls.value = v.size() == 1 ? logic_from_char(v[0]) : LogicValue::X;
      r.low_switch.push_back(std::move(ls));
    }
    for (const auto& l : j.at("low_coverage")) {
      LowCoverageLut lc;
      lc.cell = l.at("cell").get<std::string>();
      lc.output = l.value("output", std::string{});
      lc.k = l.at("k").get<unsigned>();
      if (lc.k < 1 || lc.k > 6) throw Error(fmt::format("analysis: LUT '{}' has k={}", lc.cell, lc.k));
      lc.init = parse_hex(l.at("init_hex").get<std::string>(), init_width(lc.k));
      lc.cover = parse_hex(l.at("cover_hex").get<std::string>(), init_width(lc.k));
      r.low_coverage.push_back(std::move(lc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("analysis: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    throw Error(fmt::format("analysis: {}", e.what()));
  }
  return r;
}

} // namespace lutscope
