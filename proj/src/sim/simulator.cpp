#include <algorithm>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "lutscope/sim.hpp"

namespace lutscope {

LogicValue lut_eval(std::uint64_t init, std::span<const LogicValue> addr) {
  const unsigned k = static_cast<unsigned>(addr.size());
  if (k > 6) throw Error(fmt::format("lut_eval: {} address lines (max 6)", k));
  std::uint64_t known_mask = 0, known_val = 0;
  for (unsigned i = 0; i < k; ++i) {
    if (addr[i] == LogicValue::Zero) {
      known_mask |= 1u << i;
    } else if (addr[i] == LogicValue::One) {
      known_mask |= 1u << i;
      known_val |= 1u << i;
    }
  }
  const unsigned entries = init_width(k);
  if (known_mask == width_mask(k)) return from_bool((init >> known_val) & 1u);
  int seen = -1;
  for (unsigned a = 0; a < entries; ++a) {
    if ((a & known_mask) != known_val) continue;
    int bit = static_cast<int>((init >> a) & 1u);
    if (seen < 0) seen = bit;
    else if (seen != bit) return LogicValue::X;
  }
  return from_bool(seen == 1);
}

// ---------------------------------------------------------------------------
// EventTrace

std::optional<std::uint32_t> EventTrace::find_signal(std::string_view name) const {
  for (std::uint32_t i = 0; i < signals.size(); ++i)
    if (signals[i] == name) return i;
  return std::nullopt;
}

LogicValue EventTrace::value_at(std::uint32_t signal, std::uint64_t time) const {
  LogicValue v = LogicValue::X;
  for (const auto& e : events) {
    if (e.time > time) break;
    if (e.signal == signal) v = e.value;
  }
  return v;
}

EventTrace EventTrace::prefix(std::uint64_t steps) const {
  EventTrace t;
  t.signals = signals;
  t.length = std::min(length, steps);
  for (const auto& e : events) {
    if (e.time >= steps) break;
    t.events.push_back(e);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Stimulus

std::string Stimulus::to_json_text() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["inputs"] = inputs;
  auto arr = nlohmann::json::array();
  for (const auto& s : steps) {
    std::string row;
    for (auto v : s) row += to_char(v);
    arr.push_back(row);
  }
  j["steps"] = arr;
  return j.dump(2);
}

Stimulus Stimulus::from_json_text(std::string_view text) {
  Stimulus s;
  try {
    auto j = nlohmann::json::parse(text);
    s.seed = j.value("seed", std::uint64_t{0});
    s.inputs = j.at("inputs").get<std::vector<std::string>>();
    for (const auto& row : j.at("steps")) {
      auto str = row.get<std::string>();
      if (str.size() != s.inputs.size()) throw Error("stimulus row width does not match inputs");
      std::vector<LogicValue> v;
      for (char c : str) v.push_back(logic_from_char(c));
      s.steps.push_back(std::move(v));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("stimulus: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    throw Error(fmt::format("stimulus: {}", e.what()));
  }
  return s;
}

Stimulus random_stimulus(const Design& d, std::uint64_t seed, std::uint64_t cycles) {
  Stimulus s;
  s.seed = seed;
  const auto& ins = d.stimulus_inputs();
  for (NetId n : ins) s.inputs.push_back(d.net(n).name);
  std::mt19937_64 rng(seed);
  std::uint64_t pool = 0;
  int left = 0;
  s.steps.reserve(cycles);
  for (std::uint64_t t = 0; t < cycles; ++t) {
    std::vector<LogicValue> row(ins.size());
    for (std::size_t i = 0; i < ins.size(); ++i) {
      if (d.input_role(ins[i]) == PortRole::Reset) {
        row[i] = from_bool(t < static_cast<std::uint64_t>(d.reset_cycles()));
        continue;
      }
      if (left == 0) {
        pool = rng();
        left = 64;
      }
      row[i] = from_bool(pool & 1u);
      pool >>= 1;
      --left;
    }
    s.steps.push_back(std::move(row));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Simulator

Simulator::Simulator(const Design& d)
    : d_(d),
      values_(d.nets().size(), LogicValue::X),
      recorded_(d.nets().size(), LogicValue::X),
      captured_(d.dffs().size(), LogicValue::X),
      initial_(d.dffs().size(), LogicValue::X),
      dirty_flag_(d.luts().size(), 0),
      touched_flag_(d.nets().size(), 0),
      delta_cap_(std::max<std::size_t>(10, 10 * d.cell_count())) {}

void Simulator::set_initial_state(std::size_t dff, LogicValue v) {
  if (time_ != 0) throw Error("initial state can only be set before the first step");
  initial_.at(dff) = v;
}

void Simulator::touch(NetId n) {
  if (!touched_flag_[n]) {
    touched_flag_[n] = 1;
    touched_.push_back(n);
  }
  for (auto r : d_.lut_fanout(n)) {
    if (!dirty_flag_[r]) {
      dirty_flag_[r] = 1;
      dirty_.push_back(r);
    }
  }
}

void Simulator::settle() {
  std::size_t rounds = 0;
  std::vector<std::uint32_t> current;
  std::vector<std::pair<NetId, LogicValue>> updates;
  std::array<LogicValue, 6> addr{};
  while (!dirty_.empty()) {
    if (++rounds > delta_cap_) {
      std::vector<std::string> nets;
      for (auto li : dirty_) nets.push_back(d_.net(d_.luts()[li].out).name);
      std::sort(nets.begin(), nets.end());
      nets.erase(std::unique(nets.begin(), nets.end()), nets.end());
      std::string list;
      for (const auto& n : nets) list += (list.empty() ? "" : ", ") + n;
      throw OscillationError(
          fmt::format("no fixpoint after {} delta cycles at time {}; oscillating: {}", delta_cap_, time_, list), nets);
    }
    current.swap(dirty_);
    dirty_.clear();
    for (auto li : current) dirty_flag_[li] = 0;
    updates.clear();
    for (auto li : current) {
      const auto& l = d_.luts()[li];
      for (unsigned i = 0; i < l.k; ++i) addr[i] = values_[l.in[i]];
      updates.emplace_back(l.out, lut_eval(l.init, std::span(addr.data(), l.k)));
    }
    for (auto [net, v] : updates) {
      if (values_[net] == v) continue;
      values_[net] = v;
      touch(net);
    }
  }
}

void Simulator::step(std::span<const LogicValue> inputs, std::vector<Event>& events) {
  const auto& ins = d_.stimulus_inputs();
  if (inputs.size() != ins.size())
    throw Error(fmt::format("step: {} input values for {} inputs", inputs.size(), ins.size()));
  if (time_ == 0) {
    values_[Design::kConst0] = LogicValue::Zero;
    values_[Design::kConst1] = LogicValue::One;
    for (const auto& c : d_.consts()) {
      values_[c.out] = from_bool(c.value);
      touch(c.out);
    }
    for (NetId n = 0; n < d_.nets().size(); ++n) {
      const auto& net = d_.net(n);
      if (!net.hidden && net.driver == Design::DriverKind::None) {
        values_[n] = LogicValue::Z;
        touch(n);
      }
    }
    for (std::size_t i = 0; i < d_.dffs().size(); ++i) {
      values_[d_.dffs()[i].q] = initial_[i];
      touch(d_.dffs()[i].q);
    }
    for (std::uint32_t li = 0; li < d_.luts().size(); ++li) {
      if (!dirty_flag_[li]) {
        dirty_flag_[li] = 1;
        dirty_.push_back(li);
      }
    }
  } else {
    for (std::size_t i = 0; i < d_.dffs().size(); ++i) {
      NetId q = d_.dffs()[i].q;
      if (values_[q] != captured_[i]) {
        values_[q] = captured_[i];
        touch(q);
      }
    }
  }
  for (std::size_t i = 0; i < ins.size(); ++i) {
    if (values_[ins[i]] != inputs[i]) {
      values_[ins[i]] = inputs[i];
      touch(ins[i]);
    }
  }
  settle();

  std::sort(touched_.begin(), touched_.end());
  for (NetId n : touched_) {
    touched_flag_[n] = 0;
    if (values_[n] == recorded_[n]) continue;
    recorded_[n] = values_[n];
    if (auto ti = d_.trace_index(n)) events.push_back({time_, *ti, values_[n]});
  }
  touched_.clear();

  for (std::size_t i = 0; i < d_.dffs().size(); ++i) {
    const auto& f = d_.dffs()[i];
    LogicValue data = values_[f.d];
    LogicValue rst = f.reset ? values_[*f.reset] : LogicValue::Zero;
    LogicValue rv = from_bool(f.reset_value);
    if (rst == LogicValue::One) captured_[i] = rv;
    else if (rst == LogicValue::Zero) captured_[i] = data;
    else captured_[i] = data == rv ? rv : LogicValue::X;
  }
  ++time_;
}

EventTrace make_trace_header(const Design& d) {
  EventTrace t;
  for (NetId n : d.traced_nets()) t.signals.push_back(d.net(n).name);
  return t;
}

namespace {

// Stimulus columns reordered to the design's input order.
std::vector<std::size_t> stimulus_columns(const Design& d, const Stimulus& s) {
  const auto& ins = d.stimulus_inputs();
  std::vector<std::size_t> col(ins.size());
  if (s.inputs.size() != ins.size())
    throw Error(fmt::format("stimulus drives {} inputs, design has {}", s.inputs.size(), ins.size()));
  for (std::size_t i = 0; i < ins.size(); ++i) {
    auto it = std::find(s.inputs.begin(), s.inputs.end(), d.net(ins[i]).name);
    if (it == s.inputs.end()) {
      // accept aliases
      bool found = false;
      for (std::size_t j = 0; j < s.inputs.size(); ++j) {
        auto n = d.find_net(s.inputs[j]);
        if (n && *n == ins[i]) {
          col[i] = j;
          found = true;
          break;
        }
      }
      if (!found) throw Error(fmt::format("stimulus does not drive input '{}'", d.net(ins[i]).name));
    } else {
      col[i] = static_cast<std::size_t>(it - s.inputs.begin());
    }
  }
  return col;
}

} // namespace

EventTrace simulate(const Design& d, const Stimulus& s, std::uint64_t cycles) {
  if (s.steps.size() < cycles)
    throw Error(fmt::format("stimulus has {} steps, {} requested", s.steps.size(), cycles));
  auto col = stimulus_columns(d, s);
  EventTrace t = make_trace_header(d);
  Simulator sim(d);
  std::vector<LogicValue> row(col.size());
  for (std::uint64_t c = 0; c < cycles; ++c) {
    for (std::size_t i = 0; i < col.size(); ++i) row[i] = s.steps[c][col[i]];
    sim.step(row, t.events);
  }
  t.length = cycles;
  return t;
}

// ---------------------------------------------------------------------------
// Replay

void Trigger::set_port(std::size_t step, const Design::PortInfo& port, std::uint64_t value) {
  if (steps.size() <= step) steps.resize(step + 1);
  for (std::size_t i = 0; i < port.bit_names.size(); ++i)
    steps[step][port.bit_names[i]] = from_bool(i < 64 && ((value >> i) & 1u));
}

std::string Trigger::to_json_text() const {
  nlohmann::json j;
  j["initial_state"] = nlohmann::json::object();
  for (const auto& [k, v] : initial_state) j["initial_state"][k] = std::string(1, to_char(v));
  j["steps"] = nlohmann::json::array();
  for (const auto& s : steps) {
    nlohmann::json o = nlohmann::json::object();
    for (const auto& [k, v] : s) o[k] = std::string(1, to_char(v));
    j["steps"].push_back(o);
  }
  if (!expect.empty()) {
    j["expect"] = nlohmann::json::array();
    for (const auto& e : expect)
      j["expect"].push_back({{"signal", e.signal}, {"value", std::string(1, to_char(e.value))}, {"step", e.step}});
  }
  return j.dump(2);
}

Trigger Trigger::from_json_text(std::string_view text) {
  Trigger t;
  auto val = [](const nlohmann::json& v) {
    auto s = v.get<std::string>();
    if (s.size() != 1) throw Error(fmt::format("trigger: bad logic value \"{}\"", s));
    return logic_from_char(s[0]);
  };
  try {
    auto j = nlohmann::json::parse(text);
    if (j.contains("initial_state"))
      for (const auto& [k, v] : j.at("initial_state").items()) t.initial_state[k] = val(v);
    for (const auto& s : j.at("steps")) {
      std::map<std::string, LogicValue> m;
      for (const auto& [k, v] : s.items()) m[k] = val(v);
      t.steps.push_back(std::move(m));
    }
    if (j.contains("expect"))
      for (const auto& e : j.at("expect"))
        t.expect.push_back({e.at("signal").get<std::string>(), val(e.at("value")), e.at("step").get<std::uint64_t>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("trigger: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    throw Error(fmt::format("trigger: {}", e.what()));
  }
  return t;
}

EventTrace replay(const Design& d, const Trigger& t, const ReplayOptions& opts) {
  Simulator sim(d);
  for (const auto& [name, v] : t.initial_state) {
    auto n = d.find_net(name);
    if (!n || d.net(*n).driver != Design::DriverKind::Dff)
      throw Error(fmt::format("replay: '{}' is not a register output", name));
    sim.set_initial_state(d.net(*n).driver_index, v);
  }
  const auto& ins = d.stimulus_inputs();
  std::vector<std::size_t> pos(d.nets().size(), SIZE_MAX);
  for (std::size_t i = 0; i < ins.size(); ++i) pos[ins[i]] = i;
  std::vector<std::vector<std::pair<std::size_t, LogicValue>>> plan;
  for (const auto& s : t.steps) {
    std::vector<std::pair<std::size_t, LogicValue>> row;
    for (const auto& [name, v] : s) {
      auto n = d.find_net(name);
      if (!n || pos[*n] == SIZE_MAX) throw Error(fmt::format("replay: '{}' is not a primary input", name));
      row.emplace_back(pos[*n], v);
    }
    plan.push_back(std::move(row));
  }
  EventTrace trace = make_trace_header(d);
  const std::uint64_t total = t.steps.size() + opts.extra_steps;
  std::vector<LogicValue> row(ins.size());
  for (std::uint64_t c = 0; c < total; ++c) {
    std::fill(row.begin(), row.end(), opts.fill);
    if (c < plan.size())
      for (auto [i, v] : plan[c]) row[i] = v;
    sim.step(row, trace.events);
  }
  trace.length = total;
  return trace;
}

bool trigger_fires(const Design& d, const Trigger& t, const EventTrace& trace) {
  if (t.expect.empty()) return false;
  for (const auto& e : t.expect) {
    auto n = d.find_net(e.signal);
    if (!n) throw Error(fmt::format("trigger expectation names unknown signal '{}'", e.signal));
    auto idx = trace.find_signal(d.net(*n).name);
    if (!idx || e.step >= trace.length || trace.value_at(*idx, e.step) != e.value) return false;
  }
  return true;
}

} // namespace lutscope
