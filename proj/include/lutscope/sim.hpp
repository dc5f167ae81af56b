#pragma once

// Four-valued, cycle-based event-driven simulation. One time step is one
// clock cycle: inputs are applied, combinational logic settles, the settled
// values are recorded, then every DFF samples its data input. The sampled
// values appear on Q at the next time step.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lutscope/design.hpp"
#include "lutscope/logic.hpp"

namespace lutscope {

/// Evaluates a k-input LUT on four-valued address lines (Z reads as X).
/// Unknown lines yield X unless every reachable INIT entry agrees.
LogicValue lut_eval(std::uint64_t init, std::span<const LogicValue> addr);

struct Event {
  std::uint64_t time = 0;
  std::uint32_t signal = 0; ///< index into EventTrace::signals
  LogicValue value = LogicValue::X;
  bool operator==(const Event&) const = default;
};

/// Time-ordered value changes. Every signal is X before time 0.
struct EventTrace {
  std::vector<std::string> signals;
  std::vector<Event> events;
  std::uint64_t length = 0; ///< number of time steps covered

  bool operator==(const EventTrace&) const = default;
  std::optional<std::uint32_t> find_signal(std::string_view name) const;
  /// Value of `signal` after settling at `time` (X before its first event).
  LogicValue value_at(std::uint32_t signal, std::uint64_t time) const;
  /// First `steps` time steps.
  EventTrace prefix(std::uint64_t steps) const;
};

struct Stimulus {
  std::vector<std::string> inputs;             ///< scalar input names
  std::vector<std::vector<LogicValue>> steps;  ///< steps[t][i]
  std::uint64_t seed = 0;

  std::string to_json_text() const;
  static Stimulus from_json_text(std::string_view text);
};

/// Uniform random bits for every free input; reset ports active for the
/// design's reset_cycles leading steps and inactive afterwards. Longer
/// stimuli from the same seed extend shorter ones.
Stimulus random_stimulus(const Design& d, std::uint64_t seed, std::uint64_t cycles);

class OscillationError : public Error {
public:
  OscillationError(const std::string& what, std::vector<std::string> nets)
      : Error(what), nets_(std::move(nets)) {}
  const std::vector<std::string>& nets() const { return nets_; }

private:
  std::vector<std::string> nets_;
};

/// Stateful engine. Owns all mutable simulation state; the Design is shared.
class Simulator {
public:
  explicit Simulator(const Design& d);

  /// Value of a DFF's Q at time 0. Only valid before the first step.
  void set_initial_state(std::size_t dff, LogicValue v);
  /// Advances one cycle. `inputs` follows Design::stimulus_inputs().
  /// Appends the value changes of this step to `events` (trace signal ids).
  void step(std::span<const LogicValue> inputs, std::vector<Event>& events);

  LogicValue value(NetId n) const { return values_[n]; }
  std::span<const LogicValue> values() const { return values_; }
  std::uint64_t time() const { return time_; }
  /// D values captured at the end of the last step (Q of the next step).
  std::span<const LogicValue> next_state() const { return captured_; }

private:
  void settle();
  void touch(NetId n);

  const Design& d_;
  std::vector<LogicValue> values_;
  std::vector<LogicValue> recorded_;
  std::vector<LogicValue> captured_;
  std::vector<LogicValue> initial_;
  std::vector<char> dirty_flag_;
  std::vector<std::uint32_t> dirty_;
  std::vector<char> touched_flag_;
  std::vector<NetId> touched_;
  std::uint64_t time_ = 0;
  std::size_t delta_cap_ = 0;
};

EventTrace make_trace_header(const Design& d);

/// Runs `cycles` steps of `s` (which must cover them).
EventTrace simulate(const Design& d, const Stimulus& s, std::uint64_t cycles);

/// A concrete input sequence, optionally with DFF start values, such as a
/// counterexample returned by the prover.
struct Trigger {
  std::map<std::string, LogicValue> initial_state; ///< DFF Q net name -> value
  std::vector<std::map<std::string, LogicValue>> steps; ///< scalar input -> value
  /// What the sequence is supposed to provoke: `signal` takes `value` at `step`.
  /// A trigger with several expectations fires only when all of them hold.
  struct Expectation {
    std::string signal;
    LogicValue value = LogicValue::One;
    std::uint64_t step = 0;
    bool operator==(const Expectation&) const = default;
  };
  std::vector<Expectation> expect;

  /// Sets every bit of a port from an integer (bit i of value to port bit i).
  void set_port(std::size_t step, const Design::PortInfo& port, std::uint64_t value);

  std::string to_json_text() const;
  static Trigger from_json_text(std::string_view text);
  bool operator==(const Trigger&) const = default;
};

struct ReplayOptions {
  /// Inputs a step leaves unspecified.
  LogicValue fill = LogicValue::Zero;
  /// Extra steps after the sequence, inputs held at `fill`.
  std::uint64_t extra_steps = 0;
};

EventTrace replay(const Design& d, const Trigger& t, const ReplayOptions& opts = {});

/// True when every expectation holds in the trace (false when there are none).
bool trigger_fires(const Design& d, const Trigger& t, const EventTrace& trace);

std::string export_vcd(const EventTrace& t, std::string_view top = "top");

class VcdError : public Error {
public:
  using Error::Error;
};

/// Imports the VCD subset written by export_vcd (plus $dumpvars, vector
/// b-values and x/z). With a design, every signal must exist in it and
/// signals are renamed to their canonical net names.
EventTrace import_vcd(std::string_view text, const Design* d = nullptr);

} // namespace lutscope
