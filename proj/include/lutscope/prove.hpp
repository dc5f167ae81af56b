#pragma once

// SAT-based checking of extracted properties. A proof either finds the
// property violated (FAIL, with a counterexample), shows the violation
// impossible (HOLDS), or gives up within its budget (UNKNOWN).
//
// backtrace_chain walks a failing property back through register
// boundaries: when the counterexample needs registers in some state, the
// next step asks whether their data inputs can produce that state. It ends
// at a cube over primary inputs only (or the reset state), which becomes a
// concrete trigger sequence, or at a step whose goal is unsatisfiable.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lutscope/design.hpp"
#include "lutscope/properties.hpp"
#include "lutscope/sat.hpp"
#include "lutscope/sim.hpp"

namespace lutscope {

/// Combinational fan-in of a set of nets. Stops at anything that is not a LUT
/// output.
struct Cone {
  std::vector<std::uint32_t> luts; ///< topological order
  std::vector<NetId> leaves;       ///< inputs, register outputs, undriven nets; ascending
};

Cone extract_cone(const Design& d, std::span<const NetId> roots);

/// Tseitin encoding of design time frames into a solver, built lazily: a
/// net's cone is encoded the first time its literal is requested. Each LUT
/// contributes one clause per INIT entry.
class FrameEncoder {
public:
  struct Frame {
    std::vector<Lit> lit;
    std::vector<char> have;
    /// Consulted for unbound leaves; nullopt gives a fresh free variable.
    std::function<std::optional<Lit>(NetId)> leaf;
  };

  /// `log`, when given, receives a copy of every clause (for DIMACS dumps).
  FrameEncoder(const Design& d, SatSolver& s, CnfFormula* log = nullptr);

  /// A frame whose leaves are unconstrained until bound.
  Frame new_frame();
  /// Fixes a leaf (input, register output or undriven net) to a literal.
  void bind(Frame& f, NetId n, Lit l);
  Lit net(Frame& f, NetId n);
  /// Value register `dff` takes at the next clock: reset ? reset_value : d.
  Lit next_state(Frame& f, std::size_t dff);
  Lit true_lit() const { return true_; }
  std::uint32_t new_var();
  void add(std::initializer_list<Lit> c);
  void add(std::span<const Lit> c);

private:
  const Design& d_;
  SatSolver& s_;
  CnfFormula* log_;
  Lit true_{};
};

enum class ProofStatus : std::uint8_t { Holds, Fail, Unknown };

std::string_view to_string(ProofStatus s);
ProofStatus proof_status_from_string(std::string_view s);

struct ProveOptions {
  /// Chain steps before giving up (UNKNOWN).
  unsigned max_depth = 16;
  /// Conflicts per SAT call; 0 = unlimited.
  std::uint64_t conflict_budget = 200000;
};

struct CubeLiteral {
  std::string signal;
  bool value = false;
  bool state = false; ///< register output rather than primary input
  bool operator==(const CubeLiteral&) const = default;
};

struct ProofStep {
  unsigned step = 1;
  unsigned cube = 0;              ///< which property cube this chain belongs to
  std::vector<std::string> goals; ///< one "sat -prove ..." line per goal literal
  std::vector<std::string> targets; ///< nets the goal constrains
  ProofStatus status = ProofStatus::Unknown;
  std::vector<CubeLiteral> counterexample; ///< minimized; empty unless FAIL
  std::string rendered;                     ///< "Tj_Trig = 1", "N.A." when none
  bool operator==(const ProofStep&) const = default;
};

struct ProofResult {
  std::string property;
  std::string method; ///< "combinational", "chain" or "bmc"
  ProofStatus status = ProofStatus::Unknown;
  std::vector<ProofStep> steps;
  /// For FAIL: input sequence (with explicit register start values) that
  /// drives the property's violating value.
  std::optional<Trigger> trigger;
  /// The trigger was replayed through the simulator and the violation observed.
  bool confirmed = false;
  /// True when the chain reached primary inputs or the reset state.
  bool reaches_inputs = false;
  std::string note;
  std::uint64_t conflicts = 0;

  std::string to_json_text() const;
  static ProofResult from_json_text(std::string_view text);
  bool operator==(const ProofResult&) const = default;
};

/// One frame, register outputs free: can the violation occur at all?
ProofResult prove_combinational(const Design& d, const Property& p, const ProveOptions& opts = {});

/// Multi-step back-trace through registers (see the header comment).
ProofResult backtrace_chain(const Design& d, const Property& p, const ProveOptions& opts = {});

/// Bounded model check from the reset state over frames 0..k-1. Registers
/// with a reset start at their reset value, the others are free. Reports the
/// earliest failing frame.
ProofResult prove_bmc(const Design& d, const Property& p, unsigned k, const ProveOptions& opts = {});

/// Aligned step / goal / status / counterexample table.
std::string render_proof_table(const ProofResult& r);

/// CNF of "the property is violated in one frame", for external solvers.
CnfFormula property_cnf(const Design& d, const Property& p);

} // namespace lutscope
