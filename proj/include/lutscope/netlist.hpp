#pragma once

// LUT-level structural netlists and their text form. A Netlist is a plain value; once built it is never mutated by
// the analysis code, so it can be shared freely between threads.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lutscope/logic.hpp"

namespace lutscope {

/// Inclusive bit range of a declaration. `vector == false` means a plain
/// scalar (`wire a;`) whose single bit has no index.
struct Range {
  int msb = 0;
  int lsb = 0;
  bool vector = false;

  int width() const { return (msb >= lsb ? msb - lsb : lsb - msb) + 1; }
  bool contains(int i) const { return msb >= lsb ? (i <= msb && i >= lsb) : (i >= msb && i <= lsb); }
  /// Bit indices from msb down to lsb (declaration order of a concatenation).
  std::vector<int> indices_msb_first() const;
  bool operator==(const Range&) const = default;
};

/// Reference to one scalar bit of a net, or a constant.
struct NetBit {
  enum class Kind : std::uint8_t { Signal, Const0, Const1 };
  Kind kind = Kind::Signal;
  std::string name;
  int index = -1; ///< -1 for scalar nets

  static NetBit signal(std::string n, int idx = -1) { return {Kind::Signal, std::move(n), idx}; }
  static NetBit constant(bool v) { return {v ? Kind::Const1 : Kind::Const0, {}, -1}; }

  bool is_const() const { return kind != Kind::Signal; }
  /// Canonical scalar signal name: "a" or "a[3]"; "1'b0"/"1'b1" for constants.
  std::string str() const;
  bool operator==(const NetBit&) const = default;
  auto operator<=>(const NetBit&) const = default;
};

enum class PortDir : std::uint8_t { Input, Output };

struct Port {
  std::string name;
  PortDir dir = PortDir::Input;
  Range range;
};

struct Wire {
  std::string name;
  Range range;
};

enum class CellKind : std::uint8_t { Lut, Dff, Const0, Const1 };

struct Cell {
  std::string name;
  CellKind kind = CellKind::Lut;
  /// LUT address lines, line 0 is the address LSB.
  std::vector<NetBit> inputs;
  /// LUT/CONST output `O`, or DFF `Q`.
  NetBit output;
  /// LUT truth table; bit i is the output for address i.
  std::uint64_t init = 0;
  // DFF only.
  NetBit clock;
  NetBit data;
  std::optional<NetBit> reset; ///< synchronous, active high
  bool reset_value = false;
  /// Primitive name as written in the source (LUT4, MUX2, DFF, ...).
  std::string source_type;
  int line = 0;

  unsigned lut_size() const { return static_cast<unsigned>(inputs.size()); }
};

struct PortBinding {
  std::string port;
  std::vector<NetBit> bits; ///< msb first, as written
};

struct Instance {
  std::string name;
  std::string module;
  std::vector<PortBinding> bindings;
  int line = 0;
};

struct Assign {
  NetBit lhs;
  NetBit rhs;
  int line = 0;
};

struct Module {
  std::string name;
  std::vector<Port> ports;
  std::vector<Wire> wires;
  std::vector<Cell> cells;
  std::vector<Instance> instances;
  std::vector<Assign> assigns;

  const Port* find_port(std::string_view n) const;
  const Wire* find_wire(std::string_view n) const;
  /// Range of a port or wire.
  std::optional<Range> find_range(std::string_view n) const;
  const Cell* find_cell(std::string_view n) const;
  Cell* find_cell(std::string_view n);
};

struct Netlist {
  std::map<std::string, Module> modules;
  std::string top;

  const Module& top_module() const;
  Module& top_module();
  bool is_flat() const;
};

/// Thrown by the parser; carries a 1-based source position.
class ParseError : public Error {
public:
  ParseError(int line, int column, const std::string& what);
  int line() const { return line_; }
  int column() const { return column_; }

private:
  int line_;
  int column_;
};

struct ParseOptions {
  /// Run validate() after parsing and throw on the first diagnostic.
  bool strict = true;
  /// Top module name; empty selects the single uninstantiated module.
  std::string top;
};

Netlist parse_netlist(std::string_view text, const ParseOptions& opts = {});

/// Single-module netlist. Child nets become `inst.name`; child port nets are
/// kept as wires tied to the parent connection with assigns.
Netlist flatten(const Netlist& n);

std::string emit_netlist(const Netlist& n);

struct Diagnostic {
  enum class Kind : std::uint8_t { Undeclared, MultiDriver, CombLoop, BadInstance, BadCell, BadTop };
  Kind kind;
  std::string module;
  std::string message;
  int line = 0; ///< source line of the offending cell, when known
  bool operator==(const Diagnostic&) const = default;
};

std::string_view to_string(Diagnostic::Kind k);

std::vector<Diagnostic> validate(const Netlist& n);

/// Every scalar signal of a module in declaration order (ports then wires),
/// bits of a vector from lsb to msb.
std::vector<NetBit> module_bits(const Module& m);

/// Renders an identifier, escaping it Verilog style when needed.
std::string verilog_identifier(std::string_view name);

} // namespace lutscope
