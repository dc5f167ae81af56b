#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lutscope {

/// Four-state logic value carried by every net in simulation and traces.
enum class LogicValue : std::uint8_t { Zero = 0, One = 1, X = 2, Z = 3 };

inline constexpr bool is_known(LogicValue v) { return v == LogicValue::Zero || v == LogicValue::One; }

inline constexpr LogicValue from_bool(bool b) { return b ? LogicValue::One : LogicValue::Zero; }

inline constexpr char to_char(LogicValue v) {
  switch (v) {
  case LogicValue::Zero: return '0';
  case LogicValue::One: return '1';
  case LogicValue::X: return 'x';
  case LogicValue::Z: return 'z';
  }
  return 'x';
}

/// Accepts 0/1/x/X/z/Z. Throws std::invalid_argument otherwise.
LogicValue logic_from_char(char c);

/// Every error the library reports derives from this.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Number of INIT bits for a k-input LUT.
inline constexpr unsigned init_width(unsigned k) { return 1u << k; }

inline constexpr std::uint64_t width_mask(unsigned bits) {
  return bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
}

/// Lowercase hex of the low `bits` bits, zero padded to ceil(bits/4) digits.
std::string to_hex(std::uint64_t value, unsigned bits);

/// Parses plain hex digits (no prefix). Throws Error on bad input or overflow of `bits`.
std::uint64_t parse_hex(std::string_view digits, unsigned bits);

/// Verilog sized literal, e.g. 16'haccc.
std::string verilog_hex(std::uint64_t value, unsigned bits);

} // namespace lutscope
