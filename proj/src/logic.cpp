#include "lutscope/logic.hpp"

#include <fmt/format.h>

namespace lutscope {

LogicValue logic_from_char(char c) {
  switch (c) {
  case '0': return LogicValue::Zero;
  case '1': return LogicValue::One;
  case 'x':
  case 'X': return LogicValue::X;
  case 'z':
  case 'Z': return LogicValue::Z;
  default: throw std::invalid_argument(fmt::format("not a logic value: '{}'", c));
  }
}

std::string to_hex(std::uint64_t value, unsigned bits) {
  const unsigned digits = bits == 0 ? 1 : (bits + 3) / 4;
  return fmt::format("{:0{}x}", value & width_mask(bits), digits);
}

std::uint64_t parse_hex(std::string_view digits, unsigned bits) {
  if (digits.empty()) throw Error("empty hex string");
  std::uint64_t v = 0;
  for (char c : digits) {
    if (c == '_') continue;
    unsigned d;
    if (c >= '0' && c <= '9') d = static_cast<unsigned>(c - '0');
    else if (c >= 'a' && c <= 'f') d = static_cast<unsigned>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') d = static_cast<unsigned>(c - 'A' + 10);
    else throw Error(fmt::format("bad hex digit '{}' in \"{}\"", c, digits));
    if (v >> 60) throw Error(fmt::format("hex value \"{}\" exceeds 64 bits", digits));
    v = (v << 4) | d;
  }
  if (v & ~width_mask(bits)) throw Error(fmt::format("hex value \"{}\" exceeds {} bits", digits, bits));
  return v;
}

std::string verilog_hex(std::uint64_t value, unsigned bits) {
  return fmt::format("{}'h{}", bits, to_hex(value, bits));
}

} // namespace lutscope
