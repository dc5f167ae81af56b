#pragma once

// Compiled, bit-level view of a flat netlist. Assign aliases are merged, so
// every NetId is one electrical node with at most one driver.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lutscope/netlist.hpp"

namespace lutscope {

using NetId = std::uint32_t;

enum class PortRole : std::uint8_t { Free, Clock, Reset };

std::string_view to_string(PortRole r);

/// Port-role annotations. Anything not listed is guessed from its name
/// (clk/clock, rst/reset) or from being wired to a DFF clock pin.
struct PortRoles {
  std::map<std::string, PortRole> roles;
  /// Reset ports are held active (1) for this many leading cycles.
  int reset_cycles = 1;

  static PortRoles from_json_text(std::string_view text);
  std::string to_json_text() const;
};

class Design {
public:
  enum class DriverKind : std::uint8_t { None, Input, Lut, Dff, Const };

  struct Net {
    std::string name;                 ///< canonical scalar name
    std::vector<std::string> aliases; ///< other names merged into this net
    DriverKind driver = DriverKind::None;
    std::uint32_t driver_index = 0; ///< index into luts()/dffs()/consts()/inputs bits
    bool hidden = false;            ///< literal constant node, never traced
    bool clock = false;
  };

  struct Lut {
    std::string name;
    std::uint64_t init = 0;
    unsigned k = 0;
    std::array<NetId, 6> in{};
    NetId out = 0;
    std::span<const NetId> inputs() const { return {in.data(), k}; }
  };

  struct Dff {
    std::string name;
    NetId clock = 0;
    NetId d = 0;
    NetId q = 0;
    std::optional<NetId> reset;
    bool reset_value = false;
  };

  struct Const {
    std::string name; ///< empty for assign-from-literal
    NetId out = 0;
    bool value = false;
  };

  struct PortInfo {
    std::string name;
    Range range;
    PortDir dir = PortDir::Input;
    PortRole role = PortRole::Free;
    std::vector<NetId> bits; ///< lsb first
    std::vector<std::string> bit_names;
  };

  static constexpr NetId kConst0 = 0;
  static constexpr NetId kConst1 = 1;

  /// Flattens when needed and validates; throws Error on invalid input.
  static Design build(const Netlist& n, const PortRoles& roles = {});
  /// Skips the combinational-loop check so oscillation handling can be exercised.
  static Design build_unchecked(const Netlist& n, const PortRoles& roles = {});

  const Netlist& netlist() const { return flat_; }
  const std::vector<Net>& nets() const { return nets_; }
  const Net& net(NetId id) const { return nets_[id]; }
  const std::vector<Lut>& luts() const { return luts_; }
  const std::vector<Dff>& dffs() const { return dffs_; }
  const std::vector<Const>& consts() const { return consts_; }
  const std::vector<PortInfo>& ports() const { return ports_; }
  std::size_t cell_count() const { return luts_.size() + dffs_.size() + consts_.size(); }

  /// Resolves a scalar name or alias ("a", "a[3]", "u.x").
  std::optional<NetId> find_net(std::string_view name) const;
  std::optional<std::size_t> find_lut(std::string_view cell) const;
  std::optional<std::size_t> find_dff(std::string_view cell) const;
  const PortInfo* find_port(std::string_view name) const;

  /// Driven primary-input bits fed by stimulus (clock ports excluded), in
  /// port declaration order, lsb first.
  const std::vector<NetId>& stimulus_inputs() const { return stim_inputs_; }
  PortRole input_role(NetId id) const;
  int reset_cycles() const { return reset_cycles_; }

  /// Nets that appear in traces: visible and not clocks, in net order.
  const std::vector<NetId>& traced_nets() const { return traced_; }
  std::optional<std::uint32_t> trace_index(NetId id) const;

  /// LUTs reading a net (each LUT listed once).
  std::span<const std::uint32_t> lut_fanout(NetId id) const;
  /// LUT indices in topological order (empty when built unchecked with a loop).
  const std::vector<std::uint32_t>& lut_order() const { return lut_order_; }
  std::uint32_t lut_of_output(NetId id) const { return nets_[id].driver_index; }

  /// Output port bits, lsb first, port order.
  std::vector<NetId> output_bits() const;

private:
  static Design compile(const Netlist& n, const PortRoles& roles, bool check_loops);

  Netlist flat_;
  std::vector<Net> nets_;
  std::vector<Lut> luts_;
  std::vector<Dff> dffs_;
  std::vector<Const> consts_;
  std::vector<PortInfo> ports_;
  std::unordered_map<std::string, NetId> by_name_;
  std::unordered_map<std::string, std::size_t> lut_by_name_;
  std::unordered_map<std::string, std::size_t> dff_by_name_;
  std::vector<NetId> stim_inputs_;
  std::vector<PortRole> input_roles_; // parallel to nets_
  std::vector<NetId> traced_;
  std::vector<std::int32_t> trace_index_;
  std::vector<std::uint32_t> fanout_offsets_;
  std::vector<std::uint32_t> fanout_;
  std::vector<std::uint32_t> lut_order_;
  int reset_cycles_ = 1;
};

} // namespace lutscope
