#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "vulnprop/network.hpp"

namespace vulnprop {

enum class TopologyKind { Dense5, Sparse5, Star, Ring, UtilityCC, Substation };

struct TopologySpec {
  TopologyKind kind = TopologyKind::Dense5;
  std::size_t n = 0;  // only used by Star and Ring
};

/// Parses "dense5", "sparse5", "utility", "substation", "star:N", "ring:N".
TopologySpec parse_topology(std::string_view text);
std::string to_string(const TopologySpec& spec);

/// Generates a topology with every link present in both directions, all
/// alphas set to `alpha` and all default vulnerabilities set to `v`.
///
/// Dense5      complete graph on 5 nodes (20 directed edges).
/// Sparse5     path a_0 - a_1 - a_2 - a_3 - a_4 (8 directed edges).
/// Star(n)     hub 0 with n-1 leaves.
/// Ring(n)     cycle on n >= 3 nodes.
/// UtilityCC   control-center approximation: firewall - router - switch,
///             three hosts on the switch and 19 substation gateways on the
///             router (25 nodes).
/// Substation  station/bay/process tree; nodes a_0..a_5 are the core devices
///             of degree >= 2, the remaining nodes are degree-1 leaves.
///
/// The last two are structural approximations, not exact device inventories.
Network generate_topology(const TopologySpec& spec, double v, double alpha);

}  // namespace vulnprop
