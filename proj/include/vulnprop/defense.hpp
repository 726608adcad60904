#pragma once

#include <cstddef>
#include <vector>

#include "vulnprop/network.hpp"

namespace vulnprop {

/// Per-node security investment.
struct Allocation {
  std::vector<double> z;

  double spent() const noexcept;
  /// Throws OutOfRange on a negative entry or when spent() > budget + 1e-9.
  void validate(double budget) const;
  bool operator==(const Allocation&) const = default;
};

inline constexpr double kBudgetSlack = 1e-9;

/// (gamma * z + 1)^theta
double mitigation_factor(double z, const DefenseParams& p);

/// v_hat_i = v_i / (gamma z_i + 1)^theta. Accepts Default or Propagated
/// input; the result is tagged Invested.
VulnState apply_investment(const VulnState& v, const Allocation& z, const DefenseParams& p);

/// ln v - theta ln(gamma z + 1). Vanishes exactly at z = optimal_z_raw(v).
double sensitivity_numerator(double v, double z, const DefenseParams& p);

/// Two-node sensitivity of node i's equilibrium vulnerability to its own
/// investment, up to an unknown positive constant:
///
///   a_i theta k gamma / ((1 + a_i k')^2 (gamma z_i + 1))
///
/// with a_i the numerator for node i, b the numerator for the other node and
/// k = b (a_io - 1)(a_oi - 1)(b a_io (a_oi - 1) - a_oi), k' = b (a_io - 1)(a_oi - 1),
/// where a_io is alpha from i to the other node. Only the sign and zeros are
/// meaningful. Throws NotTwoNode unless the network is two nodes joined both ways.
double sensitivity_dv_dz(const Network& net, const Allocation& z, const DefenseParams& p,
                         std::size_t i);

/// (v^(1/theta) - 1) / gamma; non-positive for every v in [0, 1].
double optimal_z_raw(double v, const DefenseParams& p);
/// optimal_z_raw clamped at zero.
double optimal_z_closed_form(double v, const DefenseParams& p);

}  // namespace vulnprop
