#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vulnprop/network.hpp"

namespace vulnprop {

enum class SolveMode { Exact, Linearized };

enum class SolveMethod {
  FixedPoint,
  Newton,
  /// Newton with the zero-diagonal subset-sum Jacobian. Kept for comparison;
  /// it does not converge in general.
  NewtonSubsetJacobian,
};

struct SolverConfig {
  double tol = 1e-9;
  int max_iter = 200;
  SolveMode mode = SolveMode::Exact;
  SolveMethod method = SolveMethod::Newton;
  double damping = 0.5;

  void validate() const;
};

using JacobianMatrix = Eigen::MatrixXd;

/// Lower bound applied to any probability before taking its logarithm.
inline constexpr double kLogFloor = 1e-12;

/// Exponent E_i = prod_{j in in(i)} (x_j * alpha_ji + 1 - x_j). Empty product
/// is 1, so isolated nodes keep their base value.
double propagation_exponent(const Network& net, std::span<const double> x, std::size_t i);

/// base^E with 0^0 = 1.
double exact_response(double base, double exponent);
/// 1 + E * ln(base), not clamped.
double linear_response(double base, double exponent);

/// One synchronous sweep of the propagation map:
/// out_i = response(base_i, E_i(x)). Linearized results are clamped to [0, 1].
std::vector<double> propagation_map(const Network& net, std::span<const double> base,
                                    std::span<const double> x, SolveMode mode);

/// g(x) = x - propagation_map(base, x).
std::vector<double> equilibrium_residual(const Network& net, std::span<const double> base,
                                         std::span<const double> x, SolveMode mode);

/// dg/dx: unit diagonal, off-diagonal entries only where an edge j -> i exists.
JacobianMatrix residual_jacobian(const Network& net, std::span<const double> base,
                                 std::span<const double> x, SolveMode mode);

/// Single sweep using the input vector as both base and neighbour state.
VulnState propagate_exact_step(const Network& net, const VulnState& v);
VulnState propagate_linearized_step(const Network& net, const VulnState& v);

struct EquilibriumResult {
  VulnState state;
  int iterations = 0;
  double residual = 0.0;
  /// Newton hit a singular Jacobian and completed with damped fixed-point steps.
  bool fell_back = false;
};

/// Solves x = propagation_map(v0, x). Throws NoConvergence after max_iter.
EquilibriumResult solve_equilibrium(const Network& net, const VulnState& v0,
                                    const SolverConfig& cfg = {});

/// Zero-diagonal Jacobian built by enumerating every non-empty subset K_p of
/// the in-neighbours of i other than j:
///   J_ij = 1 + sum_p prod_{l in K_p} v_l (alpha_li - 1)   for each edge j -> i.
/// Throws TooManyNodes when a node has more than 24 in-neighbours.
JacobianMatrix jacobian_subset_sum(const Network& net, std::span<const double> v);

}  // namespace vulnprop
