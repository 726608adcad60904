#pragma once

#include "vulnprop/network.hpp"

namespace vulnprop {

/// Scalar parameters of the two-node case.
struct TwoNodeParams {
  double v1 = 0.5;
  double v2 = 0.5;
  double alpha12 = 0.5;
  double alpha21 = 0.5;
  double gamma = 0.7;
  double theta = 2.0;

  /// Asymmetric factor alpha12 / alpha21. Throws OutOfRange if alpha21 == 0.
  double r() const;
  void validate() const;

  /// Reads the parameters of a two-node network; absent edges count as 1.
  static TwoNodeParams from_network(const Network& net, const DefenseParams& p);
};

/// Linearized two-node objective
///   [2 + b1(a21 + b2(a21-1)) + b2(a12 + b1(a12-1))] / [1 - b1 b2 (a12-1)(a21-1)]
/// with b_i = ln v_i - theta ln(gamma z_i + 1).
/// Throws DegenerateDenominator when |denominator| < 1e-12.
double objective_simple(const TwoNodeParams& p, double z1, double z2);

/// Same expression with b_i = ln(k_i / k) - theta ln(gamma z_i + 1), where
///   k_i = 1 + ln v_i a_ji + (a_ji - 1) ln v_i ln v_j,
///   k   = 1 - (a_ji - 1)(a_ij - 1) ln v_i ln v_j.
double objective_two_stage(const TwoNodeParams& p, double z1, double z2);

}  // namespace vulnprop
