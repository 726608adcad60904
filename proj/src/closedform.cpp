#include "vulnprop/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vulnprop/error.hpp"
#include "vulnprop/propagation.hpp"

namespace vulnprop {
namespace {

double log_p(double v) { return std::log(std::max(v, kLogFloor)); }

double investment_log(const TwoNodeParams& p, double z) {
  if (!(z >= 0.0)) throw Error(ErrorCode::OutOfRange, "investment must be >= 0");
  return p.theta * std::log(p.gamma * z + 1.0);
}

double two_node_sum(double b1, double b2, double a12, double a21) {
  const double num = 2.0 + b1 * (a21 + b2 * (a21 - 1.0)) + b2 * (a12 + b1 * (a12 - 1.0));
  const double den = 1.0 - b1 * b2 * (a12 - 1.0) * (a21 - 1.0);
  if (std::abs(den) < 1e-12) {
    throw Error(ErrorCode::DegenerateDenominator, "two-node objective denominator vanishes");
  }
  return num / den;
}

}  // namespace

double TwoNodeParams::r() const {
  if (alpha21 == 0.0) throw Error(ErrorCode::OutOfRange, "r undefined for alpha21 = 0");
  return alpha12 / alpha21;
}

void TwoNodeParams::validate() const {
  check_probability(v1, "v1");
  check_probability(v2, "v2");
  check_probability(alpha12, "alpha12");
  check_probability(alpha21, "alpha21");
  DefenseParams{gamma, theta, 0.0}.validate();
}

TwoNodeParams TwoNodeParams::from_network(const Network& net, const DefenseParams& p) {
  if (net.size() != 2) throw Error(ErrorCode::NotTwoNode, "network has " + std::to_string(net.size()) + " nodes");
  TwoNodeParams out{net.node(0).default_vuln, net.node(1).default_vuln,
                    net.effective_alpha(0, 1), net.effective_alpha(1, 0), p.gamma, p.theta};
  out.validate();
  return out;
}

double objective_simple(const TwoNodeParams& p, double z1, double z2) {
  p.validate();
  const double b1 = log_p(p.v1) - investment_log(p, z1);
  const double b2 = log_p(p.v2) - investment_log(p, z2);
  return two_node_sum(b1, b2, p.alpha12, p.alpha21);
}

double objective_two_stage(const TwoNodeParams& p, double z1, double z2) {
  p.validate();
  const double l1 = log_p(p.v1);
  const double l2 = log_p(p.v2);
  const double k1 = 1.0 + l1 * p.alpha21 + (p.alpha21 - 1.0) * l1 * l2;
  const double k2 = 1.0 + l2 * p.alpha12 + (p.alpha12 - 1.0) * l1 * l2;
  const double k = 1.0 - (p.alpha21 - 1.0) * (p.alpha12 - 1.0) * l1 * l2;
  if (std::abs(k) < 1e-12) {
    throw Error(ErrorCode::DegenerateDenominator, "two-stage coefficient k vanishes");
  }
  if (!(k1 / k > 0.0) || !(k2 / k > 0.0)) {
    throw Error(ErrorCode::OutOfRange, "k_i / k must be positive to take its logarithm");
  }
  const double b1 = std::log(k1 / k) - investment_log(p, z1);
  const double b2 = std::log(k2 / k) - investment_log(p, z2);
  return two_node_sum(b1, b2, p.alpha12, p.alpha21);
}

}  // namespace vulnprop
