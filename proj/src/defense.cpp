#include "vulnprop/defense.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "vulnprop/error.hpp"
#include "vulnprop/propagation.hpp"

namespace vulnprop {

double Allocation::spent() const noexcept { return std::accumulate(z.begin(), z.end(), 0.0); }

void Allocation::validate(double budget) const {
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(z[i] >= 0.0) || !std::isfinite(z[i])) {
      throw Error(ErrorCode::OutOfRange, "z_" + std::to_string(i) + " must be finite and >= 0");
    }
  }
  if (spent() > budget + kBudgetSlack) {
    throw Error(ErrorCode::OutOfRange,
                "allocation spends " + std::to_string(spent()) + " > W = " + std::to_string(budget));
  }
}

double mitigation_factor(double z, const DefenseParams& p) {
  return std::pow(p.gamma * z + 1.0, p.theta);
}

VulnState apply_investment(const VulnState& v, const Allocation& z, const DefenseParams& p) {
  p.validate();
  if (v.stage != Stage::Default && v.stage != Stage::Propagated) {
    throw Error(ErrorCode::InvalidArgument,
                "investment applies to default or propagated states, got " +
                    std::string(to_string(v.stage)));
  }
  v.validate(v.values.size());
  if (z.z.size() != v.values.size()) {
    throw Error(ErrorCode::InvalidArgument, "allocation length does not match state");
  }
  z.validate(p.budget);

  VulnState out{Stage::Invested, v.values};
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] /= mitigation_factor(z.z[i], p);
  }
  return out;
}

double sensitivity_numerator(double v, double z, const DefenseParams& p) {
  return std::log(std::max(v, kLogFloor)) - p.theta * std::log(p.gamma * z + 1.0);
}

double sensitivity_dv_dz(const Network& net, const Allocation& z, const DefenseParams& p,
                         std::size_t i) {
  p.validate();
  if (net.size() != 2 || !net.alpha(0, 1) || !net.alpha(1, 0)) {
    throw Error(ErrorCode::NotTwoNode, "sensitivity needs two nodes linked in both directions");
  }
  if (i > 1) throw Error(ErrorCode::DanglingIndex, "node " + std::to_string(i));
  if (z.z.size() != 2) throw Error(ErrorCode::InvalidArgument, "allocation must have 2 entries");

  const std::size_t o = 1 - i;
  const double a = sensitivity_numerator(net.node(i).default_vuln, z.z[i], p);
  const double b = sensitivity_numerator(net.node(o).default_vuln, z.z[o], p);
  const double a_io = *net.alpha(i, o);
  const double a_oi = *net.alpha(o, i);

  const double k_prime = b * (a_io - 1.0) * (a_oi - 1.0);
  const double k = k_prime * (b * (a_io * (a_oi - 1.0)) - a_oi);
  const double denom = (1.0 + a * k_prime) * (1.0 + a * k_prime) * (p.gamma * z.z[i] + 1.0);
  return a * p.theta * k * p.gamma / denom;
}

double optimal_z_raw(double v, const DefenseParams& p) {
  check_probability(v, "v");
  p.validate();
  return (std::pow(v, 1.0 / p.theta) - 1.0) / p.gamma;
}

double optimal_z_closed_form(double v, const DefenseParams& p) {
  return std::max(0.0, optimal_z_raw(v, p));
}

}  // namespace vulnprop
