#include "vulnprop/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vulnprop/error.hpp"

namespace vulnprop {
namespace {

double inf_norm(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double safe_log(double p) { return std::log(std::max(p, kLogFloor)); }

void clamp_unit(std::vector<double>& x) {
  for (double& v : x) v = std::clamp(v, 0.0, 1.0);
}

Stage propagated_stage(Stage in) {
  return (in == Stage::Default || in == Stage::Propagated) ? Stage::Propagated
                                                          : Stage::Equilibrium;
}

// prod over in-edges k != skip of (x_k alpha_ki + 1 - x_k)
double exponent_without(const Network& net, std::span<const double> x, std::size_t i,
                        std::size_t skip) {
  double e = 1.0;
  for (const auto& edge : net.in_edges(i)) {
    if (edge.source == skip) continue;
    const double xj = x[edge.source];
    e *= 1.0 - xj * (1.0 - edge.alpha);
  }
  return e;
}

// Solves J dx = g; false when J is singular or the solution is not finite.
bool newton_direction(const JacobianMatrix& jac, const std::vector<double>& g,
                      std::vector<double>& dx) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
  if (!lu.isInvertible()) return false;
  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(g.data(), n);
  Eigen::VectorXd sol = lu.solve(rhs);
  if (!sol.allFinite()) return false;
  dx.assign(sol.data(), sol.data() + n);
  return true;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be > 0");
  if (max_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_iter must be >= 1");
  if (!(damping > 0.0 && damping < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "damping must lie in (0, 1)");
  }
}

double propagation_exponent(const Network& net, std::span<const double> x, std::size_t i) {
  return exponent_without(net, x, i, net.size());
}

double exact_response(double base, double exponent) { return std::pow(base, exponent); }

double linear_response(double base, double exponent) { return 1.0 + exponent * safe_log(base); }

std::vector<double> propagation_map(const Network& net, std::span<const double> base,
                                    std::span<const double> x, SolveMode mode) {
  const std::size_t n = net.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = propagation_exponent(net, x, i);
    out[i] = mode == SolveMode::Exact ? exact_response(base[i], e)
                                      : std::clamp(linear_response(base[i], e), 0.0, 1.0);
  }
  return out;
}

std::vector<double> equilibrium_residual(const Network& net, std::span<const double> base,
                                         std::span<const double> x, SolveMode mode) {
  auto g = propagation_map(net, base, x, mode);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = x[i] - g[i];
  return g;
}

JacobianMatrix residual_jacobian(const Network& net, std::span<const double> base,
                                 std::span<const double> x, SolveMode mode) {
  const std::size_t n = net.size();
  JacobianMatrix jac = JacobianMatrix::Identity(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double log_base = safe_log(base[i]);
    const double e = propagation_exponent(net, x, i);
    // d(response)/dE
    double outer = 0.0;
    if (mode == SolveMode::Exact) {
      outer = exact_response(base[i], e) * log_base;
    } else if (linear_response(base[i], e) > 0.0) {
      outer = log_base;
    }
    if (outer == 0.0) continue;
    for (const auto& edge : net.in_edges(i)) {
      const double de = (edge.alpha - 1.0) * exponent_without(net, x, i, edge.source);
      jac(i, edge.source) = -outer * de;
    }
  }
  return jac;
}

VulnState propagate_exact_step(const Network& net, const VulnState& v) {
  v.validate(net.size());
  return {propagated_stage(v.stage), propagation_map(net, v.values, v.values, SolveMode::Exact)};
}

VulnState propagate_linearized_step(const Network& net, const VulnState& v) {
  v.validate(net.size());
  return {propagated_stage(v.stage),
          propagation_map(net, v.values, v.values, SolveMode::Linearized)};
}

EquilibriumResult solve_equilibrium(const Network& net, const VulnState& v0,
                                    const SolverConfig& cfg) {
  cfg.validate();
  v0.validate(net.size());
  const auto& base = v0.values;
  const Stage out_stage = propagated_stage(v0.stage);

  EquilibriumResult result;
  std::vector<double> x = base;

  if (cfg.method == SolveMethod::FixedPoint) {
    for (int it = 1; it <= cfg.max_iter; ++it) {
      auto next = propagation_map(net, base, x, cfg.mode);
      double step = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) step = std::max(step, std::abs(next[i] - x[i]));
      // `step` is the residual at x.
      if (step <= cfg.tol) {
        result.state = {out_stage, std::move(x)};
        result.iterations = it;
        result.residual = step;
        return result;
      }
      x = std::move(next);
    }
    throw Error(ErrorCode::NoConvergence,
                "fixed-point iteration exceeded " + std::to_string(cfg.max_iter) + " iterations");
  }

  auto g = equilibrium_residual(net, base, x, cfg.mode);
  double norm = inf_norm(g);
  // After a failed Newton line search, plain fixed-point steps run until the
  // residual halves relative to the best seen; the map is order-preserving, so
  // this phase makes progress where the clamp kinks mislead Newton.
  double best = norm;
  bool fixed_point_phase = false;
  std::vector<double> dx;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    std::vector<double> trial(x.size());
    bool have_step = false;

    if (!result.fell_back && !fixed_point_phase) {
      const JacobianMatrix jac = cfg.method == SolveMethod::NewtonSubsetJacobian
                                     ? jacobian_subset_sum(net, x)
                                     : residual_jacobian(net, base, x, cfg.mode);
      if (newton_direction(jac, g, dx)) {
        double t = 1.0;
        for (int halving = 0; halving <= 30; ++halving, t *= cfg.damping) {
          for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] - t * dx[i];
          clamp_unit(trial);
          auto trial_g = equilibrium_residual(net, base, trial, cfg.mode);
          if (inf_norm(trial_g) <= norm) {
            have_step = true;
            g = std::move(trial_g);
            break;
          }
        }
        if (!have_step) fixed_point_phase = true;
      } else {
        result.fell_back = true;
      }
    }

    if (!have_step) {
      const double w = result.fell_back ? cfg.damping : 1.0;
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] - w * g[i];
      clamp_unit(trial);
      g = equilibrium_residual(net, base, trial, cfg.mode);
    }

    x = std::move(trial);
    norm = inf_norm(g);
    if (norm <= cfg.tol) {
      result.state = {out_stage, std::move(x)};
      result.iterations = it;
      result.residual = norm;
      return result;
    }
    if (fixed_point_phase && norm <= 0.5 * best) fixed_point_phase = false;
    best = std::min(best, norm);
  }
  throw Error(ErrorCode::NoConvergence,
              "Newton iteration exceeded " + std::to_string(cfg.max_iter) + " iterations");
}

JacobianMatrix jacobian_subset_sum(const Network& net, std::span<const double> v) {
  const std::size_t n = net.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "subset-sum Jacobian needs n >= 2");
  JacobianMatrix jac = JacobianMatrix::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto in = net.in_edges(i);
    for (const auto& target : in) {
      // Terms v_k (alpha_ki - 1) for every other in-neighbour k of i.
      std::vector<double> terms;
      for (const auto& other : in) {
        if (other.source != target.source) terms.push_back(v[other.source] * (other.alpha - 1.0));
      }
      if (terms.size() > 24) {
        throw Error(ErrorCode::TooManyNodes, "node " + std::to_string(i) +
                                                 " has too many in-neighbours for subset enumeration");
      }
      double sum = 0.0;
      const std::uint32_t subsets = 1u << terms.size();
      for (std::uint32_t mask = 1; mask < subsets; ++mask) {
        double prod = 1.0;
        for (std::size_t l = 0; l < terms.size(); ++l) {
          if (mask & (1u << l)) prod *= terms[l];
        }
        sum += prod;
      }
      jac(i, target.source) = 1.0 + sum;
    }
  }
  return jac;
}

}  // namespace vulnprop
