#include "vulnprop/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>

#include "vulnprop/error.hpp"

namespace vulnprop {
namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 30;

double inf_norm_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// 53-bit uniform in (0, 1]; spelled out so results do not depend on the
// standard library's distribution implementations.
double unit_open_closed(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

// Uniform point of { z >= 0, sum z <= W } via a flat Dirichlet on n + 1 parts.
std::vector<double> random_feasible(std::size_t n, double budget, std::mt19937_64& rng) {
  std::vector<double> w(n + 1);
  for (double& x : w) x = -std::log(unit_open_closed(rng));
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = budget * w[i] / total;
  return z;
}

struct Descent {
  std::vector<double> z;
  double objective = 0.0;
  bool converged = false;
  double pg_norm = 0.0;
};

double projected_gradient_norm(std::span<const double> z, std::span<const double> grad,
                               double budget) {
  std::vector<double> y(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) y[i] = z[i] - grad[i];
  return inf_norm_diff(z, project_capped_simplex(y, budget));
}

Descent descend(const Pipeline& pipe, std::vector<double> z, const OptimizeConfig& cfg) {
  const double budget = pipe.params().budget;
  Descent d{std::move(z), 0.0, false, 0.0};
  d.objective = pipe.objective(d.z);

  std::vector<double> trial(d.z.size()), y(d.z.size());
  for (int iter = 0; iter < cfg.max_outer_iter; ++iter) {
    const auto grad = finite_difference_gradient(pipe, d.z);
    d.pg_norm = projected_gradient_norm(d.z, grad, budget);
    if (d.pg_norm <= cfg.step_tol) {
      d.converged = true;
      return d;
    }

    bool accepted = false;
    double t = 1.0;
    for (int h = 0; h <= kMaxHalvings; ++h, t *= 0.5) {
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = d.z[i] - t * grad[i];
      trial = project_capped_simplex(y, budget);
      double decrease = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) decrease += grad[i] * (d.z[i] - trial[i]);
      const double f = pipe.objective(trial);
      if (f <= d.objective - kArmijo * decrease) {
        d.z = trial;
        d.objective = f;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  const auto grad = finite_difference_gradient(pipe, d.z);
  d.pg_norm = projected_gradient_norm(d.z, grad, budget);
  d.converged = d.pg_norm <= cfg.step_tol;
  return d;
}

bool better(double fa, std::span<const double> za, double fb, std::span<const double> zb) {
  if (fa != fb) return fa < fb;
  return std::lexicographical_compare(za.begin(), za.end(), zb.begin(), zb.end());
}

OptimizeResult finish(const Pipeline& pipe, std::vector<double> z, bool converged) {
  OptimizeResult out;
  auto eval = pipe.evaluate(z);
  out.allocation.z = std::move(z);
  out.objective = eval.objective;
  out.final_state = std::move(eval.final_state);
  out.converged = converged;
  return out;
}

}  // namespace

void OptimizeConfig::validate() const {
  if (restarts < 0) throw Error(ErrorCode::InvalidArgument, "restarts must be >= 0");
  if (!(step_tol > 0.0) || !(obj_tol > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "tolerances must be > 0");
  }
  if (max_outer_iter < 1) throw Error(ErrorCode::InvalidArgument, "max_outer_iter must be >= 1");
}

Pipeline::Pipeline(Network net, DefenseParams params, Model model, SolveMode mode)
    : net_(std::move(net)), params_(params), model_(model) {
  params_.validate();
  solver_.tol = 1e-12;
  solver_.max_iter = 500;
  solver_.mode = mode;
  solver_.method = SolveMethod::Newton;
  propagated_ = solve_equilibrium(net_, default_state(net_), solver_).state;
}

PipelineResult Pipeline::evaluate(std::span<const double> z) const {
  if (z.size() != net_.size()) {
    throw Error(ErrorCode::InvalidArgument, "allocation has " + std::to_string(z.size()) +
                                                " entries, network has " +
                                                std::to_string(net_.size()));
  }
  VulnState invested{Stage::Invested, propagated_.values};
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(z[i] >= 0.0)) throw Error(ErrorCode::OutOfRange, "z_" + std::to_string(i) + " < 0");
    invested.values[i] /= mitigation_factor(z[i], params_);
  }

  PipelineResult out;
  if (model_ == Model::Simple) {
    out.final_state = std::move(invested);
  } else {
    out.final_state = solve_equilibrium(net_, invested, solver_).state;
  }
  out.objective = std::accumulate(out.final_state.values.begin(), out.final_state.values.end(), 0.0);
  return out;
}

PipelineResult evaluate_pipeline(const Network& net, const Allocation& z, const DefenseParams& p,
                                 Model model, SolveMode mode) {
  p.validate();
  z.validate(p.budget);
  return Pipeline(net, p, model, mode).evaluate(z.z);
}

std::vector<double> project_capped_simplex(std::span<const double> y, double budget) {
  std::vector<double> z(y.size());
  double clipped_sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    z[i] = std::max(y[i], 0.0);
    clipped_sum += z[i];
  }
  if (clipped_sum <= budget) return z;

  // Sort-and-threshold projection onto { z >= 0, sum z = budget }.
  std::vector<double> u(y.begin(), y.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double prefix = 0.0, tau = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    prefix += u[j];
    const double candidate = (prefix - budget) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) tau = candidate;
  }
  for (std::size_t i = 0; i < y.size(); ++i) z[i] = std::max(y[i] - tau, 0.0);
  return z;
}

std::vector<double> finite_difference_gradient(const Pipeline& pipeline, std::span<const double> z,
                                               double h_scale) {
  std::vector<double> grad(z.size());
  std::vector<double> probe(z.begin(), z.end());
  const double f0 = pipeline.objective(z);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double h = h_scale * 1e-6 * std::max(1.0, z[i]);
    if (z[i] >= h) {
      probe[i] = z[i] + h;
      const double fp = pipeline.objective(probe);
      probe[i] = z[i] - h;
      const double fm = pipeline.objective(probe);
      grad[i] = (fp - fm) / (2.0 * h);
    } else {
      // Second-order one-sided stencil near the z_i >= 0 boundary.
      probe[i] = z[i] + h;
      const double f1 = pipeline.objective(probe);
      probe[i] = z[i] + 2.0 * h;
      const double f2 = pipeline.objective(probe);
      grad[i] = (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
    }
    probe[i] = z[i];
  }
  return grad;
}

OptimizeResult optimize(const Network& net, const DefenseParams& p, const OptimizeConfig& cfg) {
  p.validate();
  cfg.validate();
  const std::size_t n = net.size();
  const Pipeline pipe(net, p, cfg.model, cfg.mode);

  if (n == 0 || p.budget == 0.0) {
    auto out = finish(pipe, std::vector<double>(n, 0.0), true);
    return out;
  }

  std::vector<std::vector<double>> starts;
  starts.emplace_back(n, p.budget / static_cast<double>(n));
  for (int r = 0; r < cfg.restarts; ++r) {
    std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(r) + 1);
    starts.push_back(random_feasible(n, p.budget, rng));
  }

  Descent best;
  int best_start = -1;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    Descent d = descend(pipe, starts[s], cfg);
    if (best_start < 0 || better(d.objective, d.z, best.objective, best.z)) {
      best = std::move(d);
      best_start = static_cast<int>(s);
    }
  }

  auto out = finish(pipe, std::move(best.z), best.converged);
  out.restarts_used = cfg.restarts;
  out.best_start = best_start;
  out.projected_gradient_norm = best.pg_norm;
  return out;
}

OptimizeResult grid_search_oracle(const Network& net, const DefenseParams& p,
                                  const OptimizeConfig& cfg, double resolution) {
  p.validate();
  const std::size_t n = net.size();
  if (n > 3) throw Error(ErrorCode::TooManyNodes, "grid search supports at most 3 nodes");
  if (!(resolution > 0.0)) throw Error(ErrorCode::InvalidArgument, "resolution must be > 0");
  const Pipeline pipe(net, p, cfg.model, cfg.mode);

  std::vector<double> axis;
  for (std::size_t k = 0;; ++k) {
    const double value = static_cast<double>(k) * resolution;
    if (value > p.budget + 1e-12) break;
    axis.push_back(value);
  }
  if (axis.back() < p.budget - 1e-12) axis.push_back(p.budget);

  std::vector<double> z(n, 0.0), best_z(n, 0.0);
  double best_f = pipe.objective(z);
  std::vector<std::size_t> idx(n, 0);

  // Odometer over axis^n, last index fastest, so visits are lexicographic.
  std::function<void(std::size_t, double)> visit = [&](std::size_t depth, double spent) {
    if (depth == n) {
      const double f = pipe.objective(z);
      if (f < best_f) {
        best_f = f;
        best_z = z;
      }
      return;
    }
    for (double value : axis) {
      if (spent + value > p.budget + kBudgetSlack) break;
      z[depth] = value;
      visit(depth + 1, spent + value);
    }
    z[depth] = 0.0;
  };
  visit(0, 0.0);

  return finish(pipe, std::move(best_z), true);
}

}  // namespace vulnprop
