#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vulnprop/defense.hpp"
#include "vulnprop/network.hpp"
#include "vulnprop/propagation.hpp"

namespace vulnprop {

enum class Model {
  Simple,    // default -> propagate -> invest; objective sum of v_hat
  TwoStage,  // ... -> propagate again; objective sum of v_bar
};

struct OptimizeConfig {
  Model model = Model::Simple;
  SolveMode mode = SolveMode::Exact;
  int restarts = 16;
  double step_tol = 1e-6;
  double obj_tol = 1e-8;
  int max_outer_iter = 500;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PipelineResult {
  double objective = 0.0;
  VulnState final_state;
};

/// Objective of one network/parameter pair as a function of the allocation.
/// The pre-investment equilibrium does not depend on z and is solved once at
/// construction.
class Pipeline {
 public:
  Pipeline(Network net, DefenseParams params, Model model, SolveMode mode);

  /// Also accepts slightly negative entries (gamma z + 1 > 0) so that central
  /// differences can straddle the z >= 0 boundary.
  PipelineResult evaluate(std::span<const double> z) const;
  double objective(std::span<const double> z) const { return evaluate(z).objective; }

  const Network& network() const noexcept { return net_; }
  const DefenseParams& params() const noexcept { return params_; }
  const VulnState& propagated() const noexcept { return propagated_; }

 private:
  Network net_;
  DefenseParams params_;
  Model model_;
  SolverConfig solver_;
  VulnState propagated_;
};

/// Validates feasibility of z, then evaluates the pipeline.
PipelineResult evaluate_pipeline(const Network& net, const Allocation& z, const DefenseParams& p,
                                 Model model, SolveMode mode);

struct OptimizeResult {
  Allocation allocation;
  double objective = 0.0;
  VulnState final_state;
  bool converged = false;
  int restarts_used = 0;
  int best_start = 0;  // 0 is the uniform start
  double projected_gradient_norm = 0.0;
};

/// Euclidean projection onto { z >= 0, sum z <= budget }.
std::vector<double> project_capped_simplex(std::span<const double> y, double budget);

/// Central differences with h_i = h_scale * 1e-6 * max(1, z_i).
std::vector<double> finite_difference_gradient(const Pipeline& pipeline, std::span<const double> z,
                                               double h_scale = 1.0);

/// Projected gradient descent with Armijo backtracking, started from the
/// uniform allocation W/n and `restarts` random feasible points. The result
/// with the lowest objective wins, ties broken by lexicographically smaller z.
OptimizeResult optimize(const Network& net, const DefenseParams& p, const OptimizeConfig& cfg = {});

/// Exhaustive search over the grid {0, h, 2h, ..., W} per node (W appended
/// when not a multiple of h) restricted to sum z <= W. Exact grid argmin,
/// ties broken by lexicographically smaller z. Throws TooManyNodes for n > 3.
OptimizeResult grid_search_oracle(const Network& net, const DefenseParams& p,
                                  const OptimizeConfig& cfg, double resolution);

}  // namespace vulnprop
