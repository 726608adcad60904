#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vulnprop/network.hpp"
#include "vulnprop/optimizer.hpp"

namespace vulnprop {

enum class SweepTarget { NodeVuln, BudgetW, AlphaRatioR, AlphaAll };

struct SweepTargetSpec {
  SweepTarget kind = SweepTarget::BudgetW;
  std::size_t node = 0;  // NodeVuln only

  bool operator==(const SweepTargetSpec&) const = default;
};

/// "node_vuln:I", "budget", "alpha_ratio", "alpha_all".
SweepTargetSpec parse_sweep_target(std::string_view text);
std::string to_string(const SweepTargetSpec& target);

struct SweepSpec {
  SweepTargetSpec target;
  std::vector<double> grid;
  Network base_net;
  DefenseParams base_params;
  OptimizeConfig opt_cfg;

  void validate() const;
};

struct SweepRow {
  double param_value = 0.0;
  std::vector<double> z;
  double objective = 0.0;
  double spent = 0.0;
  bool converged = false;
  std::string error;  // non-empty when the row failed
};

struct SweepResult {
  std::size_t node_count = 0;
  std::vector<SweepRow> rows;
  std::string target;
  std::uint64_t seed = 0;
  std::string timestamp;  // ISO-8601 UTC; not part of any reproducibility check
};

/// Inclusive grid start, start + step, ..., stop (with 1e-9 slack).
std::vector<double> make_grid(double start, double stop, double step);

/// Applies the swept value to copies of the base network and parameters.
void apply_sweep_value(const SweepTargetSpec& target, double value, Network& net,
                       DefenseParams& params);

/// One optimize() per grid point, all with the same seed. Row failures are
/// recorded in SweepRow::error and do not stop the sweep.
SweepResult run_sweep(const SweepSpec& spec);

struct ColumnSelector {
  enum class Kind { Z, MeanZExcluding, Objective, Spent };
  Kind kind = Kind::Objective;
  std::size_t node = 0;

  double operator()(const SweepRow& row) const;
};

enum class TrendDirection { NonDecreasing, NonIncreasing };

/// Spearman rank correlation with average ranks for ties; 0 when either
/// column is constant.
double spearman_rho(std::span<const double> x, std::span<const double> y);

/// Spearman rho of the selected column against param_value over rows that
/// did not fail. Throws TooFewRows with fewer than 3 such rows.
double trend_rho(const SweepResult& result, const ColumnSelector& column);

bool trend_check(const SweepResult& result, const ColumnSelector& column,
                 TrendDirection direction, double rho_min);

}  // namespace vulnprop
