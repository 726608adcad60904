#include "vulnprop/sweep.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <numeric>
#include <string>

#include "vulnprop/error.hpp"

namespace vulnprop {
namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

SweepTargetSpec parse_sweep_target(std::string_view text) {
  if (text == "budget" || text == "W") return {SweepTarget::BudgetW, 0};
  if (text == "alpha_ratio" || text == "r") return {SweepTarget::AlphaRatioR, 0};
  if (text == "alpha_all") return {SweepTarget::AlphaAll, 0};
  constexpr std::string_view prefix = "node_vuln:";
  if (text.substr(0, prefix.size()) == prefix) {
    auto digits = text.substr(prefix.size());
    std::size_t node = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), node);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty()) {
      return {SweepTarget::NodeVuln, node};
    }
  }
  throw Error(ErrorCode::ParseError, "unknown sweep target '" + std::string(text) + "'");
}

std::string to_string(const SweepTargetSpec& target) {
  switch (target.kind) {
    case SweepTarget::NodeVuln: return "node_vuln:" + std::to_string(target.node);
    case SweepTarget::BudgetW: return "budget";
    case SweepTarget::AlphaRatioR: return "alpha_ratio";
    case SweepTarget::AlphaAll: return "alpha_all";
  }
  return "unknown";
}

std::vector<double> make_grid(double start, double stop, double step) {
  if (!std::isfinite(start) || !std::isfinite(stop) || !(step > 0.0) || stop < start) {
    throw Error(ErrorCode::InvalidArgument, "grid needs finite start <= stop and step > 0");
  }
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) grid[k] = start + static_cast<double>(k) * step;
  return grid;
}

void apply_sweep_value(const SweepTargetSpec& target, double value, Network& net,
                       DefenseParams& params) {
  switch (target.kind) {
    case SweepTarget::NodeVuln:
      net = net.with_default_vuln(target.node, value);
      return;
    case SweepTarget::BudgetW:
      if (!(value >= 0.0)) throw Error(ErrorCode::OutOfRange, "W must be >= 0");
      params.budget = value;
      return;
    case SweepTarget::AlphaRatioR: {
      if (net.size() != 2) throw Error(ErrorCode::NotTwoNode, "alpha ratio sweeps need 2 nodes");
      if (!(value >= 0.0)) throw Error(ErrorCode::OutOfRange, "r must be >= 0");
      const double alpha21 = net.effective_alpha(1, 0);
      net = net.with_alpha(0, 1, value * alpha21);
      return;
    }
    case SweepTarget::AlphaAll:
      net = net.with_all_alpha(value);
      return;
  }
}

void SweepSpec::validate() const {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "sweep grid is empty");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "sweep grid must be strictly increasing");
    }
  }
  base_params.validate();
  opt_cfg.validate();
  if (target.kind == SweepTarget::NodeVuln && target.node >= base_net.size()) {
    throw Error(ErrorCode::DanglingIndex, "sweep node " + std::to_string(target.node));
  }
  if (target.kind == SweepTarget::AlphaRatioR &&
      (base_net.size() != 2 || !base_net.alpha(0, 1) || !base_net.alpha(1, 0))) {
    throw Error(ErrorCode::NotTwoNode, "alpha ratio sweeps need two nodes linked both ways");
  }
  // Range check every grid value up front.
  for (double value : grid) {
    Network net = base_net;
    DefenseParams params = base_params;
    apply_sweep_value(target, value, net, params);
  }
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  SweepResult result;
  result.node_count = spec.base_net.size();
  result.target = to_string(spec.target);
  result.seed = spec.opt_cfg.seed;
  result.timestamp = utc_timestamp();

  for (double value : spec.grid) {
    SweepRow row;
    row.param_value = value;
    try {
      Network net = spec.base_net;
      DefenseParams params = spec.base_params;
      apply_sweep_value(spec.target, value, net, params);
      auto opt = optimize(net, params, spec.opt_cfg);
      row.z = opt.allocation.z;
      row.objective = opt.objective;
      row.spent = opt.allocation.spent();
      row.converged = opt.converged;
    } catch (const Error& e) {
      row.z.assign(result.node_count, std::nan(""));
      row.objective = std::nan("");
      row.spent = std::nan("");
      row.converged = false;
      row.error = e.what();
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

double ColumnSelector::operator()(const SweepRow& row) const {
  switch (kind) {
    case Kind::Z: return row.z.at(node);
    case Kind::MeanZExcluding: {
      if (row.z.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 nodes");
      double sum = 0.0;
      for (std::size_t j = 0; j < row.z.size(); ++j) {
        if (j != node) sum += row.z[j];
      }
      return sum / static_cast<double>(row.z.size() - 1);
    }
    case Kind::Objective: return row.objective;
    case Kind::Spent: return row.spent;
  }
  return std::nan("");
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "column lengths differ");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double trend_rho(const SweepResult& result, const ColumnSelector& column) {
  std::vector<double> x, y;
  for (const auto& row : result.rows) {
    if (!row.error.empty()) continue;
    x.push_back(row.param_value);
    y.push_back(column(row));
  }
  if (x.size() < 3) throw Error(ErrorCode::TooFewRows, "trend needs at least 3 rows");
  return spearman_rho(x, y);
}

bool trend_check(const SweepResult& result, const ColumnSelector& column,
                 TrendDirection direction, double rho_min) {
  const double rho = trend_rho(result, column);
  return direction == TrendDirection::NonDecreasing ? rho >= rho_min : rho <= -rho_min;
}

}  // namespace vulnprop
