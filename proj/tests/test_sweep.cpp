#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "test_util.hpp"
#include "vulnprop/sweep.hpp"
#include "vulnprop/topology.hpp"

using namespace vulnprop;

namespace {

SweepSpec two_node_spec(SweepTargetSpec target, std::vector<double> grid) {
  SweepSpec spec;
  spec.target = target;
  spec.grid = std::move(grid);
  spec.base_net = oracle::two_node(0.5, 0.5, 0.5, 0.5);
  spec.base_params = {0.7, 2.0, 1.0};
  spec.opt_cfg.restarts = 4;
  return spec;
}

SweepResult column_result(const std::vector<double>& xs, const std::vector<double>& objectives) {
  SweepResult r;
  r.node_count = 1;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    SweepRow row;
    row.param_value = xs[k];
    row.z = {0.0};
    row.objective = objectives[k];
    r.rows.push_back(row);
  }
  return r;
}

}  // namespace

TEST_SUITE("sweep") {

TEST_CASE("grid construction") {
  const auto g = make_grid(0.4, 0.9, 0.1);
  REQUIRE(g.size() == 6);
  CHECK(g.front() == 0.4);
  CHECK(g.back() == doctest::Approx(0.9));
  CHECK(make_grid(1.0, 1.0, 0.5) == std::vector<double>{1.0});
  CHECK(make_grid(0.0, 1.0, 0.3).size() == 4);
  CHECK(error_code_of([] { make_grid(1.0, 0.0, 0.1); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { make_grid(0.0, 1.0, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("targets") {
  CHECK(parse_sweep_target("node_vuln:3") == SweepTargetSpec{SweepTarget::NodeVuln, 3});
  CHECK(parse_sweep_target("budget").kind == SweepTarget::BudgetW);
  CHECK(parse_sweep_target("alpha_ratio").kind == SweepTarget::AlphaRatioR);
  CHECK(parse_sweep_target("alpha_all").kind == SweepTarget::AlphaAll);
  CHECK(error_code_of([] { parse_sweep_target("node_vuln:"); }) == ErrorCode::ParseError);
  CHECK(error_code_of([] { parse_sweep_target("gamma"); }) == ErrorCode::ParseError);
  for (const char* text : {"node_vuln:0", "budget", "alpha_ratio", "alpha_all"}) {
    CHECK(to_string(parse_sweep_target(text)) == text);
  }
}

TEST_CASE("applying a swept value") {
  Network net = oracle::two_node(0.5, 0.5, 0.8, 0.4);
  DefenseParams p;
  apply_sweep_value({SweepTarget::AlphaRatioR, 0}, 2.0, net, p);
  CHECK(*net.alpha(0, 1) == doctest::Approx(0.8));
  CHECK(*net.alpha(1, 0) == 0.4);
  apply_sweep_value({SweepTarget::AlphaAll, 0}, 0.3, net, p);
  CHECK(*net.alpha(0, 1) == 0.3);
  CHECK(*net.alpha(1, 0) == 0.3);
  apply_sweep_value({SweepTarget::NodeVuln, 1}, 0.9, net, p);
  CHECK(net.node(1).default_vuln == 0.9);
  apply_sweep_value({SweepTarget::BudgetW, 0}, 3.0, net, p);
  CHECK(p.budget == 3.0);
  CHECK(error_code_of([&] { apply_sweep_value({SweepTarget::AlphaRatioR, 0}, 4.0, net, p); }) ==
        ErrorCode::OutOfRange);
}

TEST_CASE("spec validation") {
  CHECK(error_code_of([] { two_node_spec({SweepTarget::BudgetW, 0}, {}).validate(); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { two_node_spec({SweepTarget::BudgetW, 0}, {1.0, 1.0}).validate(); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { two_node_spec({SweepTarget::NodeVuln, 0}, {0.5, 1.5}).validate(); }) ==
        ErrorCode::OutOfRange);
  CHECK(error_code_of([] { two_node_spec({SweepTarget::NodeVuln, 2}, {0.5}).validate(); }) ==
        ErrorCode::DanglingIndex);
}

TEST_CASE("single-point sweep equals a direct optimize") {
  auto spec = two_node_spec({SweepTarget::NodeVuln, 0}, {0.5});
  const auto r = run_sweep(spec);
  REQUIRE(r.rows.size() == 1);
  const auto direct = optimize(spec.base_net, spec.base_params, spec.opt_cfg);
  CHECK(r.rows[0].z == direct.allocation.z);
  CHECK(r.rows[0].objective == direct.objective);
  CHECK(r.rows[0].converged == direct.converged);
  CHECK(r.target == "node_vuln:0");
}

TEST_CASE("investment rises with the node's own vulnerability") {
  const auto r = run_sweep(two_node_spec({SweepTarget::NodeVuln, 0}, make_grid(0.4, 0.9, 0.1)));
  CHECK(trend_check(r, {ColumnSelector::Kind::Z, 0}, TrendDirection::NonDecreasing, 0.9));
}

TEST_CASE("objective falls as the budget grows") {
  const auto r = run_sweep(two_node_spec({SweepTarget::BudgetW, 0}, make_grid(0.0, 3.0, 0.5)));
  for (std::size_t k = 1; k < r.rows.size(); ++k) {
    CHECK(r.rows[k].objective <= r.rows[k - 1].objective + 1e-9);
  }
  CHECK(trend_check(r, {ColumnSelector::Kind::Objective, 0}, TrendDirection::NonIncreasing, 0.9));
}

TEST_CASE("trend checks") {
  const std::vector<double> xs = {1, 2, 3, 4};
  const auto constant = column_result(xs, {2, 2, 2, 2});
  CHECK(trend_rho(constant, {}) == 0.0);
  CHECK_FALSE(trend_check(constant, {}, TrendDirection::NonDecreasing, 0.1));
  CHECK_FALSE(trend_check(constant, {}, TrendDirection::NonIncreasing, 0.1));
  const auto rising = column_result(xs, {0.1, 0.5, 0.7, 3.0});
  CHECK(trend_rho(rising, {}) == 1.0);
  CHECK(trend_check(rising, {}, TrendDirection::NonDecreasing, 1.0));
  CHECK(trend_rho(column_result(xs, {4, 3, 2, 1}), {}) == -1.0);
  CHECK(error_code_of([&] { trend_rho(column_result({1, 2}, {1, 2}), {}); }) == ErrorCode::TooFewRows);

  // Failed rows are skipped.
  auto with_error = column_result(xs, {1, 2, 3, 4});
  with_error.rows[1].error = "x";
  with_error.rows[2].error = "x";
  CHECK(error_code_of([&] { trend_rho(with_error, {}); }) == ErrorCode::TooFewRows);

  // Ties take average ranks: ranks of y are 1, 2.5, 2.5, 4.
  const std::vector<double> a = {1, 2, 3, 4}, b = {1, 5, 5, 9};
  CHECK(spearman_rho(a, b) == doctest::Approx(4.5 / std::sqrt(5.0 * 4.5)));
}

TEST_CASE("property: reproducible and feasible") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 4; ++trial) {
    SweepSpec spec;
    spec.base_net = oracle::random_network(rng, 4, 0.5);
    spec.base_params = {0.7, 2.0, 1.0};
    spec.opt_cfg.restarts = 2;
    spec.opt_cfg.seed = static_cast<std::uint64_t>(trial);
    spec.target = {SweepTarget::BudgetW, 0};
    spec.grid = make_grid(0.25, 1.5, 0.25);
    const auto a = run_sweep(spec);
    const auto b = run_sweep(spec);
    REQUIRE(a.rows.size() == spec.grid.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
      CHECK(a.rows[k].z == b.rows[k].z);
      CHECK(a.rows[k].objective == b.rows[k].objective);
      CHECK(a.rows[k].error.empty());
      CHECK_NOTHROW(Allocation{a.rows[k].z}.validate(spec.grid[k]));
    }
  }
}

TEST_CASE("property: with all alpha = 1 the other nodes are untouched") {
  // Sweeping v_0 leaves the other nodes' propagated vulnerabilities unchanged,
  // and identical other nodes keep identical investments at every row.
  SweepSpec spec;
  spec.base_net = generate_topology({TopologyKind::Dense5, 5}, 0.6, 1.0);
  spec.base_params = {0.7, 2.0, 1.0};
  spec.opt_cfg.restarts = 4;
  spec.target = {SweepTarget::NodeVuln, 0};
  spec.grid = make_grid(0.3, 0.9, 0.2);
  const auto r = run_sweep(spec);
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    Network net = spec.base_net;
    DefenseParams p = spec.base_params;
    apply_sweep_value(spec.target, spec.grid[k], net, p);
    const Pipeline pipe(net, p, Model::Simple, SolveMode::Exact);
    for (std::size_t j = 1; j < 5; ++j) {
      CHECK(pipe.propagated().values[j] == 0.6);
      CHECK(r.rows[k].z[j] == doctest::Approx(r.rows[k].z[1]).epsilon(1e-4).scale(1.0));
    }
  }
}

}  // TEST_SUITE
