#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "test_util.hpp"
#include "vulnprop/propagation.hpp"
#include "vulnprop/topology.hpp"

using namespace vulnprop;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("propagation") {

TEST_CASE("exact step: alpha = 1 leaves the state unchanged") {
  const auto net = oracle::two_node(0.5, 0.5, 1.0, 1.0);
  const auto out = propagate_exact_step(net, default_state(net));
  CHECK(out.stage == Stage::Propagated);
  CHECK(out.values == std::vector<double>{0.5, 0.5});
}

TEST_CASE("exact step: alpha = 0 from a compromised neighbour") {
  std::vector<Edge> edges = {{1, 0, 0.0}};
  const auto net = build_network({{"a1", 0.5}, {"a2", 1.0}}, edges);
  const auto out = propagate_exact_step(net, default_state(net));
  CHECK(out.values[0] == 1.0);
  CHECK(out.values[1] == 1.0);
}

TEST_CASE("exact step on dense5") {
  const auto net = generate_topology({TopologyKind::Dense5, 5}, 0.5, 0.5);
  const auto out = propagate_exact_step(net, default_state(net));
  // E = 0.75^4 = 0.31640625, 0.5^E (computed independently at 30 digits)
  for (double v : out.values) CHECK(v == doctest::Approx(0.80306782820838546).epsilon(1e-14));
  CHECK(propagation_exponent(net, net.default_vulns(), 0) == 0.31640625);
}

TEST_CASE("linearized step") {
  SUBCASE("all ones stay at one") {
    const auto net = generate_topology({TopologyKind::Ring, 4}, 1.0, 0.3);
    const auto out = propagate_linearized_step(net, default_state(net));
    for (double v : out.values) CHECK(v == 1.0);
  }
  SUBCASE("two nodes") {
    std::vector<Edge> edges = {{1, 0, 0.5}};
    const auto net = build_network({{"a1", 0.5}, {"a2", 0.5}}, edges);
    const auto out = propagate_linearized_step(net, default_state(net));
    // 1 + 0.75 ln 0.5
    CHECK(out.values[0] == doctest::Approx(0.48013961458004102).epsilon(1e-14));
    CHECK(out.values[1] == doctest::Approx(1.0 + std::log(0.5)).epsilon(1e-14));
  }
  SUBCASE("clamped at zero") {
    const auto net = build_network({{"a", 0.05}}, {});
    CHECK(linear_response(0.05, 1.0) < -1.0);
    CHECK(propagate_linearized_step(net, default_state(net)).values[0] == 0.0);
  }
}

TEST_CASE("exponent matches an edge-list scan") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto net = oracle::random_network(rng, 1 + rng() % 8, 0.5);
    std::vector<double> x(net.size());
    for (double& v : x) v = oracle::uniform(rng, 0, 1);
    for (std::size_t i = 0; i < net.size(); ++i) {
      const double e = propagation_exponent(net, x, i);
      CHECK(e == doctest::Approx(oracle::exponent(net, x, i)).epsilon(1e-14));
      CHECK(e >= 0.0);
      CHECK(e <= 1.0);
    }
  }
}

TEST_CASE("0^0 is 1") { CHECK(exact_response(0.0, 0.0) == 1.0); }

TEST_CASE("two-node symmetric equilibrium") {
  const auto net = oracle::two_node(0.5, 0.5, 0.5, 0.5);
  // Independent root of x = 0.5^(1 - 0.5 x).
  const double root = oracle::bisect([](double x) { return x - std::pow(0.5, 1 - 0.5 * x); }, 0, 1);
  CHECK(root == doctest::Approx(0.61981386476138107).epsilon(1e-12));
  for (auto method : {SolveMethod::FixedPoint, SolveMethod::Newton}) {
    SolverConfig cfg;
    cfg.method = method;
    const auto eq = solve_equilibrium(net, default_state(net), cfg);
    CHECK(eq.state.stage == Stage::Propagated);
    CHECK(std::abs(eq.state.values[0] - root) < 1e-8);
    CHECK(std::abs(eq.state.values[1] - root) < 1e-8);
    CHECK(eq.residual <= cfg.tol);
    CHECK_FALSE(eq.fell_back);
  }
}

TEST_CASE("all alpha = 1 converges immediately") {
  std::mt19937_64 rng(5);
  auto net = oracle::random_network(rng, 6, 0.6).with_all_alpha(1.0);
  for (auto method : {SolveMethod::FixedPoint, SolveMethod::Newton}) {
    SolverConfig cfg;
    cfg.method = method;
    const auto eq = solve_equilibrium(net, default_state(net), cfg);
    CHECK(eq.iterations == 1);
    CHECK(eq.state.values == net.default_vulns());
  }
}

TEST_CASE("invested input yields an equilibrium-stage state") {
  const auto net = oracle::two_node(0.5, 0.5, 0.5, 0.5);
  const auto eq = solve_equilibrium(net, {Stage::Invested, {0.3, 0.4}});
  CHECK(eq.state.stage == Stage::Equilibrium);
}

TEST_CASE("solver config and input validation") {
  const auto net = oracle::two_node(0.5, 0.5, 0.5, 0.5);
  SolverConfig bad;
  bad.tol = 0.0;
  CHECK(error_code_of([&] { solve_equilibrium(net, default_state(net), bad); }) ==
        ErrorCode::InvalidArgument);
  bad = {};
  bad.max_iter = 0;
  CHECK(error_code_of([&] { solve_equilibrium(net, default_state(net), bad); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { solve_equilibrium(net, {Stage::Default, {0.5, 1.5}}); }) ==
        ErrorCode::OutOfRange);
}

TEST_CASE("fixed point reports NoConvergence") {
  const auto net = generate_topology({TopologyKind::Dense5, 5}, 0.5, 0.1);
  SolverConfig cfg;
  cfg.method = SolveMethod::FixedPoint;
  cfg.max_iter = 1;
  CHECK(error_code_of([&] { solve_equilibrium(net, default_state(net), cfg); }) ==
        ErrorCode::NoConvergence);
}

TEST_CASE("property: residual below tolerance on every converged solve") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto net = oracle::random_network(rng, 1 + rng() % 10, 0.4);
    for (auto mode : {SolveMode::Exact, SolveMode::Linearized}) {
      for (auto method : {SolveMethod::FixedPoint, SolveMethod::Newton}) {
        SolverConfig cfg;
        cfg.mode = mode;
        cfg.method = method;
        cfg.max_iter = 5000;
        const auto eq = solve_equilibrium(net, default_state(net), cfg);
        const auto g = equilibrium_residual(net, net.default_vulns(), eq.state.values, mode);
        double norm = 0.0;
        for (double v : g) norm = std::max(norm, std::abs(v));
        CHECK(norm <= cfg.tol);
        for (double v : eq.state.values) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
        }
        if (mode == SolveMode::Exact) {
          const auto gx = oracle::exact_residual(net, net.default_vulns(), eq.state.values);
          for (double v : gx) CHECK(std::abs(v) <= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("property: fixed point and Newton agree") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const auto net = oracle::random_network(rng, 2 + rng() % 7, 0.5);
    SolverConfig fp;
    fp.method = SolveMethod::FixedPoint;
    fp.max_iter = 5000;
    SolverConfig nw;
    const auto a = solve_equilibrium(net, default_state(net), fp);
    const auto b = solve_equilibrium(net, default_state(net), nw);
    CHECK(max_abs_diff(a.state.values, b.state.values) <= 10 * fp.tol);
  }
}

TEST_CASE("property: propagation never decreases vulnerability") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 300; ++trial) {
    const auto net = oracle::random_network(rng, 1 + rng() % 8, 0.5, 0.0, 1.0);
    const auto v = default_state(net);
    const auto out = propagate_exact_step(net, v);
    for (std::size_t i = 0; i < net.size(); ++i) {
      CHECK(out.values[i] >= v.values[i]);
      CHECK(out.values[i] <= 1.0);
    }
  }
}

TEST_CASE("property: Taylor remainder bound") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 2000; ++trial) {
    const double v = oracle::uniform(rng, 1e-6, 1.0);
    const double e = oracle::uniform(rng, 0.0, 1.0);
    const double t = e * std::log(v);
    CHECK(std::abs(exact_response(v, e) - linear_response(v, e)) <= t * t / 2);
  }
}

TEST_CASE("property: fixed-point iterates are non-decreasing") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const auto net = oracle::random_network(rng, 2 + rng() % 8, 0.5);
    const auto base = net.default_vulns();
    auto x = base;
    for (int it = 0; it < 50; ++it) {
      auto next = propagation_map(net, base, x, SolveMode::Exact);
      for (std::size_t i = 0; i < x.size(); ++i) CHECK(next[i] >= x[i] - 1e-15);
      x = std::move(next);
    }
  }
}

TEST_CASE("property: analytic Jacobian matches central differences") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const auto net = oracle::random_network(rng, 1 + rng() % 8, 0.5);
    const auto base = net.default_vulns();
    std::vector<double> x(net.size());
    for (double& v : x) v = oracle::uniform(rng, 0.05, 0.95);
    const auto jac = residual_jacobian(net, base, x, SolveMode::Exact);
    const auto fd = oracle::fd_jacobian(
        [&](const std::vector<double>& p) { return oracle::exact_residual(net, base, p); }, x);
    for (std::size_t i = 0; i < net.size(); ++i) {
      for (std::size_t j = 0; j < net.size(); ++j) {
        CHECK(std::abs(jac(i, j) - fd[i][j]) <= 1e-5);
      }
      CHECK(jac(i, i) == 1.0);
    }
  }
}

TEST_CASE("subset-sum Jacobian: four-node star worked example") {
  // Node 1 (index 0) linked to nodes 2, 3, 4; entry (1, 2) sums over K = {3, 4, 34}.
  const double v3 = 0.3, v4 = 0.6, a31 = 0.2, a41 = 0.7;
  std::vector<Edge> edges = {{1, 0, 0.4}, {2, 0, a31}, {3, 0, a41},
                             {0, 1, 0.5}, {0, 2, 0.5}, {0, 3, 0.5}};
  const auto net = build_network({{"a1", 0.5}, {"a2", 0.5}, {"a3", v3}, {"a4", v4}}, edges);
  const std::vector<double> v = {0.5, 0.5, v3, v4};
  const auto jac = jacobian_subset_sum(net, v);
  const double expected = 1 + v3 * (a31 - 1) + v4 * (a41 - 1) + v3 * v4 * (a31 - 1) * (a41 - 1);
  CHECK(jac(0, 1) == doctest::Approx(expected).epsilon(1e-14));
  // Leaves have node 1 as their only in-neighbour: empty sum.
  CHECK(jac(1, 0) == 1.0);
  CHECK(jac(2, 0) == 1.0);
  for (int i = 0; i < 4; ++i) CHECK(jac(i, i) == 0.0);
  // No edge 2 -> 3, no entry.
  CHECK(jac(2, 1) == 0.0);
}

TEST_CASE("property: subset-sum Jacobian subset sum equals the product form") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const auto net = oracle::random_network(rng, 2 + rng() % 7, 0.6);
    std::vector<double> v(net.size());
    for (double& x : v) x = oracle::uniform(rng, 0, 1);
    const auto jac = jacobian_subset_sum(net, v);
    for (const auto& e : net.edges()) {
      double prod = 1.0;
      for (const auto& k : net.edges()) {
        if (k.to == e.to && k.from != e.from) prod *= 1 + v[k.from] * (k.alpha - 1);
      }
      CHECK(jac(e.to, e.from) == doctest::Approx(prod).epsilon(1e-12));
    }
  }
}

TEST_CASE("subset-sum Jacobian Newton falls back on a singular matrix") {
  // Node 0 has no in-edges, so its Jacobian row is zero.
  std::vector<Edge> edges = {{0, 1, 0.3}, {1, 2, 0.4}, {2, 1, 0.6}};
  const auto net = build_network({{"a", 0.4}, {"b", 0.5}, {"c", 0.6}}, edges);
  SolverConfig cfg;
  cfg.method = SolveMethod::NewtonSubsetJacobian;
  cfg.max_iter = 2000;
  const auto eq = solve_equilibrium(net, default_state(net), cfg);
  CHECK(eq.fell_back);
  SolverConfig fp;
  fp.method = SolveMethod::FixedPoint;
  const auto ref = solve_equilibrium(net, default_state(net), fp);
  CHECK(max_abs_diff(eq.state.values, ref.state.values) < 1e-8);
  CHECK(error_code_of([] { jacobian_subset_sum(build_network({{"a", 0.5}}, {}), std::vector<double>{0.5}); }) ==
        ErrorCode::InvalidArgument);
}

}  // TEST_SUITE
