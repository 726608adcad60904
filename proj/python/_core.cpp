#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vulnprop/closedform.hpp"
#include "vulnprop/defense.hpp"
#include "vulnprop/error.hpp"
#include "vulnprop/io.hpp"
#include "vulnprop/network.hpp"
#include "vulnprop/optimizer.hpp"
#include "vulnprop/propagation.hpp"
#include "vulnprop/sweep.hpp"
#include "vulnprop/topology.hpp"

namespace py = pybind11;
using namespace vulnprop;

namespace {

Network make_network(const std::vector<std::pair<std::string, double>>& nodes,
                     const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges) {
  std::vector<Node> ns;
  for (const auto& [label, v] : nodes) ns.push_back({label, v});
  std::vector<Edge> es;
  for (const auto& [from, to, alpha] : edges) es.push_back({from, to, alpha});
  return build_network(std::move(ns), es);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Vulnerability propagation and defense investment on device networks";

  static py::handle error_type = py::exception<Error>(m, "VulnpropError", PyExc_ValueError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = error_type(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::enum_<SolveMode>(m, "SolveMode")
      .value("Exact", SolveMode::Exact)
      .value("Linearized", SolveMode::Linearized);
  py::enum_<SolveMethod>(m, "SolveMethod")
      .value("FixedPoint", SolveMethod::FixedPoint)
      .value("Newton", SolveMethod::Newton)
      .value("NewtonSubsetJacobian", SolveMethod::NewtonSubsetJacobian);
  py::enum_<Model>(m, "Model").value("Simple", Model::Simple).value("TwoStage", Model::TwoStage);
  py::enum_<Stage>(m, "Stage")
      .value("Default", Stage::Default)
      .value("Propagated", Stage::Propagated)
      .value("Invested", Stage::Invested)
      .value("Equilibrium", Stage::Equilibrium);

  py::class_<Network>(m, "Network")
      .def(py::init(&make_network), py::arg("nodes"), py::arg("edges"),
           "nodes: [(label, v)], edges: [(from, to, alpha)]")
      .def_property_readonly("size", &Network::size)
      .def_property_readonly("labels",
                             [](const Network& n) {
                               std::vector<std::string> out;
                               for (const auto& node : n.nodes()) out.push_back(node.label);
                               return out;
                             })
      .def_property_readonly("default_vulns", &Network::default_vulns)
      .def_property_readonly("edges",
                             [](const Network& n) {
                               std::vector<std::tuple<std::size_t, std::size_t, double>> out;
                               for (const auto& e : n.edges()) out.emplace_back(e.from, e.to, e.alpha);
                               return out;
                             })
      .def("alpha", &Network::alpha)
      .def("with_default_vuln", &Network::with_default_vuln)
      .def("with_alpha", &Network::with_alpha)
      .def("with_all_alpha", &Network::with_all_alpha)
      .def("__eq__", [](const Network& a, const Network& b) { return a == b; })
      .def("__len__", &Network::size);

  py::class_<DefenseParams>(m, "DefenseParams")
      .def(py::init([](double gamma, double theta, double budget) {
             DefenseParams p{gamma, theta, budget};
             p.validate();
             return p;
           }),
           py::arg("gamma") = 0.7, py::arg("theta") = 2.0, py::arg("budget") = 1.0)
      .def_readwrite("gamma", &DefenseParams::gamma)
      .def_readwrite("theta", &DefenseParams::theta)
      .def_readwrite("budget", &DefenseParams::budget)
      .def("__eq__", [](const DefenseParams& a, const DefenseParams& b) { return a == b; });

  m.def("generate_topology",
        [](const std::string& spec, double v, double alpha) { return generate_topology(parse_topology(spec), v, alpha); },
        py::arg("spec"), py::arg("v") = 0.5, py::arg("alpha") = 0.5,
        "dense5 | sparse5 | utility | substation | star:N | ring:N");

  py::class_<EquilibriumResult>(m, "EquilibriumResult")
      .def_property_readonly("values", [](const EquilibriumResult& r) { return r.state.values; })
      .def_property_readonly("stage", [](const EquilibriumResult& r) { return r.state.stage; })
      .def_readonly("iterations", &EquilibriumResult::iterations)
      .def_readonly("residual", &EquilibriumResult::residual)
      .def_readonly("fell_back", &EquilibriumResult::fell_back);

  m.def(
      "solve_equilibrium",
      [](const Network& net, std::optional<std::vector<double>> base, SolveMode mode, SolveMethod method,
         double tol, int max_iter) {
        VulnState v0 = default_state(net);
        if (base) v0.values = *base;
        SolverConfig cfg;
        cfg.mode = mode;
        cfg.method = method;
        cfg.tol = tol;
        cfg.max_iter = max_iter;
        return solve_equilibrium(net, v0, cfg);
      },
      py::arg("net"), py::arg("base") = py::none(), py::arg("mode") = SolveMode::Exact,
      py::arg("method") = SolveMethod::Newton, py::arg("tol") = 1e-9, py::arg("max_iter") = 200);

  m.def(
      "propagation_map",
      [](const Network& net, const std::vector<double>& base, const std::vector<double>& x, SolveMode mode) {
        return propagation_map(net, base, x, mode);
      },
      py::arg("net"), py::arg("base"), py::arg("x"), py::arg("mode") = SolveMode::Exact);
  m.def(
      "residual_jacobian",
      [](const Network& net, const std::vector<double>& base, const std::vector<double>& x, SolveMode mode) {
        return residual_jacobian(net, base, x, mode);
      },
      py::arg("net"), py::arg("base"), py::arg("x"), py::arg("mode") = SolveMode::Exact);

  m.def(
      "apply_investment",
      [](const std::vector<double>& v, const std::vector<double>& z, const DefenseParams& p) {
        return apply_investment({Stage::Propagated, v}, {z}, p).values;
      },
      py::arg("v"), py::arg("z"), py::arg("params"));
  m.def("optimal_z_raw", &optimal_z_raw, py::arg("v"), py::arg("params"));
  m.def("optimal_z_closed_form", &optimal_z_closed_form, py::arg("v"), py::arg("params"));

  m.def(
      "objective_simple",
      [](const Network& net, const DefenseParams& p, double z1, double z2) {
        return objective_simple(TwoNodeParams::from_network(net, p), z1, z2);
      },
      py::arg("net"), py::arg("params"), py::arg("z1"), py::arg("z2"));
  m.def(
      "objective_two_stage",
      [](const Network& net, const DefenseParams& p, double z1, double z2) {
        return objective_two_stage(TwoNodeParams::from_network(net, p), z1, z2);
      },
      py::arg("net"), py::arg("params"), py::arg("z1"), py::arg("z2"));

  m.def(
      "evaluate_pipeline",
      [](const Network& net, const std::vector<double>& z, const DefenseParams& p, Model model, SolveMode mode) {
        const auto r = evaluate_pipeline(net, {z}, p, model, mode);
        return py::make_tuple(r.objective, r.final_state.values);
      },
      py::arg("net"), py::arg("z"), py::arg("params"), py::arg("model") = Model::Simple,
      py::arg("mode") = SolveMode::Exact, "returns (objective, final values)");

  py::class_<OptimizeResult>(m, "OptimizeResult")
      .def_property_readonly("z", [](const OptimizeResult& r) { return r.allocation.z; })
      .def_property_readonly("spent", [](const OptimizeResult& r) { return r.allocation.spent(); })
      .def_readonly("objective", &OptimizeResult::objective)
      .def_property_readonly("final_values", [](const OptimizeResult& r) { return r.final_state.values; })
      .def_readonly("converged", &OptimizeResult::converged)
      .def_readonly("restarts_used", &OptimizeResult::restarts_used)
      .def_readonly("best_start", &OptimizeResult::best_start)
      .def_readonly("projected_gradient_norm", &OptimizeResult::projected_gradient_norm);

  auto make_cfg = [](Model model, SolveMode mode, int restarts, std::uint64_t seed) {
    OptimizeConfig cfg;
    cfg.model = model;
    cfg.mode = mode;
    cfg.restarts = restarts;
    cfg.seed = seed;
    return cfg;
  };
  m.def(
      "optimize",
      [make_cfg](const Network& net, const DefenseParams& p, Model model, SolveMode mode, int restarts,
                 std::uint64_t seed) { return optimize(net, p, make_cfg(model, mode, restarts, seed)); },
      py::arg("net"), py::arg("params"), py::arg("model") = Model::Simple, py::arg("mode") = SolveMode::Exact,
      py::arg("restarts") = 16, py::arg("seed") = 0);
  m.def(
      "grid_search_oracle",
      [make_cfg](const Network& net, const DefenseParams& p, double resolution, Model model, SolveMode mode) {
        return grid_search_oracle(net, p, make_cfg(model, mode, 0, 0), resolution);
      },
      py::arg("net"), py::arg("params"), py::arg("resolution"), py::arg("model") = Model::Simple,
      py::arg("mode") = SolveMode::Exact);

  m.def(
      "run_sweep",
      [make_cfg](const Network& net, const DefenseParams& p, const std::string& target, std::vector<double> grid,
                 Model model, SolveMode mode, int restarts, std::uint64_t seed) {
        SweepSpec spec;
        spec.target = parse_sweep_target(target);
        spec.grid = std::move(grid);
        spec.base_net = net;
        spec.base_params = p;
        spec.opt_cfg = make_cfg(model, mode, restarts, seed);
        const auto r = run_sweep(spec);
        py::list rows;
        for (const auto& row : r.rows) {
          py::dict d;
          d["param_value"] = row.param_value;
          d["z"] = row.z;
          d["objective"] = row.objective;
          d["spent"] = row.spent;
          d["converged"] = row.converged;
          d["error"] = row.error;
          rows.append(d);
        }
        return rows;
      },
      py::arg("net"), py::arg("params"), py::arg("target"), py::arg("grid"), py::arg("model") = Model::Simple,
      py::arg("mode") = SolveMode::Exact, py::arg("restarts") = 16, py::arg("seed") = 0,
      "target: node_vuln:I | budget | alpha_ratio | alpha_all; returns one dict per grid point");
  m.def("make_grid", &make_grid, py::arg("start"), py::arg("stop"), py::arg("step"));
  m.def("spearman_rho", [](const std::vector<double>& x, const std::vector<double>& y) { return spearman_rho(x, y); });

  m.def(
      "parse_network_file",
      [](const std::string& text) {
        auto d = parse_network_file(text);
        return py::make_tuple(d.network, d.params);
      },
      py::arg("text"), "returns (Network, DefenseParams)");
  m.def("serialize_network_file", &serialize_network_file, py::arg("net"), py::arg("params"));
  m.def("cvss_to_vulnerability", &cvss_to_vulnerability, py::arg("scores"));
}
