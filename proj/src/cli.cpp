#include "vulnprop/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "vulnprop/error.hpp"
#include "vulnprop/io.hpp"
#include "vulnprop/optimizer.hpp"
#include "vulnprop/propagation.hpp"
#include "vulnprop/sweep.hpp"
#include "vulnprop/topology.hpp"

namespace vulnprop {
namespace {

const std::map<std::string, Model> kModels = {{"simple", Model::Simple},
                                              {"twostage", Model::TwoStage}};
const std::map<std::string, SolveMode> kModes = {{"exact", SolveMode::Exact},
                                                 {"linearized", SolveMode::Linearized}};
const std::map<std::string, SolveMethod> kMethods = {
    {"fixedpoint", SolveMethod::FixedPoint},
    {"newton", SolveMethod::Newton},
    {"newton-subset", SolveMethod::NewtonSubsetJacobian}};

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "bad --grid component '" + item + "'");
    }
  }
  if (parts.size() != 3) throw Error(ErrorCode::ParseError, "--grid expects start:stop:step");
  return make_grid(parts[0], parts[1], parts[2]);
}

struct OptimizerFlags {
  std::string model = "simple";
  std::string mode = "exact";
  int restarts = OptimizeConfig{}.restarts;
  std::uint64_t seed = 0;
  double step_tol = OptimizeConfig{}.step_tol;
  int max_outer_iter = OptimizeConfig{}.max_outer_iter;

  void attach(CLI::App* cmd) {
    cmd->add_option("--model", model, "simple | twostage")
        ->check(CLI::IsMember({"simple", "twostage"}));
    cmd->add_option("--mode", mode, "exact | linearized")
        ->check(CLI::IsMember({"exact", "linearized"}));
    cmd->add_option("--restarts", restarts, "random restarts besides the uniform start")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", seed, "seed for the random restarts");
    cmd->add_option("--step-tol", step_tol, "projected-gradient tolerance");
    cmd->add_option("--max-outer-iter", max_outer_iter, "descent iterations per start");
  }

  OptimizeConfig config() const {
    OptimizeConfig cfg;
    cfg.model = kModels.at(model);
    cfg.mode = kModes.at(mode);
    cfg.restarts = restarts;
    cfg.seed = seed;
    cfg.step_tol = step_tol;
    cfg.max_outer_iter = max_outer_iter;
    return cfg;
  }
};

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vulnerability propagation and defense-investment optimizer", "vulnprop"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "write a generated topology as a network file");
  std::string topology, gen_out;
  double gen_v = 0.5, gen_alpha = 0.5;
  DefenseParams gen_params;
  gen->add_option("topology", topology, "dense5 | sparse5 | utility | substation | star:N | ring:N")
      ->required();
  gen->add_option("--v", gen_v, "default vulnerability of every node");
  gen->add_option("--alpha", gen_alpha, "propagation factor of every link");
  gen->add_option("--gamma", gen_params.gamma);
  gen->add_option("--theta", gen_params.theta);
  gen->add_option("--W", gen_params.budget, "investment budget");
  gen->add_option("--out", gen_out, "output file")->required();

  // propagate
  auto* prop = app.add_subcommand("propagate", "print the equilibrium vulnerabilities as CSV");
  std::string prop_file, prop_mode = "exact", prop_method = "newton";
  SolverConfig prop_cfg;
  prop->add_option("network", prop_file)->required();
  prop->add_option("--mode", prop_mode)->check(CLI::IsMember({"exact", "linearized"}));
  prop->add_option("--method", prop_method)
      ->check(CLI::IsMember({"fixedpoint", "newton", "newton-subset"}));
  prop->add_option("--tol", prop_cfg.tol, "convergence threshold");
  prop->add_option("--max-iter", prop_cfg.max_iter);

  // optimize
  auto* opt = app.add_subcommand("optimize", "optimal investment allocation as CSV");
  std::string opt_file;
  std::optional<double> opt_budget;
  OptimizerFlags opt_flags;
  opt->add_option("network", opt_file)->required();
  opt->add_option("--W", opt_budget, "override the budget in the network file");
  opt_flags.attach(opt);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "optimize over a parameter grid, write CSV");
  std::string sweep_file, sweep_target, sweep_grid, sweep_out;
  OptimizerFlags sweep_flags;
  sweep->add_option("network", sweep_file)->required();
  sweep->add_option("--target", sweep_target, "node_vuln:I | budget | alpha_ratio | alpha_all")
      ->required();
  sweep->add_option("--grid", sweep_grid, "start:stop:step (inclusive)")->required();
  sweep->add_option("--out", sweep_out, "output CSV (default: standard output)");
  sweep_flags.attach(sweep);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (gen->parsed()) {
      const auto net = generate_topology(parse_topology(topology), gen_v, gen_alpha);
      gen_params.validate();
      write_network_file(gen_out, net, gen_params);
      err << "wrote " << net.size() << " nodes, " << net.edge_count() << " edges to " << gen_out
          << "\n";
      return kExitOk;
    }

    if (prop->parsed()) {
      const auto doc = read_network_file(prop_file);
      prop_cfg.mode = kModes.at(prop_mode);
      prop_cfg.method = kMethods.at(prop_method);
      const auto eq = solve_equilibrium(doc.network, default_state(doc.network), prop_cfg);
      write_state_csv(out, doc.network, eq.state);
      err << "converged in " << eq.iterations << " iterations, residual " << eq.residual
          << (eq.fell_back ? " (fell back to damped fixed point)" : "") << "\n";
      return kExitOk;
    }

    if (opt->parsed()) {
      auto doc = read_network_file(opt_file);
      if (opt_budget) doc.params.budget = *opt_budget;
      const auto result = optimize(doc.network, doc.params, opt_flags.config());
      SweepResult table;
      table.node_count = doc.network.size();
      table.rows.push_back({doc.params.budget, result.allocation.z, result.objective,
                            result.allocation.spent(), result.converged, {}});
      write_result_csv(out, table);
      err << "objective " << format_number(result.objective) << ", spent "
          << format_number(result.allocation.spent()) << " of W = "
          << format_number(doc.params.budget) << ", best start " << result.best_start << ", "
          << (result.converged ? "converged" : "NOT converged") << " (projected gradient "
          << format_number(result.projected_gradient_norm) << ")\n";
      return result.converged ? kExitOk : kExitNoConvergence;
    }

    if (sweep->parsed()) {
      const auto doc = read_network_file(sweep_file);
      SweepSpec spec;
      spec.target = parse_sweep_target(sweep_target);
      spec.grid = parse_grid(sweep_grid);
      spec.base_net = doc.network;
      spec.base_params = doc.params;
      spec.opt_cfg = sweep_flags.config();
      const auto result = run_sweep(spec);

      if (sweep_out.empty()) {
        write_result_csv(out, result);
      } else {
        std::ofstream file(sweep_out, std::ios::binary);
        if (!file) throw Error(ErrorCode::InvalidArgument, "cannot write '" + sweep_out + "'");
        write_result_csv(file, result);
      }
      int failed = 0, unconverged = 0;
      for (const auto& row : result.rows) {
        if (!row.error.empty()) {
          ++failed;
          err << "row " << format_number(row.param_value) << ": " << row.error << "\n";
        } else if (!row.converged) {
          ++unconverged;
        }
      }
      err << result.rows.size() << " rows, " << failed << " failed, " << unconverged
          << " not converged\n";
      return failed + unconverged == 0 ? kExitOk : kExitNoConvergence;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::NoConvergence ? kExitNoConvergence : kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace vulnprop
