// aoi: solve, simulate and sweep multi-source age-of-information policies.
//
// Subcommands:
//   solve     enumerate the state space and solve for the optimal sampler
//   simulate  run one scheduler/sampler configuration
//   sweep     run an experiment spec and emit a CSV
//   oracle    exhaustive stationary-policy search on a tiny instance
//   check     zero-wait optimality report for a service law
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "aoi/aoi.hpp"

namespace {

aoi::json load_config(const std::string& path) { return aoi::load_json_file(path); }

void apply_override(aoi::json& cfg, const std::string& pointer, const aoi::json& value) {
  cfg[aoi::json::json_pointer(pointer)] = value;
}

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;  // pointer=json overrides
  bool dump_config = false;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config_path, "JSON config file")->required();
    app->add_option("--set", sets,
                    "Override a config entry, e.g. --set /seed=42 or "
                    "--set /service/probs=[0.5,0.5]");
    app->add_flag("--dump-config", dump_config,
                  "Print the effective config JSON and exit");
  }

  aoi::json load() const {
    aoi::json cfg = load_config(config_path);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        throw CLI::ValidationError("--set expects /pointer=value: " + s);
      }
      apply_override(cfg, s.substr(0, eq), aoi::json::parse(s.substr(eq + 1)));
    }
    return cfg;
  }
};

int cmd_solve(const CommonArgs& common, const std::string& out_path) {
  aoi::json cfg = common.load();
  if (common.dump_config) {
    std::cout << cfg.dump(2) << "\n";
    return 0;
  }
  const auto sim = aoi::sim_config_from_json(cfg);
  const auto settings = aoi::solve_settings_from_json(cfg);
  const auto sol = aoi::solve_with_defaults(sim.service, aoi::WaitingMenu(settings.menu),
                                            sim.m, sim.g, sim.grid, settings.options);
  std::cerr << "states: " << sol.space->size()
            << "  beta_star: " << sol.beta_star
            << "  inner iterations: " << sol.total_inner_iterations << "\n";
  if (!out_path.empty()) {
    aoi::save_solution(sol, out_path);
    std::cerr << "wrote " << out_path << "\n";
  } else {
    std::cout << aoi::solution_to_json(sol).dump(2) << "\n";
  }
  return 0;
}

int cmd_simulate(const CommonArgs& common) {
  aoi::json cfg = common.load();
  if (common.dump_config) {
    std::cout << cfg.dump(2) << "\n";
    return 0;
  }
  auto sim = aoi::sim_config_from_json(cfg);
  sim.sampler = aoi::sampler_from_json(cfg.value("sampler", aoi::json{{"kind", "zero_wait"}}));
  const auto metrics = aoi::simulate(sim);
  std::cout << "m,scheduler,sampler,service,g,seed,n,ta_ap,ta_apd,ci_ta_ap,elapsed\n";
  std::cout << sim.m << "," << aoi::to_string(sim.scheduler) << ","
            << aoi::to_string(sim.sampler.kind) << ","
            << aoi::detail::csv_escape(aoi::service_to_json(sim.service).dump()) << ","
            << aoi::detail::csv_escape(aoi::penalty_to_json(sim.g).dump()) << ","
            << sim.seed << "," << sim.horizon_n << "," << metrics.ta_ap << ","
            << metrics.ta_apd << ","
            << (metrics.ci_ta_ap ? std::to_string(*metrics.ci_ta_ap) : "") << ","
            << metrics.elapsed << "\n";
  return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_path,
              unsigned workers) {
  auto spec = aoi::ExperimentSpec::from_json(load_config(spec_path));
  if (workers != 0) spec.workers = workers;
  std::size_t failures = 0;
  if (out_path.empty() || out_path == "-") {
    failures = aoi::run_sweep(spec, std::cout, &std::cerr);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    failures = aoi::run_sweep(spec, out, &std::cerr);
    std::cerr << "wrote " << out_path << "\n";
  }
  return failures == 0 ? 0 : 2;
}

int cmd_oracle(const CommonArgs& common, std::size_t guard) {
  aoi::json cfg = common.load();
  if (common.dump_config) {
    std::cout << cfg.dump(2) << "\n";
    return 0;
  }
  const auto sim = aoi::sim_config_from_json(cfg);
  const auto settings = aoi::solve_settings_from_json(cfg);
  const auto space = aoi::StateSpace::enumerate(sim.service,
                                                aoi::WaitingMenu(settings.menu), sim.m);
  const auto best = aoi::brute_force_best(space, sim.g, sim.grid, guard);
  std::cout << "policies evaluated: " << best.evaluated << "\n";
  std::cout << "best rate: " << best.value << "\n";
  std::cout << "state -> wait (ticks)\n";
  for (std::size_t s = 0; s < space.size(); ++s) {
    std::cout << "(";
    const auto& ages = space.states()[s].ages();
    for (std::size_t i = 0; i < ages.size(); ++i) {
      std::cout << ages[i] << (i + 1 < ages.size() ? "," : "");
    }
    std::cout << ") -> " << best.policy[s] << "\n";
  }
  return 0;
}

int cmd_check(const CommonArgs& common) {
  aoi::json cfg = common.load();
  if (common.dump_config) {
    std::cout << cfg.dump(2) << "\n";
    return 0;
  }
  const auto service = aoi::service_from_json(cfg.at("service"));
  const auto m = cfg.value("m", std::size_t{1});
  const aoi::TimeGrid grid(cfg.value("tick_length", 1.0));
  aoi::check_report(service, m, grid, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-source age-of-information scheduling and sampling toolkit"};
  app.require_subcommand(1);

  CommonArgs solve_args, sim_args, oracle_args, check_args;
  std::string solve_out, sweep_spec, sweep_out;
  unsigned sweep_workers = 0;
  std::size_t oracle_guard = 1'000'000;

  auto* solve = app.add_subcommand("solve", "Solve for the optimal sampler");
  solve_args.attach(solve);
  solve->add_option("-o,--out", solve_out, "Write the solution table here");

  auto* simulate = app.add_subcommand("simulate", "Run one configuration");
  sim_args.attach(simulate);

  auto* sweep = app.add_subcommand("sweep", "Run an experiment spec, emit CSV");
  sweep->add_option("-s,--spec", sweep_spec, "Experiment spec JSON")->required();
  sweep->add_option("-o,--out", sweep_out, "CSV output path (default stdout)");
  sweep->add_option("-w,--workers", sweep_workers, "Worker threads (0 = auto)");

  auto* oracle = app.add_subcommand("oracle", "Exhaustive policy search");
  oracle_args.attach(oracle);
  oracle->add_option("--guard", oracle_guard, "Max policies to enumerate");

  auto* check = app.add_subcommand("check", "Zero-wait optimality report");
  check_args.attach(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_args, solve_out);
    if (simulate->parsed()) return cmd_simulate(sim_args);
    if (sweep->parsed()) return cmd_sweep(sweep_spec, sweep_out, sweep_workers);
    if (oracle->parsed()) return cmd_oracle(oracle_args, oracle_guard);
    if (check->parsed()) return cmd_check(check_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
