#pragma once

#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "aoi/sim.hpp"

namespace aoi {

using nlohmann::json;

inline json penalty_to_json(const PenaltyFunction& g) {
  json j{{"kind", to_string(g.kind())}};
  switch (g.kind()) {
    case PenaltyKind::exponential:
      j["a"] = g.exp_a();
      j["b"] = g.exp_b();
      break;
    case PenaltyKind::power:
      j["p"] = g.power_p();
      break;
    case PenaltyKind::indicator:
      j["q"] = g.indicator_q();
      break;
    case PenaltyKind::custom:
      throw std::invalid_argument("custom penalties cannot be serialized");
    default:
      break;
  }
  return j;
}

inline PenaltyFunction penalty_from_json(const json& j) {
  const std::string kind = j.value("kind", "linear");
  if (kind == "linear") return PenaltyFunction::linear();
  if (kind == "exponential") {
    return PenaltyFunction::exponential(j.at("a").get<double>(),
                                        j.value("b", 1.0));
  }
  if (kind == "power") return PenaltyFunction::power(j.at("p").get<double>());
  if (kind == "stair") return PenaltyFunction::stair();
  if (kind == "indicator") return PenaltyFunction::indicator(j.at("q").get<double>());
  throw std::invalid_argument("unknown penalty kind: " + kind);
}

inline json service_to_json(const ServiceModel& s) {
  json j;
  j["values"] = s.values();
  if (s.is_iid()) {
    j["kind"] = "iid";
    j["probs"] = s.probs();
  } else {
    j["kind"] = "markov";
    j["transition"] = s.transition();
    j["initial"] = s.initial_distribution();
  }
  return j;
}

inline ServiceModel service_from_json(const json& j) {
  const std::string kind = j.value("kind", "iid");
  auto values = j.at("values").get<std::vector<Tick>>();
  if (kind == "iid") {
    return ServiceModel::iid(std::move(values),
                             j.at("probs").get<std::vector<double>>());
  }
  if (kind == "markov") {
    std::optional<std::vector<double>> initial;
    if (j.contains("initial")) initial = j.at("initial").get<std::vector<double>>();
    return ServiceModel::markov(
        std::move(values), j.at("transition").get<std::vector<std::vector<double>>>(),
        std::move(initial));
  }
  throw std::invalid_argument("unknown service kind: " + kind);
}

inline SchedulerKind scheduler_from_string(const std::string& s) {
  if (s == "maf") return SchedulerKind::maf;
  if (s == "rand") return SchedulerKind::rand;
  throw std::invalid_argument("unknown scheduler: " + s);
}

// ---------------------------------------------------------------------------
// Solved-policy files
// ---------------------------------------------------------------------------

inline constexpr const char* kSolutionFormat = "aoi-rvi-solution";
inline constexpr int kSolutionVersion = 1;

inline json solution_to_json(const RviSolution& sol) {
  json j;
  j["format"] = kSolutionFormat;
  j["version"] = kSolutionVersion;
  j["m"] = sol.space->m();
  j["tick_length"] = sol.grid.tick_length;
  j["g"] = penalty_to_json(sol.g);
  j["service"] = service_to_json(sol.space->service());
  j["menu"] = sol.space->menu().values();
  j["beta_star"] = sol.beta_star;
  j["eps1"] = sol.eps1;
  j["eps2"] = sol.eps2;
  json states = json::array();
  for (const auto& s : sol.space->states()) states.push_back(s.ages());
  j["states"] = std::move(states);
  j["policy"] = sol.policy;
  j["h"] = sol.h;
  return j;
}

inline RviSolution solution_from_json(const json& j) {
  if (j.value("format", "") != kSolutionFormat) {
    throw std::invalid_argument("not a solution file");
  }
  if (j.value("version", 0) != kSolutionVersion) {
    throw std::invalid_argument("unsupported solution file version");
  }
  const auto m = j.at("m").get<std::size_t>();
  std::vector<SystemState> states;
  for (const auto& ages : j.at("states")) {
    states.emplace_back(ages.get<std::vector<Tick>>());
  }
  RviSolution sol;
  sol.space = std::make_shared<StateSpace>(StateSpace::from_states(
      service_from_json(j.at("service")),
      WaitingMenu(j.at("menu").get<std::vector<Tick>>()), m, std::move(states)));
  sol.g = penalty_from_json(j.at("g"));
  sol.grid = TimeGrid(j.at("tick_length").get<double>());
  sol.beta_star = j.at("beta_star").get<double>();
  sol.eps1 = j.value("eps1", 0.0);
  sol.eps2 = j.value("eps2", 0.0);
  sol.policy = j.at("policy").get<std::vector<Tick>>();
  sol.h = j.at("h").get<std::vector<double>>();
  if (sol.policy.size() != sol.space->size() || sol.h.size() != sol.space->size()) {
    throw std::invalid_argument("solution table size mismatch");
  }
  for (Tick z : sol.policy) {
    if (!sol.space->menu().contains(z)) {
      throw std::invalid_argument("solution policy wait is not on the menu");
    }
  }
  return sol;
}

inline void save_solution(const RviSolution& sol, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << solution_to_json(sol).dump(2) << "\n";
}

inline RviSolution load_solution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  json j;
  in >> j;
  return solution_from_json(j);
}

// ---------------------------------------------------------------------------
// Simulation / solver configs
// ---------------------------------------------------------------------------

struct SolveSettings {
  std::vector<Tick> menu{0};
  SolverOptions options;
};

inline json sampler_to_json(const SamplerSpec& s) {
  json j{{"kind", to_string(s.kind)}};
  switch (s.kind) {
    case SamplerKind::constant_wait:
      j["c"] = s.constant;
      break;
    case SamplerKind::threshold:
      j["T"] = s.threshold;
      j["tol"] = s.root_tol;
      break;
    case SamplerKind::water_filling:
      j["T"] = s.threshold;
      break;
    case SamplerKind::table:
      j["allow_fallback"] = s.allow_fallback;
      break;
    default:
      break;
  }
  return j;
}

inline json sim_config_to_json(const SimConfig& cfg) {
  json j;
  j["m"] = cfg.m;
  j["scheduler"] = to_string(cfg.scheduler);
  j["sampler"] = sampler_to_json(cfg.sampler);
  j["service"] = service_to_json(cfg.service);
  j["g"] = penalty_to_json(cfg.g);
  j["tick_length"] = cfg.grid.tick_length;
  j["horizon_n"] = cfg.horizon_n;
  j["warmup_deliveries"] = cfg.warmup();
  j["seed"] = cfg.seed;
  if (cfg.initial_ages) j["initial_ages"] = *cfg.initial_ages;
  j["batches"] = cfg.batches;
  return j;
}

/// Parses the non-sampler parts of a run config. The sampler entry may need
/// solver work (rvi_rc) or tuning, which the sweep layer owns; plain kinds
/// can be resolved here via sampler_from_json.
inline SimConfig sim_config_from_json(const json& j) {
  SimConfig cfg;
  cfg.m = j.value("m", std::size_t{1});
  cfg.scheduler = scheduler_from_string(j.value("scheduler", "maf"));
  cfg.service = service_from_json(j.at("service"));
  cfg.g = j.contains("g") ? penalty_from_json(j.at("g")) : PenaltyFunction::linear();
  cfg.grid = TimeGrid(j.value("tick_length", 1.0));
  cfg.horizon_n = j.value("horizon_n", std::uint64_t{100000});
  if (j.contains("warmup_deliveries")) {
    cfg.warmup_deliveries = j.at("warmup_deliveries").get<std::uint64_t>();
  }
  cfg.seed = j.value("seed", std::uint64_t{1});
  if (j.contains("initial_ages")) {
    cfg.initial_ages = j.at("initial_ages").get<std::vector<double>>();
  }
  cfg.batches = j.value("batches", std::size_t{50});
  return cfg;
}

/// Resolves a sampler entry that does not require solving or tuning.
/// kinds: zero_wait | constant_wait | threshold | water_filling | rvi_rc
/// (rvi_rc only with an explicit "solution_file").
inline SamplerSpec sampler_from_json(const json& j) {
  const std::string kind = j.value("kind", "zero_wait");
  if (kind == "zero_wait") return SamplerSpec::zero_wait();
  if (kind == "constant_wait") return SamplerSpec::constant_wait(j.at("c").get<double>());
  if (kind == "threshold") {
    return SamplerSpec::threshold_rule(j.at("T").get<double>(), j.value("tol", 1e-6));
  }
  if (kind == "water_filling") return SamplerSpec::water_filling(j.at("T").get<double>());
  if (kind == "rvi_rc") {
    if (!j.contains("solution_file")) {
      throw std::invalid_argument(
          "rvi_rc sampler needs a solution_file here (sweeps can solve inline)");
    }
    auto sol = std::make_shared<RviSolution>(
        load_solution(j.at("solution_file").get<std::string>()));
    return SamplerSpec::table(std::move(sol), j.value("allow_fallback", true));
  }
  throw std::invalid_argument("unknown sampler kind: " + kind);
}

inline SolveSettings solve_settings_from_json(const json& j) {
  SolveSettings s;
  if (j.contains("menu")) s.menu = j.at("menu").get<std::vector<Tick>>();
  const json solver = j.value("solver", json::object());
  s.options.eps1 = solver.value("eps1", 0.0);
  s.options.eps2 = solver.value("eps2", 0.0);
  s.options.upper_init = solver.value("upper_init", 0.0);
  s.options.shortcut = solver.value("shortcut", true);
  s.options.max_inner_iterations = solver.value("max_inner_iterations", std::size_t{100000});
  s.options.damping = solver.value("damping", 0.0);
  s.options.auto_damping = solver.value("auto_damping", true);
  s.options.workers = solver.value("workers", 1u);
  return s;
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  json j;
  in >> j;
  return j;
}

}  // namespace aoi
