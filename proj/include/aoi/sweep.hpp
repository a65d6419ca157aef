#pragma once

#include <atomic>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "aoi/json_io.hpp"
#include "aoi/oracle.hpp"

namespace aoi {

/// Solves for the optimal sampler with the documented defaults: the upper
/// bisection bound is the closed-form zero-wait rate for a linear penalty
/// and 1.1x a simulated zero-wait estimate otherwise.
inline RviSolution solve_with_defaults(const ServiceModel& service,
                                       const WaitingMenu& menu, std::size_t m,
                                       const PenaltyFunction& g, const TimeGrid& grid,
                                       SolverOptions options = {},
                                       std::uint64_t estimate_deliveries = 100'000,
                                       std::uint64_t estimate_seed = 7) {
  auto space = StateSpace::enumerate(service, menu, m);
  if (options.upper_init <= 0.0 && g.kind() != PenaltyKind::linear) {
    SimConfig probe;
    probe.m = m;
    probe.scheduler = SchedulerKind::maf;
    probe.sampler = SamplerSpec::zero_wait();
    probe.service = service;
    probe.g = g;
    probe.grid = grid;
    probe.horizon_n = estimate_deliveries;
    probe.seed = estimate_seed;
    options.upper_init = simulate(probe).ta_ap * 1.1;
  }
  return rvi_rc_solve(space, g, grid, options);
}

/// Memoizes solved policies across sweep points. The key covers everything
/// the solution depends on: service law, menu, m, penalty, grid, tolerances.
class SolutionCache {
 public:
  std::shared_ptr<const RviSolution> get(const ServiceModel& service,
                                         const WaitingMenu& menu, std::size_t m,
                                         const PenaltyFunction& g, const TimeGrid& grid,
                                         const SolverOptions& options) {
    json key;
    key["service"] = service_to_json(service);
    key["menu"] = menu.values();
    key["m"] = m;
    key["g"] = penalty_to_json(g);
    key["tick_length"] = grid.tick_length;
    key["eps1"] = options.eps1;
    key["eps2"] = options.eps2;
    key["upper_init"] = options.upper_init;
    const std::string k = key.dump();
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (const auto it = cache_.find(k); it != cache_.end()) return it->second;
    }
    auto sol = std::make_shared<RviSolution>(
        solve_with_defaults(service, menu, m, g, grid, options));
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.emplace(k, std::move(sol)).first->second;
  }

 private:
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<const RviSolution>> cache_;
};

struct SweepAxis {
  std::string name;                 // CSV column
  std::string path;                 // JSON pointer into the base config
  std::vector<json> values;
  std::vector<std::string> labels;  // optional display values
};

struct PolicyChoice {
  std::string scheduler;  // maf | rand
  json sampler;           // sampler entry, may request tuning or solving
};

struct ExperimentSpec {
  json base_config;
  std::vector<SweepAxis> axes;
  std::vector<PolicyChoice> policies;
  unsigned workers = 0;

  static ExperimentSpec from_json(const json& j) {
    ExperimentSpec spec;
    spec.base_config = j.at("config");
    for (const auto& a : j.value("axes", json::array())) {
      SweepAxis axis;
      axis.path = a.at("path").get<std::string>();
      axis.name = a.value("name", axis.path);
      for (const auto& v : a.at("values")) axis.values.push_back(v);
      if (a.contains("labels")) {
        axis.labels = a.at("labels").get<std::vector<std::string>>();
        if (axis.labels.size() != axis.values.size()) {
          throw std::invalid_argument("axis labels/values size mismatch");
        }
      }
      if (axis.values.empty()) throw std::invalid_argument("axis has no values");
      spec.axes.push_back(std::move(axis));
    }
    for (const auto& p : j.at("policies")) {
      spec.policies.push_back(
          {p.value("scheduler", "maf"), p.value("sampler", json{{"kind", "zero_wait"}})});
    }
    if (spec.policies.empty()) throw std::invalid_argument("no policies to sweep");
    spec.workers = j.value("workers", 0u);
    return spec;
  }
};

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

struct ResolvedSampler {
  SamplerSpec spec;
  json params;                      // as reported in the CSV
  std::optional<double> tuned_T;
};

/// Turns a sweep-level sampler entry into a concrete SamplerSpec for one
/// sweep point. constant_wait accepts c_factor (a multiple of E[Y]);
/// threshold/water_filling accept either a fixed T or "tune": true, tuned by
/// golden section over a simulated objective with a fixed seed shared across
/// candidates; rvi_rc solves (cached) with the config's menu and tolerances.
inline ResolvedSampler resolve_sampler(const json& entry, const SimConfig& point,
                                       const SolveSettings& solve, SolutionCache& cache) {
  ResolvedSampler out;
  out.params = entry;
  const std::string kind = entry.value("kind", "zero_wait");

  const auto mean_y = [&] {
    return point.service.moments().mean * point.grid.tick_length;
  };

  auto tuned_threshold = [&](bool water_filling) {
    SimConfig probe = point;
    probe.scheduler = SchedulerKind::maf;
    probe.horizon_n = entry.value("tune_deliveries", std::uint64_t{200'000});
    probe.warmup_deliveries.reset();
    probe.seed = entry.value("tune_seed", point.seed);
    probe.sampler = SamplerSpec::zero_wait();
    const double zero_wait_rate = simulate(probe).ta_ap;
    const double hi = water_filling
                          ? zero_wait_rate / static_cast<double>(point.m)
                          : zero_wait_rate;
    auto objective = [&](double T) {
      SimConfig run = probe;
      run.sampler = water_filling ? SamplerSpec::water_filling(T)
                                  : SamplerSpec::threshold_rule(T);
      return simulate(run).ta_ap;
    };
    const double tol = entry.value("tune_tol", std::max(1e-4, 1e-3 * hi));
    return tune_threshold(objective, 0.0, hi, tol);
  };

  if (kind == "constant_wait" && entry.contains("c_factor")) {
    out.spec = SamplerSpec::constant_wait(entry.at("c_factor").get<double>() * mean_y());
    out.params["c"] = out.spec.constant;
    return out;
  }
  if ((kind == "threshold" || kind == "water_filling") && entry.value("tune", false)) {
    const auto r = tuned_threshold(kind == "water_filling");
    out.spec = kind == "water_filling" ? SamplerSpec::water_filling(r.x)
                                       : SamplerSpec::threshold_rule(r.x);
    out.tuned_T = r.x;
    out.params["T"] = r.x;
    return out;
  }
  if (kind == "rvi_rc" && !entry.contains("solution_file")) {
    auto sol = cache.get(point.service, WaitingMenu(solve.menu), point.m, point.g,
                         point.grid, solve.options);
    out.spec = SamplerSpec::table(sol, entry.value("allow_fallback", true));
    return out;
  }
  out.spec = sampler_from_json(entry);
  if (kind == "threshold" || kind == "water_filling") out.tuned_T = out.spec.threshold;
  return out;
}

}  // namespace detail

inline const char* kSweepCsvColumns =
    "m,scheduler,sampler,sampler_params,threshold_T,service,g,seed,n,"
    "ta_ap,ta_apd,ci_ta_ap,elapsed,error";

/// Runs every (sweep point x policy) combination and writes one CSV row per
/// combination, in deterministic sweep order regardless of worker timing.
/// Row-level failures are recorded in the error column and counted in the
/// return value; the sweep itself keeps going.
inline std::size_t run_sweep(const ExperimentSpec& spec, std::ostream& csv,
                             std::ostream* log = nullptr) {
  std::vector<std::vector<std::size_t>> points;
  std::vector<std::size_t> cursor(spec.axes.size(), 0);
  for (bool more = true; more;) {
    points.push_back(cursor);
    more = false;
    for (std::size_t k = spec.axes.size(); k-- > 0;) {
      if (++cursor[k] < spec.axes[k].values.size()) {
        more = true;
        break;
      }
      cursor[k] = 0;
    }
  }

  struct Row {
    std::vector<std::string> coords;
    json point_config;
    const PolicyChoice* policy = nullptr;
  };
  std::vector<Row> rows;
  for (const auto& pt : points) {
    json cfg = spec.base_config;
    std::vector<std::string> coords;
    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
      const auto& axis = spec.axes[a];
      cfg[json::json_pointer(axis.path)] = axis.values[pt[a]];
      coords.push_back(axis.labels.empty() ? axis.values[pt[a]].dump()
                                           : axis.labels[pt[a]]);
    }
    for (const auto& pol : spec.policies) rows.push_back({coords, cfg, &pol});
  }

  SolutionCache cache;
  std::vector<std::string> rendered(rows.size());
  std::atomic<std::size_t> failures{0};
  std::atomic<std::size_t> next{0};

  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= rows.size()) return;
      const Row& row = rows[i];
      std::ostringstream line;
      for (const auto& c : row.coords) line << detail::csv_escape(c) << ",";
      std::string error;
      json sampler_params;
      std::optional<double> tuned_T;
      SimConfig cfg;
      Metrics metrics;
      try {
        cfg = sim_config_from_json(row.point_config);
        cfg.scheduler = scheduler_from_string(row.policy->scheduler);
        const auto solve = solve_settings_from_json(row.point_config);
        auto resolved =
            detail::resolve_sampler(row.policy->sampler, cfg, solve, cache);
        cfg.sampler = resolved.spec;
        sampler_params = resolved.params;
        tuned_T = resolved.tuned_T;
        metrics = simulate(cfg);
      } catch (const std::exception& e) {
        error = e.what();
        failures.fetch_add(1);
      }
      line << cfg.m << "," << row.policy->scheduler << ","
           << row.policy->sampler.value("kind", "zero_wait") << ","
           << detail::csv_escape(sampler_params.is_null() ? "" : sampler_params.dump())
           << "," << (tuned_T ? detail::fmt(*tuned_T) : "") << ","
           << detail::csv_escape(service_to_json(cfg.service).dump()) << ","
           << detail::csv_escape(penalty_to_json(cfg.g).dump()) << "," << cfg.seed
           << "," << cfg.horizon_n << ",";
      if (error.empty()) {
        line << detail::fmt(metrics.ta_ap) << "," << detail::fmt(metrics.ta_apd) << ","
             << (metrics.ci_ta_ap ? detail::fmt(*metrics.ci_ta_ap) : "") << ","
             << detail::fmt(metrics.elapsed) << ",";
      } else {
        line << ",,,,";
      }
      line << detail::csv_escape(error);
      rendered[i] = line.str();
    }
  };

  unsigned workers = spec.workers == 0
                         ? std::max(1u, std::thread::hardware_concurrency())
                         : spec.workers;
  workers = static_cast<unsigned>(
      std::min<std::size_t>(workers, std::max<std::size_t>(rows.size(), 1)));
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  for (const auto& axis : spec.axes) csv << detail::csv_escape(axis.name) << ",";
  csv << kSweepCsvColumns << "\n";
  for (const auto& line : rendered) csv << line << "\n";
  if (log && failures > 0) {
    *log << failures.load() << " of " << rows.size() << " rows failed\n";
  }
  return failures.load();
}

/// Zero-wait optimality report for a service law: moments, the sufficient
/// condition's right-hand side, the verdict, and the closed-form zero-wait
/// rate for a linear penalty.
inline void check_report(const ServiceModel& service, std::size_t m,
                         const TimeGrid& grid, std::ostream& out) {
  const auto mom = service.moments();
  const double ey = mom.mean * grid.tick_length;
  const double ey2 = mom.second_moment * grid.tick_length * grid.tick_length;
  const double md = static_cast<double>(m);
  const double rhs = ((md - 1.0) * ey * ey + ey2) / ((md + 1.0) * ey);
  const double y_inf = static_cast<double>(mom.y_inf) * grid.tick_length;
  const bool ok = zero_wait_sufficient(service, m);
  out << "m:                     " << m << "\n"
      << "E[Y]:                  " << ey << "\n"
      << "E[Y^2]:                " << ey2 << "\n"
      << "y_inf:                 " << y_inf << "\n"
      << "zero-wait bound rhs:   " << rhs << "\n"
      << "verdict:               "
      << (ok ? "zero-wait sampler is optimal (linear penalty)"
             : "zero-wait optimality not guaranteed")
      << "\n"
      << "zero-wait rate (linear penalty): "
      << zero_wait_ta_ap_linear(service, m, grid) << "\n";
}

}  // namespace aoi
