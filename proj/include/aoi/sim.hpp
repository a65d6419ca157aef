#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "aoi/policies.hpp"

namespace aoi {

/// One simulation run: scheduler/sampler pair, service law, penalty, horizon.
struct SimConfig {
  std::size_t m = 1;
  SchedulerKind scheduler = SchedulerKind::maf;
  SamplerSpec sampler;
  ServiceModel service = ServiceModel::iid({1}, {1.0});
  PenaltyFunction g = PenaltyFunction::linear();
  TimeGrid grid;
  std::uint64_t horizon_n = 100'000;  // total deliveries simulated
  std::optional<std::uint64_t> warmup_deliveries;  // default 10 * m
  std::uint64_t seed = 1;
  std::optional<std::vector<double>> initial_ages;  // real time, one per source
  std::size_t batches = 50;

  std::uint64_t warmup() const {
    return warmup_deliveries ? *warmup_deliveries : 10 * static_cast<std::uint64_t>(m);
  }
};

struct Metrics {
  double ta_ap = 0.0;    // accumulated penalty area / elapsed time
  double ta_apd = 0.0;   // mean pre-delivery penalty per delivered packet
  std::uint64_t deliveries = 0;
  double elapsed = 0.0;
  std::vector<double> per_source_mean_age;
  double se_ta_ap = 0.0;   // batch-means standard errors (0 when unavailable)
  double se_ta_apd = 0.0;
  std::optional<double> ci_ta_ap;   // 2 * se half-widths
  std::optional<double> ci_ta_apd;
};

/// Per-delivery record handed to an observer; mainly for tests that check
/// the bookkeeping invariants.
struct DeliveryRecord {
  std::uint64_t index = 0;   // delivery number, 1-based
  std::size_t source = 0;    // source served
  double wait = 0.0;         // real time
  double service = 0.0;      // real time
  double post_age = 0.0;     // age of the served source just after delivery
};

/// Advances the service-time Markov chain one step: samples the next chain
/// state from the current row and reports that state's service value.
inline std::pair<Tick, std::size_t> markov_service_next(std::size_t chain_state,
                                                        const ServiceModel& model,
                                                        Rng& rng) {
  const auto& rows = model.transition();
  if (chain_state >= rows.size()) throw std::out_of_range("bad chain state");
  const DiscreteSampler row(rows[chain_state]);
  const std::size_t next = row(rng);
  return {model.values()[next], next};
}

namespace detail {

/// Start the run inside the solver's recurrent class: the m-step image of
/// the all-zero age vector under zero waits and the modal service value,
/// which is (m y, ..., 2 y, y). Source 0 gets the oldest age.
inline std::vector<double> default_initial_ages(const SimConfig& cfg) {
  const auto& values = cfg.service.values();
  std::vector<double> weights;
  if (cfg.service.is_iid()) {
    weights = cfg.service.probs();
  } else {
    weights = cfg.service.initial_distribution();
  }
  std::size_t mode = 0;
  for (std::size_t i = 1; i < weights.size(); ++i) {
    if (weights[i] > weights[mode]) mode = i;
  }
  const double y = static_cast<double>(values[mode]) * cfg.grid.tick_length;
  std::vector<double> ages(cfg.m);
  for (std::size_t i = 0; i < cfg.m; ++i) {
    ages[i] = static_cast<double>(cfg.m - i) * y;
  }
  return ages;
}

inline void validate_table_sampler(const SimConfig& cfg) {
  const RviSolution& sol = *cfg.sampler.solution;
  if (sol.space->m() != cfg.m) {
    throw std::invalid_argument("solution table was solved for a different m");
  }
  if (!(sol.space->service() == cfg.service)) {
    throw std::invalid_argument("solution table was solved for a different service law");
  }
  if (sol.grid.tick_length != cfg.grid.tick_length) {
    throw std::invalid_argument("solution table uses a different tick length");
  }
  const PenaltyFunction& a = sol.g;
  const PenaltyFunction& b = cfg.g;
  const bool same = a.kind() == b.kind() && a.exp_a() == b.exp_a() &&
                    a.exp_b() == b.exp_b() && a.power_p() == b.power_p() &&
                    a.indicator_q() == b.indicator_q();
  if (!same && a.kind() != PenaltyKind::custom) {
    throw std::invalid_argument("solution table was solved for a different penalty");
  }
}

}  // namespace detail

/// Runs the delivery loop: after each delivery the sampler picks a wait, the
/// next packet is generated from the scheduler's source and served for a
/// random time, every age grows by wait + service, and the served source
/// resets to the service time. Accumulates exact per-interval penalty areas
/// and pre-delivery penalties after the warm-up. Deterministic given seed.
inline Metrics simulate(const SimConfig& cfg,
                        const std::function<void(const DeliveryRecord&)>& observer = {}) {
  if (cfg.m == 0) throw std::invalid_argument("need at least one source");
  const std::uint64_t warmup = cfg.warmup();
  if (cfg.horizon_n <= warmup) {
    throw std::invalid_argument("horizon must exceed the warm-up deliveries");
  }
  if (cfg.sampler.kind == SamplerKind::table) detail::validate_table_sampler(cfg);

  std::vector<double> ages =
      cfg.initial_ages ? *cfg.initial_ages : detail::default_initial_ages(cfg);
  if (ages.size() != cfg.m) {
    throw std::invalid_argument("initial_ages size must equal m");
  }
  for (double a : ages) {
    if (!(a >= 0.0)) throw std::invalid_argument("initial ages must be >= 0");
  }

  const Rng root(cfg.seed);
  Rng service_rng = root.split(0);
  Rng sched_rng = root.split(1);
  Rng init_rng = root.split(2);

  // service draw machinery
  const double delta = cfg.grid.tick_length;
  std::optional<DiscreteSampler> iid_sampler;
  std::size_t chain_state = 0;
  if (cfg.service.is_iid()) {
    iid_sampler.emplace(cfg.service.probs());
  } else {
    chain_state = DiscreteSampler(cfg.service.initial_distribution())(init_rng);
  }
  auto draw_service = [&]() -> double {
    if (iid_sampler) {
      return static_cast<double>(cfg.service.values()[(*iid_sampler)(service_rng)]) *
             delta;
    }
    const auto [y, next] = markov_service_next(chain_state, cfg.service, service_rng);
    chain_state = next;
    return static_cast<double>(y) * delta;
  };

  SamplerContext ctx{&cfg.g, &cfg.service, cfg.grid};

  const std::uint64_t counted = cfg.horizon_n - warmup;
  const std::size_t batches = counted >= cfg.batches && cfg.batches >= 2 ? cfg.batches : 0;
  std::vector<double> batch_area(batches, 0.0), batch_time(batches, 0.0),
      batch_pen(batches, 0.0);
  std::vector<std::uint64_t> batch_count(batches, 0);

  double total_area = 0.0, total_time = 0.0, total_pen = 0.0;
  std::vector<double> source_age_area(cfg.m, 0.0);
  std::vector<double> sorted(cfg.m);

  for (std::uint64_t i = 0; i < cfg.horizon_n; ++i) {
    sorted.assign(ages.begin(), ages.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    const double wait = sampler_wait(cfg.sampler, sorted, ctx);
    if (!(wait >= 0.0)) throw std::runtime_error("sampler produced a negative wait");
    const double service = draw_service();
    const std::size_t src = cfg.scheduler == SchedulerKind::maf
                                ? maf_pick(ages)
                                : rand_pick(cfg.m, sched_rng);
    const double gap = wait + service;

    if (i >= warmup) {
      double area = 0.0, pen = 0.0;
      for (std::size_t l = 0; l < cfg.m; ++l) {
        area += cfg.g.integral(ages[l], ages[l] + gap);
        pen += cfg.g(ages[l] + gap);
        source_age_area[l] += ages[l] * gap + 0.5 * gap * gap;
      }
      total_area += area;
      total_time += gap;
      total_pen += pen;
      if (batches) {
        const std::size_t b =
            std::min<std::size_t>(batches - 1, (i - warmup) * batches / counted);
        batch_area[b] += area;
        batch_time[b] += gap;
        batch_pen[b] += pen;
        batch_count[b] += 1;
      }
    }

    for (double& a : ages) a += gap;
    ages[src] = service;

    if (observer) {
      observer(DeliveryRecord{i + 1, src, wait, service, ages[src]});
    }
  }

  if (!(total_time > 0.0)) {
    throw std::runtime_error("no time elapsed after warm-up (all gaps were zero)");
  }

  Metrics out;
  out.deliveries = counted;
  out.elapsed = total_time;
  out.ta_ap = total_area / total_time;
  out.ta_apd = total_pen / static_cast<double>(counted);
  out.per_source_mean_age.resize(cfg.m);
  for (std::size_t l = 0; l < cfg.m; ++l) {
    out.per_source_mean_age[l] = source_age_area[l] / total_time;
  }
  if (batches) {
    double mean_ap = 0.0, mean_apd = 0.0;
    std::vector<double> r_ap(batches), r_apd(batches);
    for (std::size_t b = 0; b < batches; ++b) {
      r_ap[b] = batch_time[b] > 0.0 ? batch_area[b] / batch_time[b] : 0.0;
      r_apd[b] = batch_count[b] > 0 ? batch_pen[b] / static_cast<double>(batch_count[b])
                                    : 0.0;
      mean_ap += r_ap[b];
      mean_apd += r_apd[b];
    }
    mean_ap /= static_cast<double>(batches);
    mean_apd /= static_cast<double>(batches);
    double var_ap = 0.0, var_apd = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      var_ap += (r_ap[b] - mean_ap) * (r_ap[b] - mean_ap);
      var_apd += (r_apd[b] - mean_apd) * (r_apd[b] - mean_apd);
    }
    var_ap /= static_cast<double>(batches - 1);
    var_apd /= static_cast<double>(batches - 1);
    out.se_ta_ap = std::sqrt(var_ap / static_cast<double>(batches));
    out.se_ta_apd = std::sqrt(var_apd / static_cast<double>(batches));
    out.ci_ta_ap = 2.0 * out.se_ta_ap;
    out.ci_ta_apd = 2.0 * out.se_ta_apd;
  }
  return out;
}

}  // namespace aoi
