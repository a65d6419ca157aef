#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "aoi/approx.hpp"
#include "aoi/rng.hpp"
#include "aoi/rvi.hpp"

namespace aoi {

enum class SchedulerKind { maf, rand };

enum class SamplerKind { zero_wait, constant_wait, threshold, water_filling, table };

/// A sampler policy: how long to wait after a delivery before generating the
/// next packet. All kinds are deterministic functions of the current ages.
struct SamplerSpec {
  SamplerKind kind = SamplerKind::zero_wait;
  double constant = 0.0;   // constant_wait, real time
  double threshold = 0.0;  // threshold / water_filling, real time
  double root_tol = 1e-6;  // threshold kind inner root-find
  std::shared_ptr<const RviSolution> solution;  // table kind
  /// Off-table states (possible during transient start-up) fall back to the
  /// per-state minimizer rule at beta_star: the smallest menu wait t with
  /// E_Y[sum_l g(a_l + t + Y)] >= beta_star. Disabled -> such states throw.
  bool allow_fallback = true;

  static SamplerSpec zero_wait() { return {}; }

  static SamplerSpec constant_wait(double c) {
    if (!(c >= 0.0)) throw std::invalid_argument("constant wait must be >= 0");
    SamplerSpec s;
    s.kind = SamplerKind::constant_wait;
    s.constant = c;
    return s;
  }

  static SamplerSpec threshold_rule(double T, double tol = 1e-6) {
    if (!(T >= 0.0)) throw std::invalid_argument("threshold must be >= 0");
    SamplerSpec s;
    s.kind = SamplerKind::threshold;
    s.threshold = T;
    s.root_tol = tol;
    return s;
  }

  static SamplerSpec water_filling(double T) {
    if (!(T >= 0.0)) throw std::invalid_argument("threshold must be >= 0");
    SamplerSpec s;
    s.kind = SamplerKind::water_filling;
    s.threshold = T;
    return s;
  }

  static SamplerSpec table(std::shared_ptr<const RviSolution> solution,
                           bool allow_fallback = true) {
    if (!solution) throw std::invalid_argument("null solution");
    SamplerSpec s;
    s.kind = SamplerKind::table;
    s.solution = std::move(solution);
    s.allow_fallback = allow_fallback;
    return s;
  }
};

/// Index of a maximum-age source; ties go to the lowest index so runs are
/// reproducible.
inline std::size_t maf_pick(const std::vector<double>& ages) {
  if (ages.empty()) throw std::invalid_argument("no sources");
  std::size_t best = 0;
  for (std::size_t i = 1; i < ages.size(); ++i) {
    if (ages[i] > ages[best]) best = i;
  }
  return best;
}

/// Uniformly random source index.
inline std::size_t rand_pick(std::size_t m, Rng& rng) {
  if (m == 0) throw std::invalid_argument("no sources");
  return static_cast<std::size_t>(rng.bounded(m));
}

struct SamplerContext {
  const PenaltyFunction* g = nullptr;
  const ServiceModel* service = nullptr;
  TimeGrid grid;
};

namespace detail {

inline double table_wait(const SamplerSpec& spec, const std::vector<double>& ages,
                         const SamplerContext& ctx) {
  const RviSolution& sol = *spec.solution;
  const double delta = sol.grid.tick_length;
  std::vector<Tick> ticks(ages.size());
  bool on_grid = true;
  for (std::size_t i = 0; i < ages.size(); ++i) {
    const double scaled = ages[i] / delta;
    ticks[i] = static_cast<Tick>(std::llround(scaled));
    if (std::abs(scaled - static_cast<double>(ticks[i])) > 1e-6) on_grid = false;
  }
  if (on_grid) {
    if (const auto z = sol.try_wait_for(SystemState(ticks))) {
      return static_cast<double>(*z) * delta;
    }
  }
  if (!spec.allow_fallback) {
    throw std::runtime_error("state is outside the solved table and fallback is off");
  }
  // Smallest menu wait whose expected pre-delivery penalty reaches beta_star.
  const ServiceModel& service = sol.space->service();
  const auto& ys = service.values();
  const auto& ps = service.probs();
  for (Tick z : sol.space->menu().values()) {
    double lhs = 0.0;
    for (std::size_t yi = 0; yi < ys.size(); ++yi) {
      double sum = 0.0;
      for (double a : ages) {
        sum += sol.g(a + static_cast<double>(z + ys[yi]) * delta);
      }
      lhs += ps[yi] * sum;
    }
    if (lhs >= sol.beta_star) return static_cast<double>(z) * delta;
  }
  (void)ctx;
  return static_cast<double>(sol.space->menu().max()) * delta;
}

}  // namespace detail

/// Wait prescribed by the sampler for the current (real-valued) ages, in
/// real time. Deterministic for every kind.
inline double sampler_wait(const SamplerSpec& spec, const std::vector<double>& ages,
                           const SamplerContext& ctx) {
  switch (spec.kind) {
    case SamplerKind::zero_wait:
      return 0.0;
    case SamplerKind::constant_wait:
      return spec.constant;
    case SamplerKind::threshold:
      return threshold_wait(ages, spec.threshold, *ctx.g, *ctx.service, ctx.grid,
                            spec.root_tol);
    case SamplerKind::water_filling: {
      double age_sum = 0.0;
      for (double a : ages) age_sum += a;
      return water_filling_wait(age_sum, ages.size(), spec.threshold);
    }
    case SamplerKind::table:
      return detail::table_wait(spec, ages, ctx);
  }
  throw std::logic_error("unreachable sampler kind");
}

inline const char* to_string(SchedulerKind k) {
  return k == SchedulerKind::maf ? "maf" : "rand";
}

inline const char* to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::zero_wait: return "zero_wait";
    case SamplerKind::constant_wait: return "constant_wait";
    case SamplerKind::threshold: return "threshold";
    case SamplerKind::water_filling: return "water_filling";
    case SamplerKind::table: return "rvi_rc";
  }
  return "?";
}

}  // namespace aoi
