#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "aoi/penalty.hpp"
#include "aoi/service.hpp"

namespace aoi {

/// Water-filling wait: [T - A_s/m]^+, comparing the threshold against the
/// mean age of the state. Real time units.
inline double water_filling_wait(double age_sum, std::size_t m, double threshold) {
  if (m == 0) throw std::invalid_argument("need at least one source");
  return std::max(0.0, threshold - age_sum / static_cast<double>(m));
}

/// Threshold wait: the smallest t >= 0 with
///   E_Y[ sum_l g(a_l + t + Y) ] >= T.
/// ages are real-valued (the approximate samplers are not restricted to the
/// waiting menu). Linear penalties use the closed form
/// [(T - A_s - m E[Y]) / m]^+; otherwise the left side is non-decreasing in
/// t, so the crossing is bracketed by doubling and then bisected down to tol.
inline double threshold_wait(const std::vector<double>& ages, double threshold,
                             const PenaltyFunction& g, const ServiceModel& service,
                             const TimeGrid& grid = TimeGrid(), double tol = 1e-6,
                             double t_max = 1e6) {
  if (ages.empty()) throw std::invalid_argument("need at least one source");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  const double m = static_cast<double>(ages.size());

  if (g.kind() == PenaltyKind::linear) {
    double age_sum = 0.0;
    for (double a : ages) age_sum += a;
    const double mean_y = service.moments().mean * grid.tick_length;
    return std::max(0.0, (threshold - age_sum - m * mean_y) / m);
  }

  const auto& ys = service.values();
  const auto probs = service.is_iid() ? service.probs() : service.stationary();
  auto lhs = [&](double t) {
    double acc = 0.0;
    for (std::size_t yi = 0; yi < ys.size(); ++yi) {
      double sum = 0.0;
      for (double a : ages) {
        sum += g(a + t + static_cast<double>(ys[yi]) * grid.tick_length);
      }
      acc += probs[yi] * sum;
    }
    return acc;
  };

  if (lhs(0.0) >= threshold) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (lhs(hi) < threshold) {
    lo = hi;
    hi *= 2.0;
    if (hi > t_max) {
      throw std::runtime_error("threshold is unreachable for this penalty");
    }
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (lhs(mid) >= threshold) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

struct GoldenResult {
  double x = 0.0;
  double value = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::size_t iterations = 0;
  /// Every (argument, objective) pair probed, in evaluation order. Kept so a
  /// non-unimodal objective is visible after the fact.
  std::vector<std::pair<double, double>> evaluations;
};

/// Golden-section minimization of a deterministic scalar objective on
/// [lo, hi]. Each iteration shrinks the bracket by the golden ratio; the
/// returned point is the best probe inside the final bracket.
inline GoldenResult tune_threshold(const std::function<double(double)>& objective,
                                   double lo, double hi, double tol) {
  if (!(lo < hi)) throw std::invalid_argument("need lo < hi");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  constexpr double inv_phi = 0.6180339887498949;  // (sqrt(5) - 1) / 2

  GoldenResult r;
  r.evaluations.reserve(64);
  auto eval = [&](double x) {
    const double v = objective(x);
    if (!std::isfinite(v)) {
      throw std::runtime_error("objective returned a non-finite value");
    }
    r.evaluations.emplace_back(x, v);
    return v;
  };

  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
    ++r.iterations;
    if (r.iterations > 400) break;  // tol below fp resolution
  }
  r.bracket_lo = a;
  r.bracket_hi = b;
  if (fc <= fd) {
    r.x = c;
    r.value = fc;
  } else {
    r.x = d;
    r.value = fd;
  }
  return r;
}

}  // namespace aoi
