#pragma once

#include <cmath>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <utility>

namespace aoi {

enum class PenaltyKind { linear, exponential, power, stair, indicator, custom };

namespace detail {

inline double simpson_estimate(double a, double fa, double m, double fm, double b,
                               double fb) {
  (void)m;
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double fa, double m, double fm, double b, double fb,
                               double whole, double tol, int depth, int force) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson_estimate(a, fa, lm, flm, m, fm);
  const double right = simpson_estimate(m, fm, rm, frm, b, fb);
  const double delta = left + right - whole;
  if (force <= 0 && (depth <= 0 || std::abs(delta) <= 15.0 * tol)) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1,
                          force - 1) +
         adaptive_simpson(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1,
                          force - 1);
}

/// Adaptive Simpson quadrature with absolute tolerance. The first levels are
/// always subdivided: on piecewise-constant integrands a dyadic sample can
/// line up with the jumps and make the error estimate vanish while the value
/// is wrong, so early termination cannot be trusted near the root.
inline double integrate_adaptive(const std::function<double(double)>& f, double a,
                                 double b, double tol) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = simpson_estimate(a, fa, m, fm, b, fb);
  return adaptive_simpson(f, a, fa, m, fm, b, fb, whole, tol, 60, 10);
}

}  // namespace detail

/// A non-decreasing age-penalty g on [0, inf).
///
/// Built-in shapes have closed-form point evaluation and integration; a
/// custom point-evaluator falls back to adaptive quadrature (abs tol 1e-9).
/// Monotonicity of a custom evaluator is spot-checked at construction, not
/// proven: violations set a warning flag instead of failing, since the
/// library cannot decide monotonicity for a black box.
class PenaltyFunction {
 public:
  static PenaltyFunction linear() { return PenaltyFunction(PenaltyKind::linear); }

  /// g(x) = exp(a*x) - b, a > 0.
  static PenaltyFunction exponential(double a, double b) {
    if (!(a > 0.0)) throw std::invalid_argument("exponential penalty needs a > 0");
    PenaltyFunction g(PenaltyKind::exponential);
    g.a_ = a;
    g.b_ = b;
    return g;
  }

  /// g(x) = x^p, p > 0.
  static PenaltyFunction power(double p) {
    if (!(p > 0.0)) throw std::invalid_argument("power penalty needs p > 0");
    PenaltyFunction g(PenaltyKind::power);
    g.p_ = p;
    return g;
  }

  /// g(x) = floor(x).
  static PenaltyFunction stair() { return PenaltyFunction(PenaltyKind::stair); }

  /// g(x) = 1 if x > q else 0.
  static PenaltyFunction indicator(double q) {
    if (!(q >= 0.0)) throw std::invalid_argument("indicator penalty needs q >= 0");
    PenaltyFunction g(PenaltyKind::indicator);
    g.q_ = q;
    return g;
  }

  /// Wraps an arbitrary point-evaluator.
  static PenaltyFunction custom(std::function<double(double)> f) {
    if (!f) throw std::invalid_argument("null custom penalty evaluator");
    PenaltyFunction g(PenaltyKind::custom);
    g.fn_ = std::move(f);
    g.spot_check_monotone();
    return g;
  }

  PenaltyKind kind() const { return kind_; }
  double exp_a() const { return a_; }
  double exp_b() const { return b_; }
  double power_p() const { return p_; }
  double indicator_q() const { return q_; }
  bool monotonicity_warning() const { return monotone_warning_; }

  /// g(x) for x >= 0.
  double operator()(double x) const {
    if (x < 0.0) throw std::domain_error("age-penalty argument must be >= 0");
    switch (kind_) {
      case PenaltyKind::linear:
        return x;
      case PenaltyKind::exponential:
        return std::exp(a_ * x) - b_;
      case PenaltyKind::power:
        return std::pow(x, p_);
      case PenaltyKind::stair:
        return std::floor(x);
      case PenaltyKind::indicator:
        return x > q_ ? 1.0 : 0.0;
      case PenaltyKind::custom:
        return fn_(x);
    }
    throw std::logic_error("unreachable penalty kind");
  }

  double eval(double x) const { return (*this)(x); }

  /// Integral of g over [a, b], 0 <= a <= b. Exact (antiderivative
  /// difference, including the piecewise shapes) for built-ins; adaptive
  /// Simpson for custom evaluators.
  double integral(double a, double b) const {
    if (a < 0.0 || a > b) {
      throw std::domain_error("penalty integral needs 0 <= a <= b");
    }
    if (a == b) return 0.0;
    if (kind_ == PenaltyKind::custom) {
      return detail::integrate_adaptive(fn_, a, b, quad_tol_);
    }
    return antiderivative(b) - antiderivative(a);
  }

 private:
  explicit PenaltyFunction(PenaltyKind kind) : kind_(kind) {}

  double antiderivative(double x) const {
    switch (kind_) {
      case PenaltyKind::linear:
        return 0.5 * x * x;
      case PenaltyKind::exponential:
        return std::exp(a_ * x) / a_ - b_ * x;
      case PenaltyKind::power:
        return std::pow(x, p_ + 1.0) / (p_ + 1.0);
      case PenaltyKind::stair: {
        // int_0^x floor(t) dt = x*floor(x) - floor(x)*(floor(x)+1)/2
        const double k = std::floor(x);
        return x * k - 0.5 * k * (k + 1.0);
      }
      case PenaltyKind::indicator:
        return std::max(0.0, x - q_);
      case PenaltyKind::custom:
        break;
    }
    throw std::logic_error("no closed-form antiderivative");
  }

  void spot_check_monotone() {
    double prev = fn_(0.0);
    for (int i = 1; i <= 96; ++i) {
      const double x = static_cast<double>(i) * 0.75;
      const double v = fn_(x);
      if (v < prev - 1e-12) {
        monotone_warning_ = true;
        std::cerr << "aoi: warning: custom penalty is not non-decreasing near x="
                  << x << "\n";
        break;
      }
      prev = v;
    }
  }

  PenaltyKind kind_;
  double a_ = 0.0, b_ = 0.0;  // exponential
  double p_ = 0.0;            // power
  double q_ = 0.0;            // indicator
  double quad_tol_ = 1e-9;
  bool monotone_warning_ = false;
  std::function<double(double)> fn_;
};

inline const char* to_string(PenaltyKind k) {
  switch (k) {
    case PenaltyKind::linear: return "linear";
    case PenaltyKind::exponential: return "exponential";
    case PenaltyKind::power: return "power";
    case PenaltyKind::stair: return "stair";
    case PenaltyKind::indicator: return "indicator";
    case PenaltyKind::custom: return "custom";
  }
  return "?";
}

}  // namespace aoi
