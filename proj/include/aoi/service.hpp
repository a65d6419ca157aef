#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

namespace aoi {

/// Ages, waits and service times live on an integer tick grid so that
/// solver states are exactly hashable; tick_length converts to real time.
using Tick = std::int64_t;

struct TimeGrid {
  double tick_length = 1.0;

  TimeGrid() = default;
  explicit TimeGrid(double len) : tick_length(len) {
    if (!(len > 0.0)) throw std::invalid_argument("tick_length must be > 0");
  }

  double to_real(Tick t) const { return static_cast<double>(t) * tick_length; }
};

struct ServiceMoments {
  double mean = 0.0;           // ticks
  double second_moment = 0.0;  // ticks^2
  Tick y_inf = 0;              // smallest support value
  Tick y_max = 0;              // largest support value
};

/// Packet service-time law: a finite i.i.d. distribution over tick counts,
/// or a finite Markov chain over tick counts (simulation only; the solver
/// rejects the Markov variant).
class ServiceModel {
 public:
  enum class Variant { iid, markov };

  static ServiceModel iid(std::vector<Tick> values, std::vector<double> probs) {
    if (values.size() != probs.size() || values.empty()) {
      throw std::invalid_argument("service values/probs size mismatch");
    }
    // sort atoms by value, drop zero-probability atoms
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    ServiceModel sm(Variant::iid);
    double total = 0.0;
    for (std::size_t i : order) {
      const Tick v = values[i];
      const double p = probs[i];
      if (v < 0) throw std::invalid_argument("service values must be >= 0 ticks");
      if (p < 0.0) throw std::invalid_argument("service probabilities must be >= 0");
      total += p;
      if (p == 0.0) continue;
      if (!sm.values_.empty() && sm.values_.back() == v) {
        throw std::invalid_argument("service values must be distinct");
      }
      sm.values_.push_back(v);
      sm.probs_.push_back(p);
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument("service probabilities must sum to 1");
    }
    if (sm.values_.empty() || sm.values_.back() == 0) {
      throw std::invalid_argument("service law needs an atom > 0 so E[Y] > 0");
    }
    return sm;
  }

  static ServiceModel markov(std::vector<Tick> values,
                             std::vector<std::vector<double>> transition,
                             std::optional<std::vector<double>> initial = {}) {
    const std::size_t n = values.size();
    if (n == 0 || transition.size() != n) {
      throw std::invalid_argument("markov service needs one transition row per value");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (values[i] < 0) throw std::invalid_argument("service values must be >= 0 ticks");
      for (std::size_t j = i + 1; j < n; ++j) {
        if (values[i] == values[j]) {
          throw std::invalid_argument("service values must be distinct");
        }
      }
      if (transition[i].size() != n) {
        throw std::invalid_argument("markov transition matrix must be square");
      }
      double row = 0.0;
      for (double p : transition[i]) {
        if (p < 0.0) throw std::invalid_argument("transition probabilities must be >= 0");
        row += p;
      }
      if (std::abs(row - 1.0) > 1e-12) {
        throw std::invalid_argument("markov transition rows must sum to 1");
      }
    }
    if (*std::max_element(values.begin(), values.end()) == 0) {
      throw std::invalid_argument("service law needs a value > 0");
    }
    ServiceModel sm(Variant::markov);
    sm.values_ = std::move(values);
    sm.transition_ = std::move(transition);
    if (initial) {
      if (initial->size() != n) {
        throw std::invalid_argument("markov initial distribution size mismatch");
      }
      double total = 0.0;
      for (double p : *initial) {
        if (p < 0.0) throw std::invalid_argument("initial probabilities must be >= 0");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("initial distribution must sum to 1");
      }
      sm.initial_ = std::move(*initial);
    }
    return sm;
  }

  Variant variant() const { return variant_; }
  bool is_iid() const { return variant_ == Variant::iid; }

  /// Support values in ascending order (i.i.d.: zero-probability atoms
  /// already stripped).
  const std::vector<Tick>& values() const { return values_; }

  /// Atom probabilities, aligned with values(). i.i.d. only.
  const std::vector<double>& probs() const {
    require(Variant::iid);
    return probs_;
  }

  const std::vector<std::vector<double>>& transition() const {
    require(Variant::markov);
    return transition_;
  }

  /// Start distribution of the chain: the one given at construction, else
  /// the stationary distribution (which must then be unique).
  std::vector<double> initial_distribution() const {
    require(Variant::markov);
    if (!initial_.empty()) return initial_;
    return stationary();
  }

  /// Solves pi P = pi, sum(pi) = 1 by a direct linear solve; throws when the
  /// stationary distribution is not unique (e.g. reducible chains).
  std::vector<double> stationary() const {
    require(Variant::markov);
    const auto n = static_cast<Eigen::Index>(values_.size());
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        a(i, j) = transition_[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
      }
      a(i, i) -= 1.0;
    }
    a.row(n - 1).setOnes();  // replace one balance equation with normalization
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) {
      throw std::runtime_error("markov service chain has no unique stationary distribution");
    }
    Eigen::VectorXd pi = lu.solve(b);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      if (pi(i) < -1e-9) {
        throw std::runtime_error("markov service chain has no unique stationary distribution");
      }
      out[static_cast<std::size_t>(i)] = std::max(0.0, pi(i));
    }
    return out;
  }

  /// First two moments plus support extremes. For the Markov variant the
  /// weights are the stationary distribution.
  ServiceMoments moments() const {
    std::vector<double> w;
    if (variant_ == Variant::iid) {
      w = probs_;
    } else {
      w = stationary();
    }
    ServiceMoments m;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const auto v = static_cast<double>(values_[i]);
      m.mean += w[i] * v;
      m.second_moment += w[i] * v * v;
    }
    m.y_inf = *std::min_element(values_.begin(), values_.end());
    m.y_max = *std::max_element(values_.begin(), values_.end());
    return m;
  }

  bool operator==(const ServiceModel& other) const {
    return variant_ == other.variant_ && values_ == other.values_ &&
           probs_ == other.probs_ && transition_ == other.transition_ &&
           initial_ == other.initial_;
  }

 private:
  explicit ServiceModel(Variant v) : variant_(v) {}

  void require(Variant v) const {
    if (variant_ != v) {
      throw std::logic_error(v == Variant::iid ? "i.i.d. service model required"
                                               : "markov service model required");
    }
  }

  Variant variant_;
  std::vector<Tick> values_;
  std::vector<double> probs_;                     // iid
  std::vector<std::vector<double>> transition_;   // markov
  std::vector<double> initial_;                   // markov, optional
};

}  // namespace aoi
