#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "aoi/service.hpp"

namespace aoi {

/// The finite menu of waiting times available to the sampler, in ticks.
/// Always contains 0.
class WaitingMenu {
 public:
  explicit WaitingMenu(std::vector<Tick> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("waiting menu is empty");
    std::sort(values_.begin(), values_.end());
    values_.erase(std::unique(values_.begin(), values_.end()), values_.end());
    if (values_.front() < 0) {
      throw std::invalid_argument("waiting menu values must be >= 0 ticks");
    }
    if (values_.front() != 0) {
      throw std::invalid_argument("waiting menu must contain 0");
    }
  }

  const std::vector<Tick>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  Tick operator[](std::size_t i) const { return values_[i]; }
  Tick max() const { return values_.back(); }

  bool contains(Tick z) const {
    return std::binary_search(values_.begin(), values_.end(), z);
  }

  /// Position of z in the menu; throws if z is not on the menu.
  std::size_t index_of(Tick z) const {
    const auto it = std::lower_bound(values_.begin(), values_.end(), z);
    if (it == values_.end() || *it != z) {
      throw std::invalid_argument("waiting time is not on the menu");
    }
    return static_cast<std::size_t>(it - values_.begin());
  }

  bool operator==(const WaitingMenu& other) const { return values_ == other.values_; }

 private:
  std::vector<Tick> values_;
};

/// Sorted (non-increasing) vector of per-source ages in ticks: the decision
/// state observed just after a delivery.
class SystemState {
 public:
  explicit SystemState(std::vector<Tick> ages) : ages_(std::move(ages)) {
    if (ages_.empty()) throw std::invalid_argument("system state needs >= 1 source");
    std::sort(ages_.begin(), ages_.end(), std::greater<Tick>());
    if (ages_.back() < 0) throw std::invalid_argument("ages must be >= 0 ticks");
  }

  const std::vector<Tick>& ages() const { return ages_; }
  std::size_t m() const { return ages_.size(); }
  Tick operator[](std::size_t i) const { return ages_[i]; }

  /// Sum of all source ages.
  Tick age_sum() const {
    return std::accumulate(ages_.begin(), ages_.end(), Tick{0});
  }

  bool operator==(const SystemState& other) const { return ages_ == other.ages_; }

  /// true when every component is <= the corresponding component of other.
  bool componentwise_leq(const SystemState& other) const {
    if (m() != other.m()) return false;
    for (std::size_t i = 0; i < ages_.size(); ++i) {
      if (ages_[i] > other.ages_[i]) return false;
    }
    return true;
  }

 private:
  std::vector<Tick> ages_;
};

struct SystemStateHash {
  std::size_t operator()(const SystemState& s) const {
    std::size_t h = 1469598103934665603ull;  // FNV-1a over the age words
    for (Tick a : s.ages()) {
      auto v = static_cast<std::uint64_t>(a);
      for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= 1099511628211ull;
      }
    }
    return h;
  }
};

/// One delivery step: the served (oldest) source resets to the new service
/// time y while every other source ages by the full inter-delivery gap z + y.
/// The result is sorted by construction since ages[l+1] + z + y >= y.
inline SystemState advance(const SystemState& s, Tick z, Tick y) {
  if (z < 0 || y < 0) throw std::invalid_argument("waiting/service ticks must be >= 0");
  const std::size_t m = s.m();
  std::vector<Tick> out(m);
  for (std::size_t l = 0; l + 1 < m; ++l) out[l] = s[l + 1] + z + y;
  out[m - 1] = y;
  return SystemState(std::move(out));
}

}  // namespace aoi
