#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "aoi/state.hpp"

namespace aoi {

/// The recurrent class of the delivery-epoch age process: every reachable
/// state once each source has been served at least once, with ages built
/// from sums of service and waiting values.
///
/// Enumeration seeds with the images of the all-zero age vector after m
/// consecutive deliveries (over all waiting/service choices) and then closes
/// the set under the one-step transition. States are kept in a canonical
/// order (age sum ascending, then lexicographic), so the reference state o
/// is always index 0 and tables indexed by state are reproducible.
class StateSpace {
 public:
  static StateSpace enumerate(const ServiceModel& service, const WaitingMenu& menu,
                              std::size_t m, std::size_t cap = 5'000'000) {
    if (!service.is_iid()) {
      throw std::invalid_argument("state enumeration requires an i.i.d. service model");
    }
    if (m == 0) throw std::invalid_argument("need at least one source");

    StateSpace sp(service, menu, m);
    const auto& ys = service.values();
    const auto& zs = menu.values();

    std::vector<SystemState> frontier{SystemState(std::vector<Tick>(m, 0))};
    for (std::size_t step = 0; step < m; ++step) {
      std::unordered_map<SystemState, char, SystemStateHash> seen;
      std::vector<SystemState> next;
      for (const auto& s : frontier) {
        for (Tick z : zs) {
          for (Tick y : ys) {
            SystemState t = advance(s, z, y);
            if (seen.emplace(t, 0).second) next.push_back(std::move(t));
          }
        }
      }
      frontier = std::move(next);
      if (frontier.size() > cap) throw_cap(cap);
    }

    std::deque<SystemState> queue;
    for (auto& s : frontier) {
      if (sp.index_.emplace(s, 0).second) queue.push_back(s);
    }
    while (!queue.empty()) {
      SystemState s = std::move(queue.front());
      queue.pop_front();
      sp.states_.push_back(s);
      if (sp.states_.size() > cap) throw_cap(cap);
      for (Tick z : zs) {
        for (Tick y : ys) {
          SystemState t = advance(s, z, y);
          if (sp.index_.emplace(t, 0).second) queue.push_back(std::move(t));
        }
      }
    }

    std::sort(sp.states_.begin(), sp.states_.end(),
              [](const SystemState& a, const SystemState& b) {
                const Tick sa = a.age_sum(), sb = b.age_sum();
                if (sa != sb) return sa < sb;
                return a.ages() < b.ages();
              });
    for (std::uint32_t i = 0; i < sp.states_.size(); ++i) {
      sp.index_[sp.states_[i]] = i;
    }
    return sp;
  }

  /// Rebuilds a space from an explicit state list (e.g. a solution file).
  /// The list must be closed under the transition map.
  static StateSpace from_states(const ServiceModel& service, const WaitingMenu& menu,
                                std::size_t m, std::vector<SystemState> states) {
    if (!service.is_iid()) {
      throw std::invalid_argument("state space requires an i.i.d. service model");
    }
    StateSpace sp(service, menu, m);
    sp.states_ = std::move(states);
    std::sort(sp.states_.begin(), sp.states_.end(),
              [](const SystemState& a, const SystemState& b) {
                const Tick sa = a.age_sum(), sb = b.age_sum();
                if (sa != sb) return sa < sb;
                return a.ages() < b.ages();
              });
    for (std::uint32_t i = 0; i < sp.states_.size(); ++i) {
      if (sp.states_[i].m() != m) {
        throw std::invalid_argument("state dimension mismatch");
      }
      sp.index_[sp.states_[i]] = i;
    }
    if (sp.index_.size() != sp.states_.size()) {
      throw std::invalid_argument("duplicate states");
    }
    for (const auto& s : sp.states_) {
      for (Tick z : menu.values()) {
        for (Tick y : service.values()) {
          if (!sp.find(advance(s, z, y))) {
            throw std::invalid_argument("state list is not closed under transitions");
          }
        }
      }
    }
    return sp;
  }

  const std::vector<SystemState>& states() const { return states_; }
  std::size_t size() const { return states_.size(); }
  std::size_t m() const { return m_; }
  const WaitingMenu& menu() const { return menu_; }
  const ServiceModel& service() const { return service_; }

  /// Index of the reference state o (minimal age sum, ties lexicographic).
  std::size_t reference() const { return 0; }

  std::optional<std::uint32_t> find(const SystemState& s) const {
    const auto it = index_.find(s);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::uint32_t index_of(const SystemState& s) const {
    const auto it = index_.find(s);
    if (it == index_.end()) throw std::out_of_range("state not in the enumerated space");
    return it->second;
  }

 private:
  StateSpace(ServiceModel service, WaitingMenu menu, std::size_t m)
      : service_(std::move(service)), menu_(std::move(menu)), m_(m) {}

  [[noreturn]] static void throw_cap(std::size_t cap) {
    throw std::runtime_error(
        "state space exceeds cap (" + std::to_string(cap) +
        " states); use a coarser waiting menu or service grid");
  }

  ServiceModel service_;
  WaitingMenu menu_;
  std::size_t m_;
  std::vector<SystemState> states_;
  std::unordered_map<SystemState, std::uint32_t, SystemStateHash> index_;
};

}  // namespace aoi
