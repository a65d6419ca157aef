#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoi/detail/parallel.hpp"
#include "aoi/rvi.hpp"

namespace aoi {

namespace detail {

/// Closed strongly-connected components (no edge leaving the component) of
/// the chain induced by a fixed policy, restricted to the states reachable
/// from `start`. Iterative Tarjan; returns one member list per closed SCC.
inline std::vector<std::vector<std::uint32_t>> closed_classes(
    const SolverTables& t, const std::vector<std::uint16_t>& policy,
    std::uint32_t start) {
  const auto n = static_cast<std::uint32_t>(t.n);
  auto succ = [&](std::uint32_t s, std::size_t yi) {
    return t.next[(static_cast<std::size_t>(s) * t.nz + policy[s]) * t.ny + yi];
  };

  constexpr std::uint32_t none = 0xffffffffu;
  std::vector<std::uint32_t> index(n, none), low(n, 0), comp(n, none);
  std::vector<char> on_stack(n, 0);
  std::vector<std::uint32_t> stack, call_state;
  std::vector<std::pair<std::uint32_t, std::size_t>> call;  // (state, next edge)
  std::vector<std::vector<std::uint32_t>> components;
  std::uint32_t counter = 0;

  if (start >= n) throw std::out_of_range("bad start state");
  call.emplace_back(start, 0);
  index[start] = low[start] = counter++;
  stack.push_back(start);
  on_stack[start] = 1;

  while (!call.empty()) {
    auto& [s, edge] = call.back();
    if (edge < t.ny) {
      const std::uint32_t w = succ(s, edge);
      ++edge;
      if (index[w] == none) {
        index[w] = low[w] = counter++;
        stack.push_back(w);
        on_stack[w] = 1;
        call.emplace_back(w, 0);
      } else if (on_stack[w]) {
        low[s] = std::min(low[s], index[w]);
      }
    } else {
      if (low[s] == index[s]) {
        std::vector<std::uint32_t> members;
        for (;;) {
          const std::uint32_t w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = static_cast<std::uint32_t>(components.size());
          members.push_back(w);
          if (w == s) break;
        }
        components.push_back(std::move(members));
      }
      const std::uint32_t done = s;
      call.pop_back();
      if (!call.empty()) {
        low[call.back().first] = std::min(low[call.back().first], low[done]);
      }
    }
  }

  std::vector<std::vector<std::uint32_t>> closed;
  for (const auto& members : components) {
    bool is_closed = true;
    for (std::uint32_t s : members) {
      for (std::size_t yi = 0; yi < t.ny && is_closed; ++yi) {
        if (comp[succ(s, yi)] != comp[members.front()]) is_closed = false;
      }
      if (!is_closed) break;
    }
    if (is_closed) closed.push_back(members);
  }
  return closed;
}

/// Long-run penalty rate of a fixed policy given its (unique) recurrent
/// class: solve pi P = pi on the class, then take the ratio of expected
/// penalty area per stage to expected stage length.
inline double policy_rate(const SolverTables& t, const std::vector<std::uint16_t>& policy,
                          const std::vector<std::uint32_t>& members) {
  const auto k = static_cast<Eigen::Index>(members.size());
  std::vector<std::uint32_t> pos(t.n, 0);
  for (Eigen::Index i = 0; i < k; ++i) {
    pos[members[static_cast<std::size_t>(i)]] = static_cast<std::uint32_t>(i);
  }
  // a = P^T - I on the class, with the last balance row replaced by sum = 1.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const std::uint32_t s = members[static_cast<std::size_t>(i)];
    const std::size_t cell = static_cast<std::size_t>(s) * t.nz + policy[s];
    for (std::size_t yi = 0; yi < t.ny; ++yi) {
      const auto j = static_cast<Eigen::Index>(pos[t.next[cell * t.ny + yi]]);
      a(j, i) += t.yprob[yi];
    }
    a(i, i) -= 1.0;
  }
  a.row(k - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
  b(k - 1) = 1.0;
  Eigen::VectorXd pi = Eigen::FullPivLU<Eigen::MatrixXd>(a).solve(b);

  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const std::uint32_t s = members[static_cast<std::size_t>(i)];
    const double w = std::max(0.0, pi(i));
    num += w * t.area[static_cast<std::size_t>(s) * t.nz + policy[s]];
    den += w * t.stage_time[policy[s]];
  }
  if (!(den > 0.0)) throw std::runtime_error("policy induces zero expected stage length");
  return num / den;
}

inline std::vector<std::uint16_t> to_menu_indices(const StateSpace& space,
                                                  const std::vector<Tick>& waits) {
  if (waits.size() != space.size()) {
    throw std::invalid_argument("policy must assign a wait to every state");
  }
  std::vector<std::uint16_t> idx(waits.size());
  for (std::size_t s = 0; s < waits.size(); ++s) {
    idx[s] = static_cast<std::uint16_t>(space.menu().index_of(waits[s]));
  }
  return idx;
}

}  // namespace detail

/// Exact long-run penalty rate of a stationary deterministic sampler: builds
/// the induced chain, requires a unique recurrent class reachable from the
/// reference state, and evaluates the stationary ratio by a direct linear
/// solve (exact for periodic chains, where power iteration would not settle).
inline double evaluate_policy(const StateSpace& space, const std::vector<Tick>& waits,
                              const PenaltyFunction& g, const TimeGrid& grid = TimeGrid()) {
  const auto tables = detail::build_solver_tables(space, g, grid);
  const auto policy = detail::to_menu_indices(space, waits);
  const auto classes = detail::closed_classes(
      tables, policy, static_cast<std::uint32_t>(space.reference()));
  if (classes.size() != 1) {
    std::string msg = "policy induces " + std::to_string(classes.size()) +
                      " recurrent classes reachable from the reference state (sizes:";
    for (const auto& c : classes) msg += " " + std::to_string(c.size());
    msg += ")";
    throw std::runtime_error(msg);
  }
  return detail::policy_rate(tables, policy, classes.front());
}

struct BruteForceResult {
  std::vector<Tick> policy;  // wait per state, ticks
  double value = 0.0;        // its long-run penalty rate
  std::size_t evaluated = 0;
};

/// Exhaustive search over all |menu|^|space| stationary deterministic
/// samplers. Enumeration is mixed-radix over states in space order with menu
/// values ascending; ties keep the first policy found, so the result is
/// deterministic. Guarded against combinatorial blow-up.
inline BruteForceResult brute_force_best(const StateSpace& space,
                                         const PenaltyFunction& g,
                                         const TimeGrid& grid = TimeGrid(),
                                         std::size_t guard = 1'000'000,
                                         unsigned workers = 1) {
  const std::size_t n = space.size();
  const std::size_t nz = space.menu().size();
  double total_d = 1.0;
  for (std::size_t s = 0; s < n; ++s) {
    total_d *= static_cast<double>(nz);
    if (total_d > static_cast<double>(guard)) {
      throw std::runtime_error(
          "policy enumeration would exceed the guard; use a smaller instance");
    }
  }
  const auto total = static_cast<std::uint64_t>(total_d);
  const auto tables = detail::build_solver_tables(space, g, grid);

  struct Best {
    double value = std::numeric_limits<double>::infinity();
    std::uint64_t id = 0;
    bool set = false;
  };
  std::vector<Best> best_per_chunk;
  std::mutex mu;

  const unsigned k = workers == 0 ? 2 : workers;
  std::vector<Best> chunk_best(k);
  detail::parallel_for(k, k, [&](std::size_t wb, std::size_t we) {
    for (std::size_t w = wb; w < we; ++w) {
      const std::uint64_t lo = total * w / k;
      const std::uint64_t hi = total * (w + 1) / k;
      std::vector<std::uint16_t> policy(n);
      Best local;
      for (std::uint64_t id = lo; id < hi; ++id) {
        std::uint64_t rem = id;
        for (std::size_t s = 0; s < n; ++s) {
          policy[s] = static_cast<std::uint16_t>(rem % nz);
          rem /= nz;
        }
        const auto classes = detail::closed_classes(tables, policy, 0);
        if (classes.size() != 1) continue;  // ambiguous long-run behaviour
        const double v = detail::policy_rate(tables, policy, classes.front());
        if (!local.set || v < local.value ||
            (v == local.value && id < local.id)) {
          local = {v, id, true};
        }
      }
      std::lock_guard<std::mutex> lock(mu);
      chunk_best[w] = local;
    }
  });

  Best best;
  for (const auto& c : chunk_best) {
    if (!c.set) continue;
    if (!best.set || c.value < best.value ||
        (c.value == best.value && c.id < best.id)) {
      best = c;
    }
  }
  if (!best.set) throw std::runtime_error("no evaluable stationary policy found");

  BruteForceResult out;
  out.value = best.value;
  out.evaluated = total;
  out.policy.resize(n);
  std::uint64_t rem = best.id;
  for (std::size_t s = 0; s < n; ++s) {
    out.policy[s] = space.menu()[static_cast<std::size_t>(rem % nz)];
    rem /= nz;
  }
  return out;
}

}  // namespace aoi
