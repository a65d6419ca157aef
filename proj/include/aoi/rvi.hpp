#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "aoi/detail/parallel.hpp"
#include "aoi/penalty.hpp"
#include "aoi/state_space.hpp"

namespace aoi {

namespace detail {

/// Everything the value-iteration sweeps need, precomputed once per
/// (space, penalty, grid): expected penalty areas per (state, wait), the
/// transition targets per (state, wait, service atom), and the per-state
/// expected pre-delivery penalty used by the threshold shortcut. Only the
/// -beta * (z + E[Y]) part of the stage cost depends on beta, so the outer
/// bisection reuses these tables for every trial beta.
struct SolverTables {
  std::size_t n = 0;   // states
  std::size_t nz = 0;  // menu size
  std::size_t ny = 0;  // service atoms
  std::vector<double> area;           // [s*nz + zi]
  std::vector<std::uint32_t> next;    // [(s*nz + zi)*ny + yi]
  std::vector<double> threshold_lhs;  // [s]
  std::vector<double> yprob;          // [yi]
  std::vector<double> stage_time;     // [zi], (z + E[Y]) in real time
  double mean_service_real = 0.0;

  double q_value(std::size_t s, std::size_t zi, double beta,
                 const std::vector<double>& h) const {
    const std::size_t cell = s * nz + zi;
    double q = area[cell] - beta * stage_time[zi];
    const std::uint32_t* tgt = next.data() + cell * ny;
    for (std::size_t yi = 0; yi < ny; ++yi) q += yprob[yi] * h[tgt[yi]];
    return q;
  }
};

inline SolverTables build_solver_tables(const StateSpace& space,
                                        const PenaltyFunction& g,
                                        const TimeGrid& grid,
                                        unsigned workers = 1) {
  SolverTables t;
  t.n = space.size();
  t.nz = space.menu().size();
  t.ny = space.service().values().size();
  t.yprob = space.service().probs();
  t.area.resize(t.n * t.nz);
  t.next.resize(t.n * t.nz * t.ny);
  t.threshold_lhs.resize(t.n);
  const auto& zs = space.menu().values();
  const auto& ys = space.service().values();
  const double delta = grid.tick_length;
  t.mean_service_real = space.service().moments().mean * delta;
  for (std::size_t zi = 0; zi < t.nz; ++zi) {
    t.stage_time.push_back(static_cast<double>(zs[zi]) * delta + t.mean_service_real);
  }

  parallel_for(t.n, workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      const SystemState& st = space.states()[s];
      double lhs = 0.0;
      for (std::size_t yi = 0; yi < t.ny; ++yi) {
        double sum = 0.0;
        for (Tick a : st.ages()) sum += g(static_cast<double>(a + ys[yi]) * delta);
        lhs += t.yprob[yi] * sum;
      }
      t.threshold_lhs[s] = lhs;
      for (std::size_t zi = 0; zi < t.nz; ++zi) {
        const std::size_t cell = s * t.nz + zi;
        double expected_area = 0.0;
        for (std::size_t yi = 0; yi < t.ny; ++yi) {
          const Tick gap = zs[zi] + ys[yi];
          double atom_area = 0.0;
          for (Tick a : st.ages()) {
            atom_area += g.integral(static_cast<double>(a) * delta,
                                    static_cast<double>(a + gap) * delta);
          }
          expected_area += t.yprob[yi] * atom_area;
          t.next[cell * t.ny + yi] = space.index_of(advance(st, zs[zi], ys[yi]));
        }
        t.area[cell] = expected_area;
      }
    }
  });
  return t;
}

}  // namespace detail

/// Expected penalty growth over one stage minus the beta-weighted stage
/// length: E_Y[ sum_l int_{a_l}^{a_l+z+Y} g - beta (z + Y) ], as an exact
/// finite sum over the service atoms.
inline double stage_cost(const SystemState& s, Tick z, double beta,
                         const PenaltyFunction& g, const ServiceModel& service,
                         const TimeGrid& grid = TimeGrid()) {
  if (z < 0) throw std::invalid_argument("waiting ticks must be >= 0");
  const double delta = grid.tick_length;
  double cost = 0.0;
  const auto& ys = service.values();
  const auto& ps = service.probs();
  for (std::size_t yi = 0; yi < ys.size(); ++yi) {
    double area = 0.0;
    for (Tick a : s.ages()) {
      area += g.integral(static_cast<double>(a) * delta,
                         static_cast<double>(a + z + ys[yi]) * delta);
    }
    cost += ps[yi] * (area - beta * static_cast<double>(z + ys[yi]) * delta);
  }
  return cost;
}

/// Expected pre-delivery penalty E_Y[ sum_l g(a_l + Y) ].
inline double expected_service_penalty(const SystemState& s, const PenaltyFunction& g,
                                       const ServiceModel& service,
                                       const TimeGrid& grid = TimeGrid()) {
  const double delta = grid.tick_length;
  double lhs = 0.0;
  const auto& ys = service.values();
  const auto& ps = service.probs();
  for (std::size_t yi = 0; yi < ys.size(); ++yi) {
    double sum = 0.0;
    for (Tick a : s.ages()) sum += g(static_cast<double>(a + ys[yi]) * delta);
    lhs += ps[yi] * sum;
  }
  return lhs;
}

/// Waiting is provably useless at s once E_Y[sum_l g(a_l + Y)] >= beta.
/// For a linear penalty this reduces to A_s + m E[Y] >= beta, evaluated
/// directly from the integer age sum.
inline bool threshold_test(const SystemState& s, double beta, const PenaltyFunction& g,
                           const ServiceModel& service,
                           const TimeGrid& grid = TimeGrid()) {
  if (g.kind() == PenaltyKind::linear) {
    const double lhs = static_cast<double>(s.age_sum()) * grid.tick_length +
                       static_cast<double>(s.m()) * service.moments().mean *
                           grid.tick_length;
    return lhs >= beta;
  }
  return expected_service_penalty(s, g, service, grid) >= beta;
}

struct InnerOptions {
  double eps2 = 1e-9;
  bool shortcut = true;
  std::size_t max_iterations = 100'000;
  double damping = 0.0;       // aperiodicity transform weight on the old h
  bool auto_damping = true;   // raise damping to 0.2 after 50 stalled sweeps
  unsigned workers = 1;
};

struct InnerResult {
  double j_ref = 0.0;           // converged J(o); its sign drives the bisection
  std::vector<double> h;        // relative values, h[o] == 0
  std::vector<Tick> policy;     // greedy wait per state, in ticks
  std::size_t iterations = 0;
  double residual = 0.0;
  double damping_used = 0.0;
};

namespace detail {

inline InnerResult run_inner(const SolverTables& t, const WaitingMenu& menu,
                             std::size_t ref, double beta, const InnerOptions& opt) {
  const std::size_t n = t.n;
  InnerResult r;
  r.h.assign(n, 0.0);
  std::vector<double> value(n, 0.0);
  std::vector<double> resid(n, 0.0);
  std::vector<std::uint16_t> pol(n, 0);
  double kappa = opt.damping;
  double last_residual = std::numeric_limits<double>::infinity();
  std::size_t stalled = 0;

  for (std::size_t iter = 1; iter <= opt.max_iterations; ++iter) {
    parallel_for(n, opt.workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t s = b; s < e; ++s) {
        std::uint16_t best_z = 0;
        double best = t.q_value(s, 0, beta, r.h);
        if (!(opt.shortcut && t.threshold_lhs[s] >= beta)) {
          for (std::size_t zi = 1; zi < t.nz; ++zi) {
            const double q = t.q_value(s, zi, beta, r.h);
            if (q < best) {
              best = q;
              best_z = static_cast<std::uint16_t>(zi);
            }
          }
        }
        value[s] = best;
        pol[s] = best_z;
      }
    });
    const double j_ref = value[ref];
    parallel_for(n, opt.workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t s = b; s < e; ++s) {
        double hn = value[s] - j_ref;
        if (kappa > 0.0) hn = (1.0 - kappa) * hn + kappa * r.h[s];
        resid[s] = std::abs(hn - r.h[s]);
        r.h[s] = hn;
      }
    });
    double residual = 0.0;
    for (double v : resid) residual = std::max(residual, v);

    r.iterations = iter;
    r.residual = residual;
    r.j_ref = j_ref;
    if (residual <= opt.eps2) {
      r.policy.resize(n);
      for (std::size_t s = 0; s < n; ++s) r.policy[s] = menu[pol[s]];
      r.damping_used = kappa;
      return r;
    }
    if (opt.auto_damping && kappa == 0.0) {
      stalled = residual >= last_residual ? stalled + 1 : 0;
      if (stalled >= 50) kappa = 0.2;
    }
    last_residual = residual;
  }
  throw std::runtime_error(
      "relative value iteration did not converge within " +
      std::to_string(opt.max_iterations) +
      " sweeps; consider enabling the aperiodicity damping");
}

}  // namespace detail

/// One full relative-value-iteration solve at a fixed beta:
///   Q(s,z) = C(s,z) + sum_y P(y) h(s'(z,y)),  J(s) = min_z Q(s,z),
///   h(s) = J(s) - J(o),
/// iterated until max_s |h - h_last| <= eps2. With the shortcut enabled,
/// states whose expected pre-delivery penalty already reaches beta skip the
/// minimization and use z = 0.
inline InnerResult rvi_inner(const StateSpace& space, double beta,
                             const PenaltyFunction& g, const InnerOptions& opt = {},
                             const TimeGrid& grid = TimeGrid()) {
  const auto tables = detail::build_solver_tables(space, g, grid, opt.workers);
  return detail::run_inner(tables, space.menu(), space.reference(), beta, opt);
}

struct SolverOptions {
  double eps1 = 0.0;          // bisection width; 0 picks 1e-3 * initial upper bound
  double eps2 = 0.0;          // inner residual; 0 picks 1e-6 * initial cost span
  double upper_init = 0.0;    // 0: closed form (linear g only)
  double lower_init = 0.0;
  bool shortcut = true;
  std::size_t max_inner_iterations = 100'000;
  double damping = 0.0;
  bool auto_damping = true;
  unsigned workers = 1;
};

struct BisectionRecord {
  double beta = 0.0;
  double j_ref = 0.0;
  std::size_t inner_iterations = 0;
  double residual = 0.0;
};

/// Output of the bisection + RVI solver: the optimal time-average penalty
/// rate beta_star, the relative-value table and greedy waits over the
/// enumerated recurrent class, and the convergence trace.
struct RviSolution {
  double beta_star = 0.0;
  std::vector<double> h;
  std::vector<Tick> policy;  // ticks, aligned with space->states()
  std::shared_ptr<const StateSpace> space;
  PenaltyFunction g = PenaltyFunction::linear();
  TimeGrid grid;
  double eps1 = 0.0;
  double eps2 = 0.0;
  std::vector<BisectionRecord> trace;
  std::size_t total_inner_iterations = 0;

  std::optional<Tick> try_wait_for(const SystemState& s) const {
    const auto idx = space->find(s);
    if (!idx) return std::nullopt;
    return policy[*idx];
  }

  Tick wait_for(const SystemState& s) const { return policy[space->index_of(s)]; }
};

/// Closed-form time-average age of the zero-wait sampler under the
/// oldest-first scheduler with a linear penalty:
///   ( m(m+1)/2 E[Y]^2 + m/2 E[Y^2] ) / E[Y], in real time units.
inline double zero_wait_ta_ap_linear(const ServiceModel& service, std::size_t m,
                                     const TimeGrid& grid = TimeGrid()) {
  const auto mom = service.moments();
  const double ey = mom.mean * grid.tick_length;
  const double ey2 = mom.second_moment * grid.tick_length * grid.tick_length;
  if (!(ey > 0.0)) throw std::domain_error("E[Y] must be > 0");
  const double md = static_cast<double>(m);
  return (0.5 * md * (md + 1.0) * ey * ey + 0.5 * md * ey2) / ey;
}

/// Sufficient condition for the zero-wait sampler to be optimal under a
/// linear penalty: y_inf >= ((m-1) E[Y]^2 + E[Y^2]) / ((m+1) E[Y]).
/// Scale-free, so it is evaluated directly in ticks.
inline bool zero_wait_sufficient(const ServiceModel& service, std::size_t m) {
  const auto mom = service.moments();
  if (!(mom.mean > 0.0)) throw std::domain_error("E[Y] must be > 0");
  const double md = static_cast<double>(m);
  const double rhs =
      ((md - 1.0) * mom.mean * mom.mean + mom.second_moment) / ((md + 1.0) * mom.mean);
  return static_cast<double>(mom.y_inf) >= rhs;
}

/// Bisection on beta around the inner RVI solve. J(o) converges to the
/// optimal average stage cost of the beta-parameterized problem, which is
/// positive below the optimal rate and negative above it, so J(o) >= 0
/// raises the lower bound and J(o) < 0 lowers the upper bound. The loop
/// stops when the bracket is narrower than eps1.
inline RviSolution rvi_rc_solve(const StateSpace& space, const PenaltyFunction& g,
                                const TimeGrid& grid = TimeGrid(),
                                SolverOptions opt = {}) {
  const auto tables = detail::build_solver_tables(space, g, grid, opt.workers);

  double upper = opt.upper_init;
  if (upper <= 0.0) {
    if (g.kind() != PenaltyKind::linear) {
      throw std::invalid_argument(
          "upper_init is required for non-linear penalties (e.g. a simulated "
          "zero-wait estimate)");
    }
    upper = zero_wait_ta_ap_linear(space.service(), space.m(), grid);
  }
  double lower = std::max(0.0, opt.lower_init);
  if (!(upper > lower)) throw std::invalid_argument("upper_init must exceed lower_init");

  const double eps1 = opt.eps1 > 0.0 ? opt.eps1 : 1e-3 * upper;
  double eps2 = opt.eps2;
  if (eps2 <= 0.0) {
    // span of the stage costs at the first midpoint
    const double beta0 = 0.5 * (lower + upper);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t s = 0; s < tables.n; ++s) {
      for (std::size_t zi = 0; zi < tables.nz; ++zi) {
        const double c =
            tables.area[s * tables.nz + zi] - beta0 * tables.stage_time[zi];
        lo = std::min(lo, c);
        hi = std::max(hi, c);
      }
    }
    eps2 = 1e-6 * std::max(hi - lo, 1e-6);
  }

  InnerOptions inner;
  inner.eps2 = eps2;
  inner.shortcut = opt.shortcut;
  inner.max_iterations = opt.max_inner_iterations;
  inner.damping = opt.damping;
  inner.auto_damping = opt.auto_damping;
  inner.workers = opt.workers;

  RviSolution sol;
  const std::size_t ref = space.reference();
  auto solve_at = [&](double beta) {
    InnerResult r = detail::run_inner(tables, space.menu(), ref, beta, inner);
    sol.trace.push_back({beta, r.j_ref, r.iterations, r.residual});
    sol.total_inner_iterations += r.iterations;
    return r;
  };

  // The upper bound must sit at or above the optimum; expand it if a caller
  // handed in an under-estimate.
  for (int tries = 0; solve_at(upper).j_ref > 0.0; ++tries) {
    if (tries > 60) throw std::runtime_error("failed to bracket the optimal rate");
    lower = upper;
    upper *= 2.0;
  }

  while (upper - lower > eps1) {
    const double beta = 0.5 * (lower + upper);
    const InnerResult r = solve_at(beta);
    if (r.j_ref >= 0.0) {
      lower = beta;
    } else {
      upper = beta;
    }
  }

  sol.beta_star = 0.5 * (lower + upper);
  InnerResult fin = solve_at(sol.beta_star);
  sol.h = std::move(fin.h);
  sol.policy = std::move(fin.policy);
  sol.space = std::make_shared<StateSpace>(space);
  sol.g = g;
  sol.grid = grid;
  sol.eps1 = eps1;
  sol.eps2 = eps2;
  return sol;
}

}  // namespace aoi
