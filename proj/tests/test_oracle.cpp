#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "aoi/oracle.hpp"
#include "aoi/sim.hpp"

using namespace aoi;

namespace {

const auto kLinear = PenaltyFunction::linear();

std::vector<Tick> zero_policy(const StateSpace& space) {
  return std::vector<Tick>(space.size(), 0);
}

}  // namespace

TEST_CASE("zero policy on the deterministic two-source chain") {
  const auto space =
      StateSpace::enumerate(ServiceModel::iid({1}, {1.0}), WaitingMenu({0}), 2);
  CHECK(evaluate_policy(space, zero_policy(space), kLinear) == Catch::Approx(4.0));
}

TEST_CASE("zero policy matches the closed form exactly") {
  const auto cases = std::vector<std::pair<ServiceModel, std::size_t>>{
      {ServiceModel::iid({2}, {1.0}), 2},
      {ServiceModel::iid({1, 2}, {0.5, 0.5}), 2},
      {ServiceModel::iid({0, 3}, {0.5, 0.5}), 3},
      {ServiceModel::iid({0, 3}, {0.9, 0.1}), 3},
  };
  for (const auto& [service, m] : cases) {
    const auto space = StateSpace::enumerate(service, WaitingMenu({0, 1}), m);
    CHECK(evaluate_policy(space, zero_policy(space), kLinear) ==
          Catch::Approx(zero_wait_ta_ap_linear(service, m)).margin(1e-9));
  }
}

TEST_CASE("policy evaluation agrees with a long simulation") {
  const auto service = ServiceModel::iid({1, 2}, {0.5, 0.5});
  const WaitingMenu menu({0, 1, 2});
  const auto space = StateSpace::enumerate(service, menu, 2);

  // an arbitrary non-trivial stationary policy: wait 1 on the low-age states
  std::vector<Tick> waits(space.size(), 0);
  for (std::size_t s = 0; s < space.size(); ++s) {
    if (space.states()[s].age_sum() <= 4) waits[s] = 1;
  }
  const double exact = evaluate_policy(space, waits, kLinear);

  auto sol = std::make_shared<RviSolution>(rvi_rc_solve(space, kLinear));
  sol->policy = waits;  // replay the fixed policy through the table sampler
  SimConfig cfg;
  cfg.m = 2;
  cfg.service = service;
  cfg.sampler = SamplerSpec::table(sol);
  cfg.horizon_n = 1'000'000;
  cfg.seed = 12;
  const auto metrics = simulate(cfg);
  CHECK(std::abs(metrics.ta_ap - exact) <= 3.0 * metrics.se_ta_ap);
}

TEST_CASE("exhaustive search on constant service returns the zero policy") {
  const auto space =
      StateSpace::enumerate(ServiceModel::iid({2}, {1.0}), WaitingMenu({0, 1}), 2);
  const auto best = brute_force_best(space, kLinear);
  CHECK(best.value == Catch::Approx(8.0).margin(1e-9));
  for (Tick z : best.policy) CHECK(z == 0);
}

TEST_CASE("exhaustive search confirms zero-wait sufficiency for one source") {
  // y_inf = 1 >= ((1-1) E[Y]^2 + E[Y^2]) / (2 E[Y]) = 2.5/3
  const auto service = ServiceModel::iid({1, 2}, {0.5, 0.5});
  REQUIRE(zero_wait_sufficient(service, 1));
  const auto space = StateSpace::enumerate(service, WaitingMenu({0, 1}), 1);
  const auto best = brute_force_best(space, kLinear);
  for (Tick z : best.policy) CHECK(z == 0);
}

TEST_CASE("solver and oracle agree on a non-trivial instance") {
  const auto space = StateSpace::enumerate(ServiceModel::iid({1, 2}, {0.5, 0.5}),
                                           WaitingMenu({0, 1, 2}), 2);
  const auto best = brute_force_best(space, kLinear);
  SolverOptions opt;
  opt.eps1 = 1e-4;
  const auto sol = rvi_rc_solve(space, kLinear, TimeGrid(), opt);
  CHECK(std::abs(sol.beta_star - best.value) <= 1e-3);
  // every stationary policy sits at or above the optimum
  CHECK(evaluate_policy(space, zero_policy(space), kLinear) >=
        sol.beta_star - 1e-3);
}

TEST_CASE("brute force tie-break and determinism") {
  const auto space =
      StateSpace::enumerate(ServiceModel::iid({1}, {1.0}), WaitingMenu({0, 1}), 2);
  const auto a = brute_force_best(space, kLinear);
  const auto b = brute_force_best(space, kLinear, TimeGrid(), 1'000'000, 4);
  CHECK(a.value == b.value);
  CHECK(a.policy == b.policy);
}

TEST_CASE("combinatorial guard") {
  const auto space = StateSpace::enumerate(ServiceModel::iid({0, 3}, {0.5, 0.5}),
                                           WaitingMenu({0, 1, 2}), 3);
  CHECK_THROWS_AS(brute_force_best(space, kLinear, TimeGrid(), /*guard=*/1000),
                  std::runtime_error);
}

TEST_CASE("policy waits must come from the menu") {
  const auto space =
      StateSpace::enumerate(ServiceModel::iid({1}, {1.0}), WaitingMenu({0, 1}), 2);
  std::vector<Tick> waits(space.size(), 3);
  CHECK_THROWS_AS(evaluate_policy(space, waits, kLinear), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_policy(space, {0}, kLinear), std::invalid_argument);
}
