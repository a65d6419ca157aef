#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "aoi/approx.hpp"
#include "aoi/rng.hpp"
#include "aoi/sim.hpp"

using namespace aoi;

TEST_CASE("water filling arithmetic") {
  CHECK(water_filling_wait(9.0, 3, 4.0) == Catch::Approx(1.0));
  CHECK(water_filling_wait(15.0, 3, 4.0) == 0.0);
  CHECK(water_filling_wait(7.0, 2, 0.0) == 0.0);
}

TEST_CASE("threshold wait, linear closed form") {
  const auto g = PenaltyFunction::linear();
  const auto service = ServiceModel::iid({0, 3}, {0.5, 0.5});  // E[Y] = 1.5
  CHECK(threshold_wait({5, 3, 1}, 20.0, g, service) == Catch::Approx(6.5 / 3.0));
  CHECK(threshold_wait({5, 3, 1}, 0.0, g, service) == 0.0);
  // at or below the boundary A_s + m E[Y] the wait clamps to zero
  CHECK(threshold_wait({5, 3, 1}, 13.5, g, service) == 0.0);
  CHECK(threshold_wait({5, 3, 1}, 13.0, g, service) == 0.0);
}

TEST_CASE("threshold wait by bisection matches the linear closed form") {
  const auto linear = PenaltyFunction::linear();
  const auto as_custom = PenaltyFunction::custom([](double x) { return x; });
  const auto service = ServiceModel::iid({1, 3}, {0.25, 0.75});
  Rng rng(21);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> ages{10.0 * rng.uniform(), 10.0 * rng.uniform()};
    const double T = 40.0 * rng.uniform();
    const double closed = threshold_wait(ages, T, linear, service);
    const double searched = threshold_wait(ages, T, as_custom, service, TimeGrid(), 1e-8);
    CHECK(searched == Catch::Approx(closed).margin(1e-6));
  }
}

TEST_CASE("threshold wait is non-increasing in the ages") {
  const auto g = PenaltyFunction::exponential(0.1, 1.0);
  const auto service = ServiceModel::iid({0, 3}, {0.5, 0.5});
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> lo{8.0 * rng.uniform(), 8.0 * rng.uniform(),
                           8.0 * rng.uniform()};
    std::vector<double> hi = lo;
    hi[rng.bounded(3)] += 5.0 * rng.uniform();
    CHECK(threshold_wait(hi, 30.0, g, service) <=
          threshold_wait(lo, 30.0, g, service) + 1e-9);
  }
}

TEST_CASE("threshold wait errors when the penalty saturates below T") {
  const auto g = PenaltyFunction::indicator(1.0);  // at most m in expectation
  const auto service = ServiceModel::iid({1}, {1.0});
  CHECK_THROWS_AS(threshold_wait({2.0, 1.0}, 5.0, g, service), std::runtime_error);
}

TEST_CASE("linear threshold rule reduces to water filling") {
  // with T_wf = (T_th - m E[Y]) / m the two rules coincide
  const auto g = PenaltyFunction::linear();
  const auto service = ServiceModel::iid({0, 3}, {0.5, 0.5});
  const double mean_y = 1.5;
  Rng rng(33);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> ages{12.0 * rng.uniform(), 12.0 * rng.uniform(),
                             12.0 * rng.uniform()};
    const double t_th = 45.0 * rng.uniform();
    const double t_wf = (t_th - 3.0 * mean_y) / 3.0;
    double age_sum = ages[0] + ages[1] + ages[2];
    const double a = threshold_wait(ages, t_th, g, service);
    const double b = water_filling_wait(age_sum, 3, t_wf);
    CHECK(a == Catch::Approx(b).margin(1e-9));
  }
}

TEST_CASE("golden section finds a quadratic minimum") {
  const auto r = tune_threshold([](double t) { return (t - 5.0) * (t - 5.0); }, 0.0,
                                10.0, 1e-4);
  CHECK(r.x == Catch::Approx(5.0).margin(1e-4));
  CHECK(r.value == Catch::Approx(0.0).margin(1e-7));
}

TEST_CASE("golden section lands on the boundary of a monotone range") {
  const auto r = tune_threshold([](double t) { return (t - 5.0) * (t - 5.0); }, 6.0,
                                10.0, 1e-4);
  CHECK(r.x == Catch::Approx(6.0).margin(1e-4));
}

TEST_CASE("bracket shrinks by the golden ratio each iteration") {
  const auto r = tune_threshold([](double t) { return std::abs(t - 2.0); }, 0.0, 10.0,
                                1e-3);
  constexpr double inv_phi = 0.6180339887498949;
  const double predicted = 10.0 * std::pow(inv_phi, static_cast<double>(r.iterations));
  CHECK(r.bracket_hi - r.bracket_lo == Catch::Approx(predicted).epsilon(1e-6));
  CHECK(r.evaluations.size() == r.iterations + 2);
}

TEST_CASE("non-finite objectives are rejected") {
  CHECK_THROWS_AS(
      tune_threshold([](double t) { return t > 1.0 ? std::nan("") : t; }, 0.0, 10.0,
                     1e-3),
      std::runtime_error);
}

TEST_CASE("tuned water filling beats zero-wait on a high-variance law") {
  SimConfig cfg;
  cfg.m = 3;
  cfg.service = ServiceModel::iid({0, 3}, {0.9, 0.1});
  cfg.horizon_n = 50'000;
  cfg.seed = 6;
  cfg.sampler = SamplerSpec::zero_wait();
  const double zero_wait_rate = simulate(cfg).ta_ap;
  const auto tuned = tune_threshold(
      [&](double T) {
        auto run = cfg;
        run.sampler = SamplerSpec::water_filling(T);
        return simulate(run).ta_ap;
      },
      0.0, zero_wait_rate / 3.0, 1e-2);
  CHECK(tuned.value <= zero_wait_rate);
}
