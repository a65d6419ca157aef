#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "aoi/sim.hpp"

using namespace aoi;

namespace {

SimConfig base_config() {
  SimConfig cfg;
  cfg.m = 2;
  cfg.scheduler = SchedulerKind::maf;
  cfg.sampler = SamplerSpec::zero_wait();
  cfg.service = ServiceModel::iid({1}, {1.0});
  cfg.g = PenaltyFunction::linear();
  cfg.horizon_n = 1000;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("deterministic two-source trace") {
  // m=2, Y == 1, zero-wait, oldest-first, start at (2,1): the state is a
  // fixed point, each unit interval accrues area 2.5 + 1.5 and the
  // pre-delivery ages are (3,2).
  auto cfg = base_config();
  cfg.initial_ages = std::vector<double>{2.0, 1.0};
  const auto metrics = simulate(cfg);
  CHECK(metrics.ta_ap == 4.0);
  CHECK(metrics.ta_apd == 5.0);
  CHECK(metrics.deliveries == cfg.horizon_n - cfg.warmup());
  CHECK(metrics.elapsed ==
        Catch::Approx(static_cast<double>(metrics.deliveries)));
  CHECK(metrics.se_ta_ap == 0.0);
}

TEST_CASE("the default start state is the same fixed point") {
  auto cfg = base_config();
  const auto metrics = simulate(cfg);
  CHECK(metrics.ta_ap == 4.0);
  CHECK(metrics.ta_apd == 5.0);
}

TEST_CASE("post-delivery age equals the delivered service time") {
  auto cfg = base_config();
  cfg.service = ServiceModel::iid({0, 3}, {0.5, 0.5});
  cfg.scheduler = SchedulerKind::rand;
  std::size_t seen = 0;
  double gap_sum = 0.0;
  simulate(cfg, [&](const DeliveryRecord& r) {
    CHECK(r.post_age == r.service);
    if (r.index > cfg.warmup()) gap_sum += r.wait + r.service;
    ++seen;
  });
  CHECK(seen == cfg.horizon_n);
  const auto metrics = simulate(cfg);
  CHECK(metrics.elapsed == gap_sum);
}

TEST_CASE("identical config and seed reproduce metrics bitwise") {
  auto cfg = base_config();
  cfg.service = ServiceModel::iid({0, 3}, {0.3, 0.7});
  cfg.sampler = SamplerSpec::constant_wait(0.63);
  cfg.horizon_n = 20000;
  const auto a = simulate(cfg);
  const auto b = simulate(cfg);
  CHECK(a.ta_ap == b.ta_ap);
  CHECK(a.ta_apd == b.ta_apd);
  CHECK(a.elapsed == b.elapsed);
  CHECK(a.se_ta_ap == b.se_ta_ap);
  CHECK(a.per_source_mean_age == b.per_source_mean_age);
}

TEST_CASE("scheduler choice does not perturb the service sample path") {
  auto maf = base_config();
  maf.service = ServiceModel::iid({0, 3}, {0.5, 0.5});
  maf.m = 3;
  auto rnd = maf;
  rnd.scheduler = SchedulerKind::rand;
  std::vector<double> services_maf, services_rnd;
  simulate(maf, [&](const DeliveryRecord& r) { services_maf.push_back(r.service); });
  simulate(rnd, [&](const DeliveryRecord& r) { services_rnd.push_back(r.service); });
  CHECK(services_maf == services_rnd);
}

TEST_CASE("simulated zero-wait rate matches the closed form") {
  SimConfig cfg;
  cfg.m = 3;
  cfg.service = ServiceModel::iid({0, 3}, {0.5, 0.5});
  cfg.horizon_n = 1'000'000;
  cfg.seed = 2;
  const auto metrics = simulate(cfg);
  CHECK(metrics.ta_ap == Catch::Approx(13.5).epsilon(0.005));
  CHECK(metrics.se_ta_ap > 0.0);
  CHECK(metrics.ci_ta_ap.has_value());
}

TEST_CASE("per-source mean ages are symmetric under oldest-first") {
  SimConfig cfg;
  cfg.m = 3;
  cfg.service = ServiceModel::iid({1, 2}, {0.5, 0.5});
  cfg.horizon_n = 200'000;
  const auto metrics = simulate(cfg);
  REQUIRE(metrics.per_source_mean_age.size() == 3);
  for (double v : metrics.per_source_mean_age) {
    CHECK(v == Catch::Approx(metrics.per_source_mean_age[0]).epsilon(0.02));
  }
}

TEST_CASE("config validation") {
  auto cfg = base_config();
  cfg.horizon_n = 10;
  cfg.warmup_deliveries = 10;
  CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);

  cfg = base_config();
  cfg.initial_ages = std::vector<double>{1.0};  // m = 2
  CHECK_THROWS_AS(simulate(cfg), std::invalid_argument);
}

TEST_CASE("markov chain stepping") {
  // sigma = 1: the identity matrix freezes the chain state
  const auto frozen = ServiceModel::markov({1, 30}, {{1.0, 0.0}, {0.0, 1.0}},
                                           std::vector<double>{0.9, 0.1});
  Rng rng(4);
  std::size_t state = 0;
  for (int i = 0; i < 100; ++i) {
    const auto [y, next] = markov_service_next(state, frozen, rng);
    CHECK(y == 1);
    CHECK(next == 0);
    state = next;
  }

  // same seed, same sequence
  const auto chain = ServiceModel::markov(
      {1, 30},
      {{8.0 / 9.0 + 0.5 / 9.0, 1.0 / 9.0 - 0.5 / 9.0}, {0.5, 0.5}});
  Rng a(11), b(11);
  std::size_t sa = 0, sb = 0;
  for (int i = 0; i < 200; ++i) {
    const auto ra = markov_service_next(sa, chain, a);
    const auto rb = markov_service_next(sb, chain, b);
    CHECK(ra == rb);
    sa = ra.second;
    sb = rb.second;
  }
}

TEST_CASE("markov empirical frequencies approach the stationary law") {
  const auto chain = ServiceModel::markov(
      {1, 30},
      {{8.0 / 9.0 + 0.5 / 9.0, 1.0 / 9.0 - 0.5 / 9.0}, {0.5, 0.5}});
  Rng init(1);
  Rng steps(2);
  std::size_t state = DiscreteSampler(chain.stationary())(init);
  const std::size_t n = 1'000'000;
  std::size_t ones = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [y, next] = markov_service_next(state, chain, steps);
    if (y == 1) ++ones;
    state = next;
  }
  const double freq = static_cast<double>(ones) / static_cast<double>(n);
  const double sigma = std::sqrt(0.9 * 0.1 / static_cast<double>(n));
  CHECK(std::abs(freq - 0.9) <= 3.0 * sigma);
}

TEST_CASE("markov service runs through the simulator") {
  SimConfig cfg;
  cfg.m = 4;
  cfg.service = ServiceModel::markov(
      {1, 30},
      {{8.0 / 9.0 + 0.5 / 9.0, 1.0 / 9.0 - 0.5 / 9.0}, {0.5, 0.5}});
  cfg.horizon_n = 50'000;
  cfg.seed = 3;
  const auto zw = simulate(cfg);
  CHECK(zw.ta_ap > 0.0);
  CHECK(zw.elapsed > 0.0);
  // identical seed reproduces the run
  const auto again = simulate(cfg);
  CHECK(zw.ta_ap == again.ta_ap);
}
