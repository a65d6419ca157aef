#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "aoi/sweep.hpp"

using namespace aoi;

namespace {

json base_config() {
  return json{{"m", 2},
              {"service", {{"kind", "iid"}, {"values", {1, 2}}, {"probs", {0.5, 0.5}}}},
              {"g", {{"kind", "linear"}}},
              {"horizon_n", 20000},
              {"seed", 3},
              {"menu", {0, 1, 2}}};
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("config JSON round-trips") {
  const json j = base_config();
  const auto cfg = sim_config_from_json(j);
  const json dumped = sim_config_to_json(cfg);
  const auto cfg2 = sim_config_from_json(dumped);
  CHECK(sim_config_to_json(cfg2) == dumped);
  CHECK(cfg2.m == 2);
  CHECK(cfg2.horizon_n == 20000);
  CHECK(cfg2.service == cfg.service);
}

TEST_CASE("penalty and service JSON round-trips") {
  for (const auto& g :
       {PenaltyFunction::linear(), PenaltyFunction::exponential(0.1, 1.0),
        PenaltyFunction::power(0.1), PenaltyFunction::stair(),
        PenaltyFunction::indicator(2.5)}) {
    const auto back = penalty_from_json(penalty_to_json(g));
    CHECK(back.kind() == g.kind());
    CHECK(penalty_to_json(back) == penalty_to_json(g));
  }
  const auto markov = ServiceModel::markov(
      {1, 30}, {{0.9, 0.1}, {0.5, 0.5}}, std::vector<double>{0.9, 0.1});
  CHECK(service_from_json(service_to_json(markov)) == markov);
}

TEST_CASE("check report includes the verdict and closed form") {
  std::ostringstream out;
  check_report(ServiceModel::iid({3}, {1.0}), 3, TimeGrid(), out);
  CHECK(out.str().find("zero-wait sampler is optimal") != std::string::npos);
  CHECK(out.str().find("2.25") != std::string::npos);  // bound rhs
  CHECK(out.str().find("22.5") != std::string::npos);  // zero-wait rate

  std::ostringstream bad;
  check_report(ServiceModel::iid({0, 3}, {0.9, 0.1}), 3, TimeGrid(), bad);
  CHECK(bad.str().find("not guaranteed") != std::string::npos);

  std::ostringstream even;
  check_report(ServiceModel::iid({0, 3}, {0.5, 0.5}), 3, TimeGrid(), even);
  CHECK(even.str().find("13.5") != std::string::npos);
}

TEST_CASE("sweep emits one row per point and policy, in order") {
  ExperimentSpec spec;
  spec.base_config = base_config();
  spec.base_config["horizon_n"] = 5000;
  SweepAxis axis;
  axis.name = "p";
  axis.path = "/service/probs";
  axis.values = {json::array({0.5, 0.5}), json::array({0.25, 0.75})};
  axis.labels = {"0.5", "0.25"};
  spec.axes.push_back(axis);
  spec.policies.push_back({"maf", json{{"kind", "zero_wait"}}});
  spec.policies.push_back({"rand", json{{"kind", "constant_wait"}, {"c_factor", 0.3}}});
  spec.workers = 2;

  std::ostringstream csv;
  const auto failures = run_sweep(spec, csv);
  CHECK(failures == 0);
  const auto lines = split_lines(csv.str());
  REQUIRE(lines.size() == 5);  // header + 2 points x 2 policies
  CHECK(lines[0] ==
        std::string("p,") + kSweepCsvColumns);
  CHECK(lines[1].rfind("0.5,2,maf,zero_wait", 0) == 0);
  CHECK(lines[2].rfind("0.5,2,rand,constant_wait", 0) == 0);
  CHECK(lines[3].rfind("0.25,2,maf,zero_wait", 0) == 0);
  CHECK(lines[4].rfind("0.25,2,rand,constant_wait", 0) == 0);
}

TEST_CASE("sweep rows with failures keep going and are reported") {
  ExperimentSpec spec;
  spec.base_config = base_config();
  SweepAxis axis;
  axis.name = "n";
  axis.path = "/horizon_n";
  axis.values = {json(5), json(5000)};  // 5 < warm-up, so the first point fails
  spec.axes.push_back(axis);
  spec.policies.push_back({"maf", json{{"kind", "zero_wait"}}});
  std::ostringstream csv, log;
  const auto failures = run_sweep(spec, csv, &log);
  CHECK(failures == 1);
  const auto lines = split_lines(csv.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[1].find("horizon") != std::string::npos);  // error text in the row
  CHECK(log.str().find("1 of 2 rows failed") != std::string::npos);
}

TEST_CASE("sweep can solve and tune samplers per point") {
  ExperimentSpec spec;
  spec.base_config = base_config();
  spec.base_config["horizon_n"] = 30000;
  spec.policies.push_back({"maf", json{{"kind", "rvi_rc"}}});
  spec.policies.push_back(
      {"maf", json{{"kind", "water_filling"}, {"tune", true},
                   {"tune_deliveries", 20000}, {"tune_tol", 0.05}}});
  std::ostringstream csv;
  const auto failures = run_sweep(spec, csv);
  CHECK(failures == 0);
  const auto lines = split_lines(csv.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[1].rfind("2,maf,rvi_rc", 0) == 0);
  CHECK(lines[2].rfind("2,maf,water_filling", 0) == 0);
  // the tuned threshold lands in the threshold_T column (5th field)
  const auto& row = lines[2];
  std::size_t commas = 0, pos = 0;
  for (; pos < row.size() && commas < 4; ++pos) {
    if (row[pos] == ',') ++commas;
  }
  CHECK(row.substr(pos, row.find(',', pos) - pos) != "");
}

TEST_CASE("solution cache avoids re-solving identical points") {
  SolutionCache cache;
  const auto service = ServiceModel::iid({1, 2}, {0.5, 0.5});
  const WaitingMenu menu({0, 1});
  const auto a = cache.get(service, menu, 2, PenaltyFunction::linear(), TimeGrid(), {});
  const auto b = cache.get(service, menu, 2, PenaltyFunction::linear(), TimeGrid(), {});
  CHECK(a.get() == b.get());
  const auto c = cache.get(service, menu, 3, PenaltyFunction::linear(), TimeGrid(), {});
  CHECK(a.get() != c.get());
}
