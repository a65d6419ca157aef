#include <catch2/catch_amalgamated.hpp>

#include "aoi/rng.hpp"
#include "aoi/state.hpp"

using aoi::SystemState;
using aoi::Tick;
using aoi::WaitingMenu;

TEST_CASE("states sort non-increasing and expose the age sum") {
  const SystemState s({1, 5, 3});
  CHECK(s.ages() == std::vector<Tick>{5, 3, 1});
  CHECK(s.age_sum() == 9);
  CHECK_THROWS_AS(SystemState({-1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(SystemState({}), std::invalid_argument);
}

TEST_CASE("delivery step arithmetic") {
  CHECK(advance(SystemState({5, 3, 1}), 2, 4).ages() == std::vector<Tick>{9, 7, 4});
  CHECK(advance(SystemState({7}), 3, 2).ages() == std::vector<Tick>{2});
  CHECK(advance(SystemState({4, 2}), 0, 1).ages() == std::vector<Tick>{3, 1});
}

TEST_CASE("delivery step keeps states sorted for random inputs") {
  aoi::Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    std::vector<Tick> ages(1 + rng.bounded(6));
    for (auto& a : ages) a = static_cast<Tick>(rng.bounded(40));
    const auto next =
        advance(SystemState(ages), static_cast<Tick>(rng.bounded(5)),
                static_cast<Tick>(rng.bounded(5)));
    for (std::size_t l = 0; l + 1 < next.m(); ++l) CHECK(next[l] >= next[l + 1]);
    CHECK(next[next.m() - 1] >= 0);
  }
}

TEST_CASE("waiting menu is sorted, deduplicated, and anchored at zero") {
  const WaitingMenu menu({3, 0, 1, 1});
  CHECK(menu.values() == std::vector<Tick>{0, 1, 3});
  CHECK(menu.contains(1));
  CHECK_FALSE(menu.contains(2));
  CHECK(menu.index_of(3) == 2);
  CHECK_THROWS_AS(menu.index_of(2), std::invalid_argument);
  CHECK_THROWS_AS(WaitingMenu({1, 2}), std::invalid_argument);  // no zero
  CHECK_THROWS_AS(WaitingMenu({}), std::invalid_argument);
  CHECK_THROWS_AS(WaitingMenu({-1, 0}), std::invalid_argument);
}

TEST_CASE("componentwise order") {
  CHECK(SystemState({2, 1}).componentwise_leq(SystemState({3, 1})));
  CHECK_FALSE(SystemState({4, 1}).componentwise_leq(SystemState({3, 2})));
}
