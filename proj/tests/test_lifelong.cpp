// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "sipgpi/lifelong.hpp"

using namespace sipgpi;
using sipgpi::testing::desk_model;
using sipgpi::testing::desk_sip;

namespace {
const double kHalf = std::sqrt(0.5);
}

TEST_CASE("schedule wraps after the last task") {
  const auto s = make_schedule({}, 100);
  REQUIRE(s.cycle.size() == 5);
  CHECK(s.resolved_total() == 600);
  CHECK(s.task_index_at(0) == 0);
  CHECK(s.task_index_at(99) == 0);
  CHECK(s.task_index_at(100) == 1);
  CHECK(s.task_index_at(499) == 4);
  CHECK(s.task_index_at(500) == 0);
  CHECK(s.task_at(5 * 100) == named_task(1));
  CHECK(s.task_at(6 * 100) == named_task(2));
  CHECK_THROWS_AS(make_schedule({}, 0), ConfigError);
}

TEST_CASE("estimator on orthogonal features") {
  WEstimator e(2);
  const std::array<double, 2> a{1.0, 0.0};
  const std::array<double, 2> b{0.0, 1.0};
  e.observe(a, 0.7);
  e.observe(b, -0.7);
  CHECK(e.count() == 2);
  CHECK(e.raw()[0] == doctest::Approx(0.7).epsilon(1e-5));
  CHECK(e.raw()[1] == doctest::Approx(-0.7).epsilon(1e-5));
  CHECK(e.unit()[0] == doctest::Approx(kHalf).epsilon(1e-6));
  CHECK(e.unit()[1] == doctest::Approx(-kHalf).epsilon(1e-6));
}

TEST_CASE("zero features leave the estimate unchanged") {
  WEstimator e(2);
  const TaskVector before = e.unit();
  CHECK(before[0] == doctest::Approx(kHalf));
  const std::array<double, 2> zero{0.0, 0.0};
  e.observe(zero, 5.0);
  CHECK(e.count() == 0);
  CHECK(e.unit() == before);
  CHECK_FALSE(e.observed(0));
}

TEST_CASE("unobserved features stay at the prior") {
  WEstimator e(2);
  const std::array<double, 2> a{1.0, 0.0};
  e.observe(a, -1.0);
  CHECK(e.observed(0));
  CHECK_FALSE(e.observed(1));
  CHECK(e.raw()[1] == doctest::Approx(kHalf).epsilon(1e-6));
  CHECK(e.residual(a, -1.0) < 1e-5);
  CHECK(e.residual(a, 1.0) > 1.9);
  e.reset();
  CHECK_FALSE(e.observed(0));
  CHECK(e.count() == 0);
}

TEST_CASE("synthetic rewards recover the generating task") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const TaskVector w = normalize_task({g(rng), g(rng), g(rng)});
    WEstimator e(3);
    for (int k = 0; k < 60; ++k) {
      const int t = static_cast<int>(rng() % 3);
      std::array<double, 3> phi{0.0, 0.0, 0.0};
      phi[static_cast<std::size_t>(t)] = 1.0;
      e.observe(phi, w[static_cast<std::size_t>(t)]);
    }
    REQUIRE(e.observed(0));
    REQUIRE(e.observed(1));
    REQUIRE(e.observed(2));
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(e.unit()[i] - w[i]) < 1e-6);
  }
}

TEST_CASE("streaming and shuffled updates agree") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::pair<std::array<double, 2>, double>> data;
  for (int k = 0; k < 40; ++k) data.push_back({{u(rng), u(rng)}, u(rng)});
  WEstimator a(2);
  for (const auto& [phi, r] : data) a.observe(phi, r);
  std::shuffle(data.begin(), data.end(), rng);
  WEstimator b(2);
  for (const auto& [phi, r] : data) b.observe(phi, r);
  for (std::size_t i = 0; i < 2; ++i) CHECK(std::fabs(a.raw()[i] - b.raw()[i]) < 1e-10);
}

TEST_CASE("estimator argument checks") {
  CHECK_THROWS_AS(WEstimator(0), ConfigError);
  CHECK_THROWS_AS(WEstimator(2, 0.0), ConfigError);
  CHECK_THROWS_AS(WEstimator(2, 1e-6, {1.0}), ConfigError);
  WEstimator e(2);
  const std::array<double, 3> bad{1.0, 0.0, 0.0};
  CHECK_THROWS_AS(e.observe(bad, 1.0), ConfigError);
}

TEST_CASE("maxqinit") {
  SUBCASE("single table") {
    const std::vector<double> t{1.0, -2.0, 3.0};
    CHECK(maxqinit_tables({t}) == t);
  }
  SUBCASE("two toy tables") {
    // Two states, two actions.
    const std::vector<double> a{1.0, 4.0, -1.0, 0.0};
    const std::vector<double> b{2.0, 3.0, -2.0, 0.5};
    CHECK(maxqinit_tables({a, b}) == std::vector<double>{2.0, 4.0, -1.0, 0.5});
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(maxqinit_tables({}), ConfigError);
    CHECK_THROWS_AS(maxqinit_tables({{1.0}, {1.0, 2.0}}), ConfigError);
  }
}

TEST_CASE("maxqinit dominates every cycle table on the desk") {
  const auto& m = desk_model();
  std::vector<std::vector<double>> tables;
  for (int i = 1; i <= 5; ++i) tables.push_back(solve_discounted_q(m, m.linear_rewards(named_task(i)), 0.95));
  const auto mx = maxqinit_tables(tables);
  for (const auto& t : tables) {
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(mx[i] >= t[i]);
  }
}

TEST_CASE("agent names round-trip") {
  for (auto a : {LifelongAgent::kGpiSet, LifelongAgent::kFlatQ, LifelongAgent::kMaxQInit}) {
    CHECK(parse_lifelong_agent(to_string(a)) == a);
  }
  CHECK_THROWS_AS(parse_lifelong_agent("dqn"), ConfigError);
}

TEST_CASE("the SIP agent adapts within each phase") {
  const auto& m = desk_model();
  const auto s = make_schedule({}, 20000);
  LifelongParams p;
  p.seed = 4;
  const auto log = lifelong_run(LifelongAgent::kGpiSet, &desk_sip(), s, m, p);
  for (std::int64_t ph = 0; ph < 6; ++ph) CHECK(phase_head_mean(log, s, ph) >= 0.9);
  CHECK(log.resets.size() == 5);
  const auto flat = lifelong_run(LifelongAgent::kFlatQ, nullptr, s, m, p);
  CHECK(phase_drop(flat, s, 5) > phase_drop(log, s, 5));
  CHECK(flat.resets.empty());
}

TEST_CASE("lifelong logs") {
  const auto& m = desk_model();
  const auto s = make_schedule({}, 500);
  LifelongParams p;
  p.seed = 2;
  const auto a = lifelong_run(LifelongAgent::kMaxQInit, nullptr, s, m, p);
  const auto b = lifelong_run(LifelongAgent::kMaxQInit, nullptr, s, m, p);
  REQUIRE(a.rows.size() == 60);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].step == static_cast<std::int64_t>(i) * m.horizon());
    CHECK(a.rows[i].active_task_index == s.task_index_at(a.rows[i].step));
  }
  const std::string csv = lifelong_csv({a});
  CHECK(csv == lifelong_csv({b}));
  CHECK(csv.rfind("step,episode,agent,active_task_index,return_raw,return_normalized\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 61);
  CHECK_THROWS_AS(phase_drop(a, s, 0), ProtocolError);
  CHECK_THROWS_AS(lifelong_run(LifelongAgent::kGpiSet, nullptr, s, m, p), ConfigError);
}
