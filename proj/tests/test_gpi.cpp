// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.hpp"

using namespace sipgpi;
using sipgpi::testing::desk_model;
using sipgpi::testing::desk_sip;

namespace {

const double kHalf = std::sqrt(0.5);

// One-state, two-feature set with hand-written rows.
PolicySet toy_set(std::vector<std::vector<double>> rows_a, std::vector<std::vector<double>> rows_b) {
  PolicySet set("toy");
  for (auto* rows : {&rows_a, &rows_b}) {
    if (rows->empty()) continue;
    SFTable sf(2, 1, kNumActions, 0.9);
    for (int a = 0; a < kNumActions; ++a) {
      sf.row(0, a)[0] = (*rows)[static_cast<std::size_t>(a)][0];
      sf.row(0, a)[1] = (*rows)[static_cast<std::size_t>(a)][1];
    }
    set.add({"m" + std::to_string(set.size()), {TaskVector::unit({1.0, 0.0}), ActionTable{0}}, sf});
  }
  return set;
}

}  // namespace

TEST_CASE("gpe is psi . w") {
  const PolicySet set = toy_set({{2, 3}, {0, 0}, {0, 0}, {0, 0}}, {{1, 1}, {0, 0}, {0, 0}, {0, 0}});
  CHECK(gpe(set, TaskVector::unit({1.0, 0.0}), 0, 0) == std::vector<double>{2.0, 1.0});
  const auto q = gpe(set, TaskVector::unit({kHalf, kHalf}), 0, 0);
  CHECK(q[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(gpe(set, TaskVector::unit({1.0, 0.0, 0.0}), 0, 0), ConfigError);
}

TEST_CASE("gpi_action maximizes over members, then actions") {
  const PolicySet set = toy_set({{1, 0}, {0, 0}, {3, 0}, {0, 0}}, {{0, 0}, {0, 5}, {0, 0}, {0, 0}});
  CHECK(gpi_action(set, TaskVector::unit({1.0, 0.0}), 0) == 2);
  CHECK(gpi_action(set, TaskVector::unit({0.0, 1.0}), 0) == 1);
  // The all-zero member wins every action; lowest index.
  CHECK(gpi_action(set, TaskVector::unit({-1.0, 0.0}), 0) == 0);
  SUBCASE("exact ties go to the lowest action") {
    const PolicySet tie = toy_set({{1, 0}, {0, 0}, {1, 0}, {0, 0}}, {{0, 0}, {1, 0}, {0, 0}, {0, 0}});
    CHECK(gpi_action(tie, TaskVector::unit({1.0, 0.0}), 0) == 0);
  }
  SUBCASE("empty set") { CHECK_THROWS_AS(gpi_action(PolicySet{}, TaskVector::unit({1.0, 0.0}), 0), ProtocolError); }
}

TEST_CASE("singleton set reduces to the member's greedy policy") {
  const auto& m = desk_model();
  PolicySet one;
  one.add(desk_sip()[0]);
  for (double deg : {0.0, 60.0, 135.0, 250.0}) {
    const TaskVector w = task_at_angle(deg);
    const auto greedy = greedy_actions(one[0].sf.q_table(w), kNumActions);
    CHECK(gpi_policy(one, w) == greedy);
  }
  CHECK(gpi_action(one, TaskVector::unit({1.0, -1.0}), m.starts()[0]) ==
        one[0].policy(m.starts()[0]));
}

TEST_CASE("gpi is invariant to positive task scaling") {
  const auto& set = desk_sip();
  for (double deg = -45.0; deg <= 135.0; deg += 11.25) {
    const TaskVector w = task_at_angle(deg);
    for (double c : {0.5, 2.0, 8.0}) {
      CHECK(gpi_policy(set, w) == gpi_policy(set, w.scaled(c)));
    }
  }
}

TEST_CASE("gpe of exact SFs matches direct policy evaluation") {
  const auto& m = desk_model();
  for (const auto& member : desk_sip().members()) {
    const SFTable ex = exact_sf(m, member.policy.action_of, 0.95);
    PolicySet single;
    single.add({member.label, member.policy, ex});
    const TaskVector w = TaskVector::unit({0.8, -0.6});
    const auto oracle = evaluate_discounted_q(m, member.policy.action_of, m.linear_rewards(w), 0.95);
    for (int s = 0; s < m.num_states(); s += 7) {
      for (int a = 0; a < kNumActions; ++a) {
        CHECK(std::fabs(gpe(single, w, s, a)[0] - oracle[static_cast<std::size_t>(s) * kNumActions + a]) < 1e-8);
      }
    }
  }
}

TEST_CASE("SIP rollouts on the desk config") {
  const auto& m = desk_model();
  const auto& set = desk_sip();
  Rng rng(1);
  SUBCASE("w5 collects both type-1 items and nothing else") {
    const ActionTable pi = gpi_policy(set, named_task(5));
    for (int s0 : m.starts()) {
      int s = s0;
      int own = 0, other = 0;
      for (int t = 0; t < m.horizon(); ++t) {
        const int type = m.feature_type(s, pi[static_cast<std::size_t>(s)]);
        own += type == 0;
        other += type == 1;
        s = m.next(s, pi[static_cast<std::size_t>(s)]);
      }
      CHECK(own == 2);
      CHECK(other == 0);
    }
  }
  SUBCASE("w4 returns the planner optimum") {
    const auto ret = gpi_rollout(set, named_task(4), m, 50, rng);
    for (double r : ret) CHECK(r == 2.0);
    CHECK(oracle_return(m, named_task(4)) == 2.0);
  }
  SUBCASE("non-positive tasks with an avoiding member return 0") {
    // A policy that never moves collects nothing; with its exact SFs in
    // the set, every item-taking action scores below 0.
    const ActionTable still(static_cast<std::size_t>(m.num_states()), static_cast<std::uint8_t>(Action::kDown));
    PolicySet with_idle = set;
    with_idle.add({"idle", {named_task(7), still}, exact_sf(m, still, 0.95)});
    for (int k : {6, 7, 8}) {
      for (double r : gpi_rollout(with_idle, named_task(k), m, 30, rng)) CHECK(r == 0.0);
    }
  }
  SUBCASE("deterministic env, fixed start: identical returns") {
    GridConfig cfg = GridConfig::desk();
    cfg.start_cells = {{4, 0}};
    const TabularModel one = TabularModel::build(cfg);
    const auto ret = rollout_returns(one, gpi_policy(set, named_task(3)), one.linear_rewards(named_task(3)), 20, rng);
    for (double r : ret) CHECK(r == ret.front());
  }
}

TEST_CASE("GPI dominates every member") {
  const auto& m = desk_model();
  const auto& set = desk_sip();
  for (const TaskVector& w : sweep_tasks()) {
    const auto r = m.linear_rewards(w);
    const auto gpi_v = evaluate_finite_horizon(m, gpi_policy(set, w), r, m.horizon());
    for (const auto& member : set.members()) {
      const auto v = evaluate_finite_horizon(m, member.policy.action_of, r, m.horizon());
      for (int s0 : m.starts()) {
        CHECK(gpi_v[static_cast<std::size_t>(s0)] >= v[static_cast<std::size_t>(s0)] - 1e-8);
      }
    }
  }
}

TEST_CASE("policy sets round-trip through a directory") {
  const auto dir = std::filesystem::temp_directory_path() / "sipgpi_set_roundtrip";
  std::filesystem::remove_all(dir);
  desk_sip().save(dir);
  const PolicySet back = PolicySet::load(dir);
  REQUIRE(back.size() == desk_sip().size());
  CHECK(back.label() == desk_sip().label());
  for (std::size_t k = 0; k < back.size(); ++k) {
    CHECK(back[k].label == desk_sip()[k].label);
    CHECK(back[k].sf == desk_sip()[k].sf);
    CHECK(back[k].policy.action_of == desk_sip()[k].policy.action_of);
    CHECK(back[k].policy.training_task == desk_sip()[k].policy.training_task);
  }
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(PolicySet::load(dir), IoError);
}

TEST_CASE("members must share a shape") {
  PolicySet set;
  set.add({"a", {TaskVector::unit({1.0, 0.0}), ActionTable(3, 0)}, SFTable(2, 3, 4, 0.9)});
  CHECK_THROWS_AS(set.add({"b", {TaskVector::unit({1.0, 0.0}), ActionTable(3, 0)}, SFTable(2, 3, 4, 0.8)}), ConfigError);
  CHECK_THROWS_AS(set.add({"c", {TaskVector::unit({1.0, 0.0}), ActionTable(2, 0)}, SFTable(2, 3, 4, 0.9)}), ConfigError);
}
