// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sipgpi/planning.hpp"

using namespace sipgpi;

namespace {

const double kHalf = std::sqrt(0.5);

// Best undiscounted return by enumerating every action sequence through
// the simulator.
double brute_force_best(const GridConfig& cfg, Cell start, const TaskVector& w) {
  int total = 1;
  for (int i = 0; i < cfg.horizon; ++i) total *= 4;
  double best = -1e300;
  for (int code = 0; code < total; ++code) {
    Rng rng(0);
    WorldState s;
    s.agent = start;
    s.start = start;
    s.items = cfg.placement;
    s.present = (1ull << cfg.num_items()) - 1;
    double ret = 0.0;
    int c = code;
    for (int t = 0; t < cfg.horizon; ++t) {
      const StepOutcome o = step(cfg, s, c % 4, rng);
      c /= 4;
      ret += linear_reward(o.phi, w);
      s = o.next;
    }
    best = std::max(best, ret);
  }
  return best;
}

GridConfig tiny() {
  GridConfig c;
  c.height = 3;
  c.width = 4;
  c.n_item_types = 2;
  c.items_per_type = 1;
  c.placement = {{{0, 3}, 0}, {{2, 3}, 1}};
  c.start_cells = {{1, 0}, {0, 0}};
  c.horizon = 6;
  return c;
}

}  // namespace

TEST_CASE("finite-horizon planner matches exhaustive enumeration") {
  const GridConfig cfg = tiny();
  const TabularModel m = TabularModel::build(cfg);
  for (double deg : {135.0, 90.0, 45.0, 10.0, -45.0, -120.0}) {
    const TaskVector w = task_at_angle(deg);
    const auto v = plan_finite_horizon(m, m.linear_rewards(w), cfg.horizon);
    for (int s0 : m.starts()) {
      CHECK(v[static_cast<std::size_t>(s0)] ==
            doctest::Approx(brute_force_best(cfg, m.agent_cell(s0), w)).epsilon(1e-12));
    }
  }
}

TEST_CASE("desk planner values") {
  const TabularModel m = TabularModel::build(GridConfig::desk());
  auto J = [&](const TaskVector& w) {
    return mean_over_starts(m, plan_finite_horizon(m, m.linear_rewards(w), 50));
  };
  CHECK(J(TaskVector::unit({1.0, 0.0})) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(J(TaskVector::unit({0.0, 1.0})) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(J(TaskVector::unit({-kHalf, -kHalf})) == 0.0);
  CHECK(J(TaskVector::unit({kHalf, kHalf})) == doctest::Approx(4.0 * kHalf).epsilon(1e-12));
}

TEST_CASE("policy evaluation of the planner's greedy policy is consistent") {
  const TabularModel m = TabularModel::build(GridConfig::desk());
  const TaskVector w = TaskVector::unit({0.3, 0.7});
  const auto r = m.linear_rewards(w);
  const auto q = solve_discounted_q(m, r, 0.95);
  const auto pi = greedy_actions(q, kNumActions);
  const auto qpi = evaluate_discounted_q(m, pi, r, 0.95);
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(std::fabs(q[i] - qpi[i]) < 1e-9);
}

TEST_CASE("stochastic backups use the slip distribution") {
  GridConfig cfg = tiny();
  cfg.slip_prob = 0.25;
  const TabularModel m = TabularModel::build(cfg);
  const auto r = m.linear_rewards(TaskVector::unit({1.0, 0.0}));
  const ActionTable stay(static_cast<std::size_t>(m.num_states()), 0);
  const auto v1 = evaluate_finite_horizon(m, stay, r, 1);
  // From (1,3) pressing up: executed up w.p. 1 - 3/16, reward 1.
  WorldState s = m.decode(m.starts()[0]);
  s.agent = {1, 3};
  CHECK(v1[static_cast<std::size_t>(m.index(s))] == doctest::Approx(0.8125).epsilon(1e-15));
}

TEST_CASE("argmax ties go to the lowest index") {
  const std::vector<double> v{1.0, 3.0, 3.0, 2.0};
  CHECK(argmax_first(v) == 1);
  const std::vector<double> near{1.0, 3.0 - 1e-9, 3.0, 2.0};
  CHECK(argmax_first(near) == 2);
  CHECK(argmax_first(near, 1e-6) == 1);
  CHECK_THROWS_AS(argmax_first(std::vector<double>{}), ProtocolError);
}
