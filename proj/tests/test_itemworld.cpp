// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <deque>
#include <map>
#include <set>

#include "sipgpi/itemworld.hpp"
#include "sipgpi/random.hpp"

using namespace sipgpi;

namespace {

GridConfig small4x4() {
  GridConfig c;
  c.height = 4;
  c.width = 4;
  c.n_item_types = 2;
  c.items_per_type = 1;
  c.placement = {{{0, 3}, 0}, {{3, 0}, 1}};
  c.start_cells = {{1, 1}, {2, 2}};
  return c;
}

// Single row; the type-0 item sits behind the type-1 item.
GridConfig corridor() {
  GridConfig c;
  c.height = 1;
  c.width = 5;
  c.n_item_types = 2;
  c.items_per_type = 1;
  c.placement = {{{0, 4}, 0}, {{0, 2}, 1}};
  c.start_cells = {{0, 0}};
  return c;
}

int manhattan(Cell a, Cell b) { return std::abs(a.row - b.row) + std::abs(a.col - b.col); }

}  // namespace

TEST_CASE("reset on a fixed config") {
  const GridConfig cfg = small4x4();
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const WorldState s = reset(cfg, rng);
    CHECK(s.present == 0b11);
    CHECK(s.steps_elapsed == 0);
    CHECK((s.agent == Cell{1, 1} || s.agent == Cell{2, 2}));
  }
}

TEST_CASE("reset on the large config") {
  const GridConfig cfg = GridConfig::large();
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const WorldState s = reset(cfg, rng);
    REQUIRE(s.items.size() == 10);
    std::set<Cell> cells;
    std::map<int, int> per_type;
    for (const auto& it : s.items) {
      cells.insert(it.cell);
      ++per_type[it.type];
      CHECK(manhattan(it.cell, s.agent) >= 2);
    }
    CHECK(cells.size() == 10);
    CHECK(per_type[0] == 5);
    CHECK(per_type[1] == 5);
  }
}

TEST_CASE("reset is seeded") {
  const GridConfig cfg = GridConfig::large();
  Rng a(99), b(99);
  const WorldState x = reset(cfg, a);
  const WorldState y = reset(cfg, b);
  CHECK(x.items == y.items);
  CHECK(x.agent == y.agent);
}

TEST_CASE("reset rejects impossible layouts") {
  GridConfig cfg = GridConfig::large();
  cfg.height = 2;
  cfg.width = 3;
  Rng rng(1);
  CHECK_THROWS_AS(reset(cfg, rng), ConfigError);
  GridConfig bad = small4x4();
  bad.start_cells = {{0, 2}};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = small4x4();
  bad.placement[1].cell = bad.placement[0].cell;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("step dynamics") {
  GridConfig cfg = small4x4();
  cfg.start_cells = {{1, 1}};
  Rng rng(5);
  WorldState s = reset(cfg, rng);

  SUBCASE("wall keeps the agent in place") {
    s.agent = {0, 0};
    const StepOutcome o = step(cfg, s, static_cast<int>(Action::kUp), rng);
    CHECK(o.next.agent == Cell{0, 0});
    CHECK(o.phi.is_zero());
  }
  SUBCASE("pickup fires the feature and removes the item") {
    s.agent = {0, 2};
    const StepOutcome o = step(cfg, s, static_cast<int>(Action::kRight), rng);
    CHECK(o.phi.phi == std::vector<double>{1.0, 0.0});
    CHECK_FALSE(o.next.item_present(0));
    CHECK(o.next.item_present(1));
  }
  SUBCASE("episodes last exactly the horizon") {
    int n = 0;
    bool terminal = false;
    while (!terminal) {
      const StepOutcome o = step(cfg, s, n % kNumActions, rng);
      s = o.next;
      terminal = o.terminal;
      ++n;
    }
    CHECK(n == 50);
    CHECK_THROWS_AS(step(cfg, s, 0, rng), ProtocolError);
  }
}

TEST_CASE("slip draws every action") {
  GridConfig cfg = GridConfig::desk();
  cfg.slip_prob = 0.25;
  Rng rng(8);
  WorldState s = reset(cfg, rng);
  std::map<int, int> executed;
  for (int i = 0; i < 4000; ++i) {
    s.steps_elapsed = 0;
    ++executed[step(cfg, s, 0, rng).executed_action];
  }
  // P(executed = intended) = 1 - 3p/4.
  CHECK(executed[0] / 4000.0 == doctest::Approx(0.8125).epsilon(0.05));
  CHECK(executed.size() == 4);
}

TEST_CASE("respawn keeps the item count") {
  GridConfig cfg = GridConfig::large();
  Rng rng(21);
  WorldState s = reset(cfg, rng);
  for (int t = 0; t < cfg.horizon; ++t) {
    s = step(cfg, s, static_cast<int>(uniform_index(rng, 4)), rng).next;
    CHECK(s.counts(2) == std::vector<int>{5, 5});
    CHECK(s.present == (1ull << 10) - 1);
  }
}

TEST_CASE("tabular index round-trips") {
  const TabularModel m = TabularModel::build(GridConfig::desk());
  CHECK(m.num_states() == 30 * 16);
  for (int s = 0; s < m.num_states(); ++s) {
    if (!m.reachable(s)) continue;
    CHECK(m.index(m.decode(s)) == s);
  }
}

TEST_CASE("tabular transitions agree with the simulator") {
  const GridConfig cfg = GridConfig::desk();
  const TabularModel m = TabularModel::build(cfg);
  Rng rng(0);
  for (int s = 0; s < m.num_states(); ++s) {
    if (!m.valid(s)) continue;
    for (int a = 0; a < kNumActions; ++a) {
      const StepOutcome o = step(cfg, m.decode(s), a, rng);
      CHECK(m.index(o.next) == m.next(s, a));
      CHECK(o.phi.active_type() == m.feature_type(s, a));
    }
  }
}

TEST_CASE("enumeration cap") {
  GridConfig cfg = GridConfig::desk();
  cfg.enumeration_cap = 100;
  CHECK_THROWS_AS(TabularModel::build(cfg), CapacityError);
  CHECK_THROWS_AS(verify_sif(cfg), CapacityError);
}

TEST_CASE("verify_sif on the 4x4 config") {
  const GridConfig cfg = small4x4();
  const SifReport rep = verify_sif(cfg);
  CHECK(rep.pass);
  REQUIRE(rep.witnesses.size() == 4);
  // Oracle: with one item per type and the other item off the straight
  // line, the shortest witness is the Manhattan distance.
  for (const FeatureWitness& w : rep.witnesses) {
    CHECK(w.found);
    const Cell goal = cfg.placement[static_cast<std::size_t>(w.type)].cell;
    CHECK(static_cast<int>(w.actions.size()) == manhattan(w.start, goal));
    CHECK(w.actions.size() <= 6);
    // Replay the witness through the simulator.
    WorldState s;
    s.agent = w.start;
    s.start = w.start;
    s.items = cfg.placement;
    s.present = 0b11;
    Rng rng(0);
    for (int a : w.actions) {
      const StepOutcome o = step(cfg, s, a, rng);
      const int t = o.phi.active_type();
      CHECK((t == -1 || t == w.type));
      s = o.next;
    }
    CHECK_FALSE(s.item_present(static_cast<std::size_t>(w.type)));
  }
}

TEST_CASE("verify_sif reports condition (i)") {
  GridConfig cfg = small4x4();
  cfg.start_cells = {{1, 3}, {2, 2}};
  const SifReport rep = verify_sif(cfg);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.condition_i);
  CHECK_FALSE(rep.violations.empty());
}

TEST_CASE("verify_sif reports condition (ii)") {
  const GridConfig cfg = corridor();
  const SifReport rep = verify_sif(cfg);
  CHECK(rep.condition_i);
  CHECK_FALSE(rep.condition_ii);
  // Exhaustive oracle: every action sequence of length <= 6 that removes
  // the type-0 item also removes the type-1 item.
  bool found = false;
  for (int len = 1; len <= 6 && !found; ++len) {
    int total = 1;
    for (int i = 0; i < len; ++i) total *= 4;
    for (int code = 0; code < total && !found; ++code) {
      Rng rng(0);
      WorldState s = reset(cfg, rng);
      int c = code;
      bool other = false;
      for (int i = 0; i < len; ++i) {
        const StepOutcome o = step(cfg, s, c % 4, rng);
        c /= 4;
        other = other || o.phi.active_type() == 1;
        s = o.next;
      }
      found = !s.item_present(0) && !other;
    }
  }
  CHECK_FALSE(found);
}

TEST_CASE("verify_sif on the desk config") {
  const SifReport rep = verify_sif(GridConfig::desk());
  CHECK(rep.pass);
  for (const auto& w : rep.witnesses) CHECK(w.found);
}

TEST_CASE("verify_sif refuses stochastic configs") {
  GridConfig cfg = GridConfig::desk();
  cfg.slip_prob = 0.1;
  CHECK_THROWS_AS(verify_sif(cfg), ConfigError);
}

TEST_CASE("egocentric encoding") {
  const GridConfig cfg = GridConfig::large();
  Rng rng(4);
  const WorldState s = reset(cfg, rng);
  const Observation obs = encode_egocentric(cfg, s);
  CHECK(obs.rows == 11);
  CHECK(obs.cols == 11);
  CHECK(obs.channels == 3);

  SUBCASE("items sit at their shifted offsets") {
    for (const auto& it : s.items) {
      const int r = ((it.cell.row - s.agent.row) % 11 + 11) % 11;
      const int c = ((it.cell.col - s.agent.col) % 11 + 11) % 11;
      CHECK(obs.at(r, c, it.type) == 1.0f);
    }
    // The agent's own cell never holds an item or wall.
    for (int ch = 0; ch < 3; ++ch) CHECK(obs.at(0, 0, ch) == 0.0f);
  }
  SUBCASE("empty grid has only walls") {
    WorldState e = s;
    e.present = 0;
    const Observation o = encode_egocentric(cfg, e);
    float items = 0, walls = 0;
    for (int r = 0; r < 11; ++r) {
      for (int c = 0; c < 11; ++c) {
        items += o.at(r, c, 0) + o.at(r, c, 1);
        walls += o.at(r, c, 2);
      }
    }
    CHECK(items == 0.0f);
    CHECK(walls == 21.0f);
  }
  SUBCASE("moving the agent shifts every channel back") {
    WorldState moved = s;
    moved.agent = {(s.agent.row + 3) % 10, (s.agent.col + 2) % 10};
    const int dr = moved.agent.row - s.agent.row;
    const int dc = moved.agent.col - s.agent.col;
    const Observation o2 = encode_egocentric(cfg, moved);
    for (int r = 0; r < 11; ++r) {
      for (int c = 0; c < 11; ++c) {
        for (int ch = 0; ch < 3; ++ch) {
          CHECK(o2.at(((r - dr) % 11 + 11) % 11, ((c - dc) % 11 + 11) % 11, ch) == obs.at(r, c, ch));
        }
      }
    }
  }
}

TEST_CASE("actions parse") {
  CHECK(parse_action("left") == 2);
  CHECK(parse_action("r") == 3);
  CHECK_THROWS_AS(parse_action("jump"), ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
  GridConfig a = GridConfig::desk();
  GridConfig b = GridConfig::desk();
  CHECK(a.hash() == b.hash());
  b.slip_prob = 0.125;
  CHECK(a.hash() != b.hash());
}
