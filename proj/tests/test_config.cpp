// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sipgpi/config.hpp"

using namespace sipgpi;

TEST_CASE("empty text gives the defaults") {
  const RunConfig c = parse_config("");
  CHECK(c.env.canonical() == GridConfig::desk().canonical());
  CHECK(c.trainer.episodes == TrainerParams{}.episodes);
  CHECK(c.sweep.count == 17);
  CHECK(c.lifelong.phase_length == 20000);
  CHECK(c.schedule().resolved_total() == 6 * 20000);
  CHECK(c.sip_tasks.empty());
}

TEST_CASE("values override defaults") {
  const RunConfig c = parse_config(
      "[env]\nslip_prob = 0.25\nplacement = 0,2,0; 1,3,0; 0,3,1; 1,2,1\n"
      "[trainer]\nepisodes = 123\n"
      "[sip]\ntasks = w5; -1,1\n"
      "[meta]\noptions = w1; w3\nepisodes = 10\n"
      "[lifelong]\ncycle = w3; w4\nphase_length = 100\n"
      "[run]\nseed = 42\njobs = 3\n");
  CHECK(c.env.slip_prob == 0.25);
  CHECK(c.trainer.episodes == 123);
  REQUIRE(c.sip_tasks.size() == 2);
  CHECK(c.sip_tasks[0] == named_task(5));
  CHECK(std::fabs(c.sip_tasks[1][0] + std::sqrt(0.5)) < 1e-15);
  CHECK(c.meta.params.options.size() == 2);
  CHECK(c.meta.params.episodes == 10);
  CHECK(c.schedule().cycle.size() == 2);
  CHECK(c.schedule().resolved_total() == 300);
  CHECK(c.seed == 42);
  CHECK(c.jobs == 3);
}

TEST_CASE("unknown keys and sections are rejected") {
  CHECK_THROWS_AS(parse_config("[env]\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nosuch]\nseed = 1\n"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("[trainer]\nalpah = 0.1\n"), doctest::Contains("trainer.alpah"), ConfigError);
}

TEST_CASE("malformed values are configuration errors") {
  CHECK_THROWS_AS(parse_config("[trainer]\nepisodes = many\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[trainer]\nepisodes = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[env]\nrespawn = maybe\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[env]\nplacement = 0,2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[env]\npreset = huge\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[trainer]\ngamma = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[run]\njobs = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[baseline]\ninit_task = 1,2,3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[env]\nrandom_placement = true\nrespawn = true\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[env\nheight = 3\n"), ConfigError);
}

TEST_CASE("rendered config parses back to the same rendering") {
  const RunConfig c = parse_config("[env]\nslip_prob = 0.125\n[baseline]\ninit_task = 0.6,0.8\n[run]\nseed = 9\n");
  const std::string text = render_config(c);
  const RunConfig back = parse_config(text);
  CHECK(render_config(back) == text);
  CHECK(back.env.canonical() == c.env.canonical());
  CHECK(back.seed == 9);
  CHECK(back.baseline.init_task == std::vector<double>{0.6, 0.8});
  CHECK(text.find("[lifelong]\ncycle = ") != std::string::npos);
}

TEST_CASE("task lists") {
  const auto t = parse_task_list("w1; 3,4 ;w9");
  REQUIRE(t.size() == 3);
  CHECK(t[0] == named_task(1));
  CHECK(t[1][0] == doctest::Approx(0.6));
  CHECK(t[2].is_raw());
  CHECK(parse_task_list(format_task_list(t)).size() == 3);
  CHECK_THROWS_AS(parse_task_list("w0"), ConfigError);
  CHECK_THROWS_AS(parse_task_list("1,x"), ConfigError);
}

TEST_CASE("sweep spec follows the config") {
  RunConfig c = parse_config("[sweep]\ncount = 5\nepisodes = 7\nruns = 2\n[run]\nseed = 3\n");
  const SweepSpec s = c.sweep_spec();
  CHECK(s.tasks.size() == 5);
  CHECK(s.angles.front() == 135.0);
  CHECK(s.angles.back() == -45.0);
  CHECK(s.episodes == 7);
  CHECK(s.runs == 2);
  CHECK(s.seed == 3);
}
