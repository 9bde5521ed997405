// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sipgpi/core.hpp"

using namespace sipgpi;

namespace {
const double kHalf = std::sqrt(0.5);
}

TEST_CASE("linear_reward is a dot product") {
  CHECK(linear_reward({{1.0, 0.0}}, TaskVector::unit({kHalf, -kHalf})) == doctest::Approx(kHalf));
  CHECK(linear_reward(FeatureVector::zero(2), TaskVector::unit({0.3, -0.8})) == 0.0);
  CHECK(linear_reward({{0.0, 1.0}}, TaskVector::unit({-kHalf, kHalf})) == doctest::Approx(kHalf));
  CHECK_THROWS_AS(linear_reward({{1.0, 0.0, 0.0}}, TaskVector::unit({1.0, 0.0})), ConfigError);
}

TEST_CASE("linear_reward scales with w") {
  const FeatureVector phi{{0.0, 1.0}};
  const TaskVector w = TaskVector::unit({0.6, -0.8});
  for (double c : {0.5, 2.0, 4.0, 1e3}) {
    CHECK(linear_reward(phi, w.scaled(c)) == doctest::Approx(c * linear_reward(phi, w)).epsilon(1e-15));
  }
}

TEST_CASE("normalize_task") {
  SUBCASE("axis") {
    const TaskVector w = normalize_task({2.0, 0.0});
    CHECK(w[0] == 1.0);
    CHECK(w[1] == 0.0);
    CHECK_FALSE(w.is_raw());
  }
  SUBCASE("diagonal") {
    const TaskVector w = normalize_task({-2.0, -2.0});
    CHECK(w[0] == doctest::Approx(-kHalf).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(-kHalf).epsilon(1e-15));
  }
  SUBCASE("zero") { CHECK_THROWS_AS(normalize_task({0.0, 0.0}), DegenerateTaskError); }
  SUBCASE("idempotent") {
    for (double a = -3.0; a < 3.0; a += 0.37) {
      const TaskVector once = normalize_task({a, 1.3 - a});
      const TaskVector twice = normalize_task(once.values());
      CHECK(std::fabs(once[0] - twice[0]) <= 1e-12);
      CHECK(std::fabs(once[1] - twice[1]) <= 1e-12);
    }
  }
}

TEST_CASE("raw task vectors keep their values") {
  const TaskVector z = TaskVector::raw({0.0, 0.0});
  CHECK(z.is_raw());
  CHECK(z.norm() == 0.0);
  CHECK_THROWS_AS(TaskVector::unit({0.0, 0.0}), DegenerateTaskError);
}

TEST_CASE("task_at_angle walks the circle") {
  CHECK(task_at_angle(135.0)[0] == doctest::Approx(-kHalf));
  CHECK(task_at_angle(135.0)[1] == doctest::Approx(kHalf));
  CHECK(task_at_angle(0.0)[0] == doctest::Approx(1.0));
  CHECK(std::fabs(task_at_angle(-45.0).norm() - 1.0) < 1e-12);
}

TEST_CASE("feature vectors") {
  const FeatureVector e = FeatureVector::event(2, 1, 1.0);
  CHECK(e.active_type() == 1);
  CHECK_FALSE(e.is_zero());
  CHECK(FeatureVector::event(2, -1).is_zero());
  CHECK(FeatureVector::zero(3).active_type() == -1);
}

TEST_CASE("discount factor range") {
  CHECK(DiscountFactor(0.0).value() == 0.0);
  CHECK(DiscountFactor(0.95).value() == 0.95);
  CHECK_THROWS_AS(DiscountFactor(1.0), ConfigError);
  CHECK_THROWS_AS(DiscountFactor(-0.1), ConfigError);
}
