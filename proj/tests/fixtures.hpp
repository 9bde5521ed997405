// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

// Trained sets shared by several test files; built once per process.

#pragma once

#include "sipgpi/baselines.hpp"
#include "sipgpi/harness.hpp"
#include "sipgpi/sip.hpp"

namespace sipgpi::testing {

inline const TabularModel& desk_model() {
  static const TabularModel m = TabularModel::build(GridConfig::desk());
  return m;
}

inline TrainerParams default_trainer(std::uint64_t seed = 7) {
  TrainerParams p;
  p.seed = seed;
  return p;
}

inline const PolicySet& desk_sip() {
  static const PolicySet set = build_sip(desk_model(), default_trainer(), 2);
  return set;
}

/// Policies trained on w2 = (0, 1) and w4 = (1, 0).
inline const PolicySet& desk_pi24() {
  static const PolicySet set = [] {
    PolicySet s = train_policy_set(desk_model(), {named_task(2), named_task(4)}, {"pi_2", "pi_4"},
                                   default_trainer(), 2);
    s.set_label("pi24");
    return s;
  }();
  return set;
}

/// pi_1..pi_9 on the desk config.
inline const PolicySet& desk_references() {
  static const PolicySet set = reference_policies(desk_model(), default_trainer(), 4);
  return set;
}

/// Greedy policy of Q* for w, read off value iteration.
inline ActionTable optimal_policy(const TaskVector& w) {
  const auto& m = desk_model();
  return greedy_actions(solve_discounted_q(m, m.linear_rewards(w), 0.95), kNumActions, 1e-9);
}

}  // namespace sipgpi::testing
