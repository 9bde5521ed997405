// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

// Exact dynamic programming over a TabularModel. Rewards are given per
// executed transition as r[s * A + b]; the expected reward of an intended
// action folds in the slip distribution.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sipgpi/itemworld.hpp"

namespace sipgpi {

using RewardTable = std::vector<double>;
using ActionTable = std::vector<std::uint8_t>;

/// Max over all (non-stationary) action sequences of the expected
/// undiscounted return over `horizon` steps; one value per state.
std::vector<double> plan_finite_horizon(const TabularModel& model, std::span<const double> rewards,
                                        int horizon);

/// Expected undiscounted `horizon`-step return of a stationary policy.
std::vector<double> evaluate_finite_horizon(const TabularModel& model, std::span<const std::uint8_t> policy,
                                            std::span<const double> rewards, int horizon);

/// Uniform average of `values` over the model's start states.
double mean_over_starts(const TabularModel& model, std::span<const double> values);

/// Q^pi for the discounted infinite-horizon criterion, by Gauss-Seidel
/// sweeps until the largest change drops below `tol`.
std::vector<double> evaluate_discounted_q(const TabularModel& model, std::span<const std::uint8_t> policy,
                                          std::span<const double> rewards, double gamma, double tol = 1e-12);

/// Q* by value iteration.
std::vector<double> solve_discounted_q(const TabularModel& model, std::span<const double> rewards,
                                       double gamma, double tol = 1e-12);

/// First action within `tie_tol` of the row maximum, per state.
ActionTable greedy_actions(std::span<const double> q, int num_actions, double tie_tol = 0.0);

/// Index of the first entry within `tie_tol` of the maximum.
int argmax_first(std::span<const double> values, double tie_tol = 0.0);

}  // namespace sipgpi
