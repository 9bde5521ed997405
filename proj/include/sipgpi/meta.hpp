// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

// Nonlinear downstream tasks and a meta-policy over preference vectors:
// omega(s) picks w from a small menu W', and the primitive action is the
// GPI action for that w.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sipgpi/gpi.hpp"

namespace sipgpi {

enum class NonlinearKind { kSequential, kBalanced };

NonlinearKind parse_nonlinear_kind(const std::string& name);
std::string to_string(NonlinearKind kind);

/// Pickup of `type` (or -1 for no pickup) given per-type counts present
/// before it. Type 0 must be cleared first: type 0 -> +1, type 1 -> -1
/// while any type-0 item remains; afterwards type 1 -> +1.
double sequential_reward(std::span<const int> counts_before, int type);
/// +1 for the strictly most abundant type, -1 for a strictly scarcer one,
/// 0 on ties (counts before the pickup).
double balanced_reward(std::span<const int> counts_before, int type);
double nonlinear_reward(NonlinearKind kind, std::span<const int> counts_before, int type);

/// r[s * A + b] for a no-respawn tabular model.
RewardTable nonlinear_rewards(const TabularModel& model, NonlinearKind kind);

struct LearningCurve {
  std::string agent;
  std::vector<int> episodes;
  /// Exact normalized return of the greedy policy at each checkpoint.
  std::vector<double> returns;

  /// Mean over checkpoints.
  double auc() const;
  /// Mean over the last `tail` checkpoints.
  double asymptote(int tail = 5) const;
};

struct MetaParams {
  /// W'; empty means w1..w5.
  std::vector<TaskVector> options;
  double alpha = 0.1;
  double gamma = 0.95;
  /// Linear anneal from epsilon_start to epsilon over the first
  /// anneal_fraction of the episodes.
  double epsilon_start = 1.0;
  double epsilon = 0.05;
  double anneal_fraction = 0.5;
  int episodes = 100000;
  /// Fraction of training episodes that begin in a uniformly drawn
  /// reachable state; checkpoints always use the start distribution.
  double exploring_starts = 0.5;
  int eval_every = 2000;
  /// Primitive steps a chosen w is kept for.
  int commit_steps = 1;
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<TaskVector> resolved_options() const;
  double epsilon_at(int episode) const;
};

struct MetaResult {
  std::vector<double> q_meta;
  /// Greedy meta-action per state, and the primitive policy it induces.
  std::vector<int> option_of;
  ActionTable policy;
  LearningCurve curve;
};

/// Q-learning over meta-actions; every step acts with gpi_action(set, W'[k], s).
MetaResult train_meta(NonlinearKind kind, const PolicySet& set, const TabularModel& model, const MetaParams& params,
                      const std::string& agent);

struct FlatQResult {
  std::vector<double> q;
  ActionTable policy;
  LearningCurve curve;
};

/// One-step Q-learning on primitive actions; same schedule as train_meta.
FlatQResult qlearn_baseline(NonlinearKind kind, const TabularModel& model, const MetaParams& params,
                            const std::string& agent = "flat_q");

/// Planner J* of the nonlinear task, mean over starts.
double nonlinear_oracle(const TabularModel& model, NonlinearKind kind);

/// Rows (episode, mean, stderr, agent); one group of runs per agent, all
/// sharing checkpoints.
std::string curves_csv(const std::vector<std::vector<LearningCurve>>& agents);

}  // namespace sipgpi
