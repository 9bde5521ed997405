// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

// Successor features: psi^pi(s, a) = E[sum_i gamma^i phi_{t+i+1}].

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sipgpi/core.hpp"
#include "sipgpi/itemworld.hpp"
#include "sipgpi/planning.hpp"

namespace sipgpi {

/// Dense psi table, laid out [(s * A + a) * n + i].
class SFTable {
 public:
  SFTable() = default;
  SFTable(int n_features, int num_states, int num_actions, double gamma);

  int n_features() const { return n_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  double gamma() const { return gamma_; }

  std::span<double> row(int s, int a) { return {psi_.data() + offset(s, a), static_cast<std::size_t>(n_)}; }
  std::span<const double> row(int s, int a) const {
    return {psi_.data() + offset(s, a), static_cast<std::size_t>(n_)};
  }
  /// The A rows of state s, contiguous.
  std::span<const double> state_rows(int s) const {
    return {psi_.data() + offset(s, 0), static_cast<std::size_t>(n_ * num_actions_)};
  }
  std::span<const double> data() const { return psi_; }
  std::span<double> data() { return psi_; }

  /// Q_w(s, .) = psi(s, .) . w
  void q_values(int s, const TaskVector& w, std::span<double> out) const;
  /// Q_w over the whole table, [s * A + a].
  std::vector<double> q_table(const TaskVector& w) const;

  bool same_shape(const SFTable& other) const {
    return n_ == other.n_ && num_states_ == other.num_states_ && num_actions_ == other.num_actions_ &&
           gamma_ == other.gamma_;
  }

  /// Text format: a header line with n, |S|, |A|, gamma, then one line per
  /// (s, a) in row-major order. Doubles use the shortest exact form.
  void save(const std::filesystem::path& path) const;
  static SFTable load(const std::filesystem::path& path);
  std::string serialize() const;
  static SFTable parse(const std::string& text);

  friend bool operator==(const SFTable&, const SFTable&) = default;

 private:
  std::size_t offset(int s, int a) const {
    return (static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions_) + static_cast<std::size_t>(a)) *
           static_cast<std::size_t>(n_);
  }

  int n_ = 0;
  int num_states_ = 0;
  int num_actions_ = 0;
  double gamma_ = 0.0;
  std::vector<double> psi_;
};

struct GreedyPolicy {
  TaskVector training_task;
  ActionTable action_of;

  int operator()(int s) const { return action_of[static_cast<std::size_t>(s)]; }
};

struct TrainerParams {
  double alpha = 0.1;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  /// Fraction of the episode budget over which epsilon is annealed.
  double anneal_fraction = 0.5;
  int episodes = 60000;
  /// Fraction of episodes that begin in a uniformly drawn reachable state
  /// instead of a start cell.
  double exploring_starts = 0.5;
  double gamma = 0.95;
  /// Actions within this much of the best Q count as tied when the final
  /// greedy policy is read off the learned table.
  double tie_tol = 1e-6;
  /// On-policy evaluation pass over every (s, a).
  int eval_sweeps = 3000;
  /// Initial evaluation step size; 1 is exact for deterministic dynamics.
  double eval_alpha_deterministic = 1.0;
  double eval_alpha_stochastic = 0.1;
  double eval_alpha_decay = 100.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainedPolicy {
  GreedyPolicy policy;
  /// psi of `policy` from the evaluation pass.
  SFTable sf;
  /// The off-policy control table, before re-evaluation.
  SFTable control_sf;
};

/// Q-learning-analogue SF control on w_train, followed by on-policy
/// re-evaluation of the resulting greedy policy.
TrainedPolicy train_sf_policy(const TabularModel& model, const TaskVector& w_train, const TrainerParams& params);

/// TD estimate of psi for a fixed policy: params.eval_sweeps sweeps over
/// every (s, a) with sampled transitions, seeded from derive_seed(seed, 1).
SFTable evaluate_sf_td(const TabularModel& model, std::span<const std::uint8_t> policy, const TrainerParams& params);

/// Fixed point of psi(s,a) = E[phi + gamma psi(s', pi(s'))], iterated until
/// the largest Bellman residual is below `tol`.
SFTable exact_sf(const TabularModel& model, std::span<const std::uint8_t> policy, double gamma,
                 double tol = 1e-10);

/// Largest |psi(s,a) - E[phi + gamma psi(s', pi(s'))]| over the table.
double sf_residual(const TabularModel& model, const SFTable& sf, std::span<const std::uint8_t> policy);

/// Mean of psi(s0, pi(s0)) over the model's start states.
std::vector<double> expected_sf_at_start(const TabularModel& model, const SFTable& sf,
                                         std::span<const std::uint8_t> policy);

}  // namespace sipgpi
