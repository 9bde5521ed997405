// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

// Diverse-policy-set constructors used as baselines (worst-case task
// iteration, mean-SF repulsion, and a tabular skill-discovery variant), plus
// reward-equivalence classification against reference policies.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sipgpi/gpi.hpp"

namespace sipgpi {

/// Uniform direction on the unit sphere in R^n.
TaskVector random_unit_task(int n, std::uint64_t seed);

/// argmin over unit w of max_i psibar_i . w. n = 2 scans a 0.5 deg grid
/// (first minimum wins); larger n runs projected subgradient descent from
/// 32 seeded restarts.
TaskVector smp_next_task(const std::vector<std::vector<double>>& psibars, std::uint64_t seed = 0);

/// -(1/k) sum_i psibar_i normalized; nullopt when that vector is (near) zero.
std::optional<TaskVector> dsp_next_task(const std::vector<std::vector<double>>& psibars);

struct BaselineResult {
  std::string method;
  PolicySet set;
  /// Task each member was trained on, in order.
  std::vector<TaskVector> tasks;
  /// Member indices whose task fell back to the previous one.
  std::vector<int> degenerate_steps;
  std::string to_json() const;
  /// Writes the set plus baseline.json to `dir`.
  void save(const std::filesystem::path& dir) const;
};

/// `size` members; the first is trained on init_task. Member k uses seed
/// derive_seed(params.seed, k).
BaselineResult smp_build(const TabularModel& model, int size, const TaskVector& init_task,
                         const TrainerParams& params);

/// `size` members in total: init_task, then one per mean-SF repulsion step.
BaselineResult dsp_build(const TabularModel& model, int size, const TaskVector& init_task,
                         const TrainerParams& params);

struct DiaynParams {
  int skills = 3;
  int episodes = 30000;
  double policy_lr = 1e-3;
  double discriminator_lr = 1e-3;
  double entropy_coef = 0.001;
  double value_loss_coef = 0.05;
  double grad_clip = 1.0;
  double gamma = 0.95;
  /// SF step size for the concurrent on-policy estimate.
  double sf_alpha = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Outcome category of an episode: bit t set iff feature t fired at least once.
int event_category(const std::vector<int>& counts);

/// Laplace-smoothed q(z | category) from a (categories x skills) table.
double discriminator_prob(const std::vector<double>& table, int skills, int category, int z);

struct DiaynResult {
  BaselineResult build;
  /// Per-skill stochastic policies, [z][s * A + a].
  std::vector<std::vector<double>> action_probs;
  /// Concurrently learned SFs of the stochastic skills.
  std::vector<SFTable> online_sf;
  bool degenerate = false;
};

/// Tabular skill discovery. Each skill's logits follow REINFORCE with a
/// per-state baseline and entropy bonus on the episode pseudo-reward
/// log q(z | category) - log(1 / k). Returned members are the greedy skills
/// with SFs re-estimated by evaluate_sf_td using `trainer`.
DiaynResult diayn_build(const TabularModel& model, const DiaynParams& params, const TrainerParams& trainer);

/// pi_1..pi_9 trained on named_task(1..9).
PolicySet reference_policies(const TabularModel& model, const TrainerParams& params, int jobs = 1);

struct RepLabel {
  int reference = -1;
  std::string label;
  /// Max over sweep tasks of |J_candidate - J_reference|.
  double distance = 0.0;
  double tolerance = 0.0;
  bool equivalent = false;
};

/// Default tolerance: 0.1 x the largest planner J* over the sweep.
double rep_tolerance(const TabularModel& model, const std::vector<TaskVector>& tasks);

/// Nearest reference by exact sweep returns; ties go to the earlier reference.
RepLabel rep_classify(std::span<const std::uint8_t> candidate, const PolicySet& references,
                      const TabularModel& model, const std::vector<TaskVector>& tasks, double tolerance);

}  // namespace sipgpi
