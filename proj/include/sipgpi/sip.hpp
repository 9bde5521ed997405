// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

// Sets of independent policies: one policy per feature, each collecting its
// own feature while leaving every other feature at its initial value.

#pragma once

#include <string>
#include <vector>

#include "sipgpi/gpi.hpp"

namespace sipgpi {

/// w_t[t] = +sqrt(1/n), w_t[j] = -sqrt(1/n) for j != t, normalized.
std::vector<TaskVector> default_sip_tasks(int n);

/// Throws ConfigError unless |W| = n and every w_t has w_t[t] > 0 and
/// w_t[j] < 0 elsewhere.
void check_sip_tasks(const std::vector<TaskVector>& tasks, int n);

/// Trains one policy per task; member t uses seed derive_seed(params.seed, t).
/// Up to `jobs` trainings run concurrently; member order follows `tasks`.
PolicySet build_sip(const TabularModel& model, const std::vector<TaskVector>& tasks, const TrainerParams& params,
                    int jobs = 1);
PolicySet build_sip(const TabularModel& model, const TrainerParams& params, int jobs = 1);

/// Trains one member per task with no sign-pattern requirement.
PolicySet train_policy_set(const TabularModel& model, const std::vector<TaskVector>& tasks,
                           const std::vector<std::string>& labels, const TrainerParams& params, int jobs = 1);

/// Member -> feature assignment maximizing the summed start-state SF of the
/// assigned features (a permutation when |set| = n, else per-member argmax).
std::vector<int> assign_features(const PolicySet& set, const TabularModel& model);

struct SipViolation {
  Cell start;
  int step = 0;
  int feature = 0;
  /// Actions from the start up to and including the violating one.
  std::string actions;
};

struct SipMemberReport {
  std::string label;
  int feature = -1;
  bool pass = false;
  bool attains_own = false;
  /// max_{s0, j != feature} |psi_j(s0, pi(s0))| over start states.
  double max_off_diagonal = 0.0;
  std::vector<SipViolation> violations;
  /// Trajectory from the first start state, as action letters.
  std::string witness;
};

struct SipReport {
  bool pass = false;
  std::string reason;
  std::vector<SipMemberReport> members;

  std::string to_json() const;
};

/// Rolls every member out from every start state for the full horizon and
/// checks that only its assigned feature ever fires. Deterministic only.
SipReport verify_sip(const PolicySet& set, const TabularModel& model);

struct SparsityMember {
  std::string label;
  int feature = -1;
  double max_off_diagonal = 0.0;
};

struct SparsityReport {
  bool pass = false;
  double tol = 0.0;
  double max_off_diagonal = 0.0;
  std::vector<SparsityMember> members;
};

enum class SfSource { kExact, kStored };

/// Max |psi_j(s, pi_i(s))|, j != feature(i), over states reachable under
/// pi_i from the start states.
SparsityReport sf_sparsity_check(const PolicySet& set, const TabularModel& model, double tol,
                          SfSource source = SfSource::kExact);

/// Letters U/D/L/R.
std::string action_string(const std::vector<int>& actions);

}  // namespace sipgpi
