// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

// Generalized policy evaluation and improvement over a set of policies that
// share one feature space:
//   GPE  Q_i(s, a) = psi_i(s, a) . w
//   GPI  pi(s) = argmax_a max_i Q_i(s, a)
// Ties go to the lowest action index; member identity never matters.

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sipgpi/sf.hpp"

namespace sipgpi {

struct PolicyMember {
  std::string label;
  GreedyPolicy policy;
  SFTable sf;
};

class PolicySet {
 public:
  explicit PolicySet(std::string label = "") : label_(std::move(label)) {}

  /// Throws ConfigError when the member's table shape differs from the set's.
  void add(PolicyMember member);

  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const PolicyMember& operator[](std::size_t i) const { return members_[i]; }
  const std::vector<PolicyMember>& members() const { return members_; }

  int n_features() const;
  int num_states() const;
  double gamma() const;

  /// <dir>/manifest.json plus member_<k>.sf and member_<k>.policy.
  void save(const std::filesystem::path& dir) const;
  static PolicySet load(const std::filesystem::path& dir);

 private:
  std::string label_;
  std::vector<PolicyMember> members_;
};

/// psi_i(s, a) . w for every member i.
std::vector<double> gpe(const PolicySet& set, const TaskVector& w, int s, int a);

int gpi_action(const PolicySet& set, const TaskVector& w, int s);

/// gpi_action for every state.
ActionTable gpi_policy(const PolicySet& set, const TaskVector& w);

/// Undiscounted `horizon`-step returns of a fixed tabular policy under
/// `rewards` (r[s * A + b]), one per episode; starts drawn uniformly.
std::vector<double> rollout_returns(const TabularModel& model, std::span<const std::uint8_t> policy,
                                    std::span<const double> rewards, int episodes, Rng& rng);

/// Acts with gpi_action on w for `episodes` episodes.
std::vector<double> gpi_rollout(const PolicySet& set, const TaskVector& w, const TabularModel& model, int episodes,
                                Rng& rng);

}  // namespace sipgpi
