// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

// Lifelong protocol: the active task cycles through a fixed list, agents
// see only rewards, and per-episode returns are logged.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sipgpi/gpi.hpp"

namespace sipgpi {

struct TaskSchedule {
  std::vector<TaskVector> cycle;
  std::int64_t phase_length = 20000;
  /// 0 means one full cycle plus one phase, so the schedule wraps once.
  std::int64_t total_steps = 0;

  void validate() const;
  std::int64_t resolved_total() const;
  std::int64_t phase_at(std::int64_t step) const { return step / phase_length; }
  /// Position in `cycle` of the task active at `step`.
  int task_index_at(std::int64_t step) const;
  const TaskVector& task_at(std::int64_t step) const { return cycle[static_cast<std::size_t>(task_index_at(step))]; }
};

/// An empty cycle means w1..w5.
TaskSchedule make_schedule(std::vector<TaskVector> cycle, std::int64_t phase_length, std::int64_t total_steps = 0);

/// Ridge regression of rewards on features:
///   w = (Phi^T Phi + lambda I)^-1 (Phi^T r + lambda prior).
/// Features never observed stay at the prior.
class WEstimator {
 public:
  /// An empty prior means every coordinate at 1/sqrt(n).
  explicit WEstimator(int n, double lambda = 1e-6, std::vector<double> prior = {});

  /// Zero feature vectors carry no information and are ignored.
  void observe(std::span<const double> phi, double r);
  void reset();

  int n() const { return n_; }
  std::int64_t count() const { return count_; }
  bool observed(int feature) const { return seen_[static_cast<std::size_t>(feature)] != 0; }
  const std::vector<double>& raw() const { return w_; }
  /// raw() normalized; falls back to the last usable direction when raw()
  /// is (near) zero.
  const TaskVector& unit() const { return unit_; }
  double residual(std::span<const double> phi, double r) const;

 private:
  void solve();

  int n_;
  double lambda_;
  std::vector<double> prior_;
  std::vector<double> gram_;
  std::vector<double> rhs_;
  std::vector<std::uint8_t> seen_;
  std::int64_t count_ = 0;
  std::vector<double> w_;
  TaskVector unit_;
};

/// Elementwise maximum; throws ConfigError on an empty list or a shape
/// mismatch.
std::vector<double> maxqinit_tables(const std::vector<std::vector<double>>& tables);

enum class LifelongAgent { kGpiSet, kFlatQ, kMaxQInit };
LifelongAgent parse_lifelong_agent(const std::string& name);
std::string to_string(LifelongAgent agent);

struct LifelongParams {
  double alpha = 0.1;
  double epsilon = 0.1;
  double gamma = 0.95;
  /// |r - phi . w| above this on an already observed feature resets the
  /// estimator.
  double residual_threshold = 0.2;
  double ridge_lambda = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LifelongRow {
  /// Global step at which the episode began.
  std::int64_t step = 0;
  int episode = 0;
  std::string agent;
  int active_task_index = 0;
  double return_raw = 0.0;
  /// return_raw / J*(s0) for the task active at the episode's start.
  double return_norm = 0.0;
};

struct LifelongLog {
  std::string agent;
  std::vector<LifelongRow> rows;
  /// Steps at which the gpi-set agent reset its estimator.
  std::vector<std::int64_t> resets;
};

/// Runs one agent through the schedule. `set` is used only by kGpiSet.
LifelongLog lifelong_run(LifelongAgent agent, const PolicySet* set, const TaskSchedule& schedule,
                         const TabularModel& model, const LifelongParams& params);

/// Mean normalized return over the first `k` episodes of phase `phase`.
double phase_head_mean(const LifelongLog& log, const TaskSchedule& schedule, std::int64_t phase, int k = 10);
/// Mean over the last `k` episodes of phase - 1 minus the head mean of phase.
double phase_drop(const LifelongLog& log, const TaskSchedule& schedule, std::int64_t phase, int k = 10);

std::string lifelong_csv(const std::vector<LifelongLog>& logs);

}  // namespace sipgpi
