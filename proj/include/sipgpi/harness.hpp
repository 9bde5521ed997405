// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

// Task sweeps over the unit circle, the planner oracle J* that defines
// normalized return, and report serialization.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sipgpi/gpi.hpp"

namespace sipgpi {

inline constexpr double kNormEpsilon = 1e-9;

/// `count` unit tasks from `from_deg` to `to_deg` inclusive, evenly spaced.
/// The default is the 17-task arc from w1 (135 deg) to w5 (-45 deg).
std::vector<TaskVector> sweep_tasks(int count = 17, double from_deg = 135.0, double to_deg = -45.0);
std::vector<double> sweep_angles(int count = 17, double from_deg = 135.0, double to_deg = -45.0);

/// The named preference vectors w1..w9.
TaskVector named_task(int index);

/// Max expected undiscounted horizon return, averaged over start states.
double oracle_return(const TabularModel& model, std::span<const double> rewards);
double oracle_return(const TabularModel& model, const TaskVector& w);

/// Exact expected horizon return of a fixed policy, averaged over starts.
double exact_return(const TabularModel& model, std::span<const std::uint8_t> policy, std::span<const double> rewards);

struct SweepSpec {
  std::vector<TaskVector> tasks = sweep_tasks();
  std::vector<double> angles = sweep_angles();
  int episodes = 1000;
  int runs = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct EvalRow {
  int task_index = 0;
  double angle_deg = 0.0;
  std::vector<double> w;
  std::string set_label;
  int run = 0;
  /// Means over the run's episodes.
  double return_raw = 0.0;
  double return_norm = 0.0;
  /// Standard error of the normalized episode returns within the run.
  double stderr_norm = 0.0;

  friend bool operator==(const EvalRow&, const EvalRow&) = default;
};

struct EvalReport {
  std::string set_label;
  std::string env_hash;
  std::uint64_t seed = 0;
  std::string normalizer = "planner J* (mean over start states)";
  int n_features = 0;
  std::vector<EvalRow> rows;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Per-task aggregate over runs.
struct TaskSummary {
  int task_index = 0;
  double angle_deg = 0.0;
  double mean_norm = 0.0;
  double mean_raw = 0.0;
  /// Standard error of the per-run means.
  double stderr_norm = 0.0;
  int runs = 0;
};

/// gpi_rollout for every (task, run) cell. Cell (t, r) draws from seed
/// derive_seed(spec.seed, t * runs + r), so results do not depend on jobs.
EvalReport task_sweep(const PolicySet& set, const TabularModel& model, const SweepSpec& spec);

std::vector<TaskSummary> summarize(const EvalReport& report);

/// Exact normalized return of the GPI policy per sweep task (DP, no sampling).
std::vector<double> exact_gpi_sweep(const PolicySet& set, const TabularModel& model,
                                    const std::vector<TaskVector>& tasks);

/// |set| x n matrix of psi_i(s, a).
std::vector<std::vector<double>> sf_snapshot(const PolicySet& set, int s, int a);
std::string sf_snapshot_csv(const PolicySet& set, const std::vector<std::vector<double>>& matrix);

enum class ReportFormat { kCsv, kJson };
ReportFormat parse_format(const std::string& name);

std::string report_csv(const EvalReport& report);
std::string report_json(const EvalReport& report);
EvalReport parse_report_csv(const std::string& text);
EvalReport parse_report_json(const std::string& text);

void emit_report(const EvalReport& report, const std::filesystem::path& path, ReportFormat format);

/// Writes `text` to `path`; IoError names the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

/// Mean and standard error (sample sd / sqrt(count); 0 for a single value).
struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};
MeanStderr mean_stderr(std::span<const double> values);

}  // namespace sipgpi
