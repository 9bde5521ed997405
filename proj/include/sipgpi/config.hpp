// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

// Run configuration: INI text with one section per module. Unknown sections
// or keys are rejected; render_config() emits every resolved value.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sipgpi/baselines.hpp"
#include "sipgpi/harness.hpp"
#include "sipgpi/lifelong.hpp"
#include "sipgpi/meta.hpp"

namespace sipgpi {

struct SweepConfig {
  int count = 17;
  double from_deg = 135.0;
  double to_deg = -45.0;
  int episodes = 1000;
  int runs = 10;
};

struct BaselineConfig {
  /// Total members in the built set.
  int size = 2;
  /// Empty means a random unit task drawn from the run seed.
  std::vector<double> init_task;
};

struct LifelongConfig {
  std::vector<TaskVector> cycle;  // empty means w1..w5
  std::int64_t phase_length = 20000;
  std::int64_t total_steps = 0;
  int runs = 10;
  LifelongParams params;
};

struct MetaConfig {
  int runs = 10;
  MetaParams params;
};

struct RunConfig {
  std::string preset = "desk";
  GridConfig env = GridConfig::desk();
  TrainerParams trainer;
  /// SIP training tasks; empty means the default sign-pattern tasks.
  std::vector<TaskVector> sip_tasks;
  SweepConfig sweep;
  BaselineConfig baseline;
  DiaynParams diayn;
  MetaConfig meta;
  LifelongConfig lifelong;
  std::uint64_t seed = 0;
  int jobs = 1;

  void validate() const;
  SweepSpec sweep_spec() const;
  TaskSchedule schedule() const;
};

/// Throws ConfigError with the offending key on malformed or unknown input.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string render_config(const RunConfig& config);

/// "x,y; x,y" or "w1; w5"; named tasks resolve through named_task().
std::vector<TaskVector> parse_task_list(const std::string& text);
std::string format_task_list(const std::vector<TaskVector>& tasks);

}  // namespace sipgpi
