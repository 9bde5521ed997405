// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "fixtures.hpp"

using namespace sipgpi;
using sipgpi::testing::desk_model;
using sipgpi::testing::desk_pi24;
using sipgpi::testing::desk_sip;

namespace {
const double kHalf = std::sqrt(0.5);
}

TEST_CASE("sweep tasks") {
  const auto tasks = sweep_tasks();
  const auto angles = sweep_angles();
  REQUIRE(tasks.size() == 17);
  CHECK(angles.front() == 135.0);
  CHECK(angles[1] == 123.75);
  CHECK(angles.back() == -45.0);
  CHECK(tasks[0][0] == doctest::Approx(-kHalf));
  CHECK(tasks[0][1] == doctest::Approx(kHalf));
  CHECK(tasks[8][0] == doctest::Approx(kHalf));
  CHECK(tasks[8][1] == doctest::Approx(kHalf));
  CHECK(tasks[16][0] == doctest::Approx(kHalf));
  CHECK(tasks[16][1] == doctest::Approx(-kHalf));
  for (const auto& w : tasks) CHECK(std::fabs(w.norm() - 1.0) < 1e-12);
}

TEST_CASE("named tasks") {
  CHECK(named_task(4) == TaskVector::unit({1.0, 0.0}));
  CHECK(named_task(9).norm() == 0.0);
  CHECK_THROWS_AS(named_task(10), ConfigError);
}

TEST_CASE("oracle returns") {
  const auto& m = desk_model();
  CHECK(oracle_return(m, TaskVector::unit({1.0, 0.0})) == 2.0);
  CHECK(oracle_return(m, TaskVector::unit({-kHalf, -kHalf})) == 0.0);
  CHECK(oracle_return(m, named_task(3)) == doctest::Approx(4.0 * kHalf).epsilon(1e-14));
  SUBCASE("relabelling item types permutes w") {
    GridConfig swapped = GridConfig::desk();
    for (auto& p : swapped.placement) p.type = 1 - p.type;
    const TabularModel ms = TabularModel::build(swapped);
    for (const auto& w : sweep_tasks()) {
      const TaskVector flipped = TaskVector::unit({w[1], w[0]});
      CHECK(oracle_return(ms, flipped) == doctest::Approx(oracle_return(m, w)).epsilon(1e-14));
    }
  }
}

TEST_CASE("SIP sweep is exactly 1 on every task") {
  SweepSpec spec;
  spec.episodes = 100;
  spec.runs = 3;
  spec.seed = 5;
  spec.jobs = 4;
  const EvalReport rep = task_sweep(desk_sip(), desk_model(), spec);
  CHECK(rep.rows.size() == 51);
  for (const auto& s : summarize(rep)) CHECK(std::fabs(s.mean_norm - 1.0) <= 1e-9);
  for (const auto& r : rep.rows) CHECK(r.return_norm <= 1.0 + 1e-9);
}

TEST_CASE("the w2/w4 set fails at the endpoints") {
  SweepSpec spec;
  spec.episodes = 200;
  spec.runs = 2;
  const auto sum = summarize(task_sweep(desk_pi24(), desk_model(), spec));
  CHECK(sum[0].mean_norm <= 0.6);
  CHECK(sum[16].mean_norm <= 0.6);
  CHECK(sum[8].mean_norm >= 0.99);
}

TEST_CASE("sweeps are reproducible and independent of jobs") {
  SweepSpec spec;
  spec.episodes = 50;
  spec.runs = 2;
  spec.seed = 9;
  GridConfig cfg = GridConfig::desk();
  cfg.slip_prob = 0.125;
  const TabularModel m = TabularModel::build(cfg);
  spec.jobs = 1;
  const EvalReport a = task_sweep(desk_sip(), m, spec);
  spec.jobs = 3;
  const EvalReport b = task_sweep(desk_sip(), m, spec);
  CHECK(report_csv(a) == report_csv(b));
  CHECK(a.normalizer != EvalReport{}.normalizer);
}

TEST_CASE("report serialization") {
  SweepSpec spec;
  spec.episodes = 20;
  spec.runs = 10;
  const EvalReport rep = task_sweep(desk_sip(), desk_model(), spec);

  SUBCASE("17 tasks x 10 runs") {
    const std::string csv = report_csv(rep);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 171);
  }
  SUBCASE("CSV round-trip") {
    const EvalReport back = parse_report_csv(report_csv(rep));
    CHECK(back.rows == rep.rows);
  }
  SUBCASE("JSON round-trip") { CHECK(parse_report_json(report_json(rep)) == rep); }
  SUBCASE("empty report is header-only") {
    EvalReport empty;
    empty.n_features = 2;
    CHECK(report_csv(empty) == "task_index,angle_deg,w_1,w_2,set_label,run,return_raw,return_norm,stderr\n");
    CHECK(parse_report_csv(report_csv(empty)).rows.empty());
  }
  SUBCASE("files") {
    const auto path = std::filesystem::temp_directory_path() / "sipgpi_report.csv";
    emit_report(rep, path, ReportFormat::kCsv);
    CHECK(read_text_file(path) == report_csv(rep));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(emit_report(rep, "/nonexistent/dir/r.csv", ReportFormat::kCsv), IoError);
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(parse_report_csv("nope\n"), ConfigError);
    CHECK_THROWS_AS(parse_report_json("{}"), ConfigError);
    CHECK_THROWS_AS(parse_format("xml"), ConfigError);
  }
}

TEST_CASE("SF snapshots") {
  const auto& m = desk_model();
  const auto& set = desk_sip();
  const int s0 = m.starts().front();
  const auto mat = sf_snapshot(set, s0, static_cast<int>(Action::kLeft));
  REQUIRE(mat.size() == set.size());
  CHECK(mat[0].size() == 2);
  CHECK(mat[0][1] <= 0.05);
  CHECK(mat[1][0] <= 0.05);
  CHECK(mat[0][0] > 0.5);
  const std::string csv = sf_snapshot_csv(set, mat);
  CHECK(csv.rfind("policy_index,policy_label,psi_1,psi_2\n", 0) == 0);
  CHECK_THROWS_AS(sf_snapshot(set, -1, 0), ConfigError);
}

TEST_CASE("mean and stderr") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const MeanStderr ms = mean_stderr(v);
  CHECK(ms.mean == 2.5);
  CHECK(ms.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(mean_stderr(std::vector<double>{3.0}).stderr_ == 0.0);
}
