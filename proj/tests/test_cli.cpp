// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "sipgpi/config.hpp"

namespace fs = std::filesystem;
using sipgpi::read_text_file;
using sipgpi::write_text_file;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "sipgpi_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    write_text_file(d / "fast.cfg", "[trainer]\nepisodes = 20000\n[sweep]\nepisodes = 50\nruns = 2\n"
                                    "[meta]\nepisodes = 2000\neval_every = 500\nruns = 2\n"
                                    "[lifelong]\nphase_length = 500\nruns = 2\n[run]\nseed = 7\n");
    return d;
  }();
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = std::string(SIPGPI_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string at(const std::string& rel) { return (workdir() / rel).string(); }

}  // namespace

TEST_CASE("build then verify a SIP") {
  REQUIRE(run("build-sip --env " + at("fast.cfg") + " --out " + at("sip")) == 0);
  CHECK(fs::exists(at("sip/set/manifest.json")));
  CHECK(run("verify-sip --set " + at("sip") + " --out " + at("verify")) == 0);
  const auto j = nlohmann::json::parse(read_text_file(at("verify/verify_sip.json")));
  CHECK(j["pass"] == true);
}

TEST_CASE("every run records its config and version") {
  REQUIRE(run("build-sip --env " + at("fast.cfg") + " --out " + at("sip")) == 0);
  REQUIRE(run("sweep --set " + at("sip") + " --tasks 17 --out " + at("sweep")) == 0);
  const auto m = nlohmann::json::parse(read_text_file(at("sweep/manifest.json")));
  CHECK(m["version"] == sipgpi::kVersion);
  CHECK(m["subcommand"] == "sweep");
  const auto c = sipgpi::load_config(at("sweep/config.resolved"));
  CHECK(c.sweep.count == 17);
  CHECK(c.seed == 7);
  const std::string csv = read_text_file(at("sweep/sweep.csv"));
  // 17 tasks x 2 runs plus the header.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 35);
}

TEST_CASE("exit codes") {
  write_text_file(workdir() / "bad_w.cfg", "[sip]\ntasks = w2; w4\n");
  write_text_file(workdir() / "bad_key.cfg", "[env]\nbogus = 1\n");
  write_text_file(workdir() / "blocked.cfg", "[env]\nstart_cells = 0,0; 2,2\n");
  CHECK(run("build-sip --env " + at("bad_w.cfg") + " --out " + at("bad")) == 2);
  CHECK(run("verify-sif --env " + at("bad_key.cfg") + " --out " + at("bad")) == 2);
  CHECK(run("nosuch") == 2);
  CHECK(run("sweep --out " + at("bad")) == 2);
  CHECK(run("sweep --set " + at("missing") + " --out " + at("bad")) == 2);
  CHECK(run("verify-sif --out " + at("sif")) == 0);
  CHECK(run("verify-sif --env " + at("blocked.cfg") + " --out " + at("sif_blocked")) == 1);
  CHECK(run("build-sip --env " + at("blocked.cfg") + " --out " + at("bad")) == 2);
  CHECK(run("--version") == 0);
}

TEST_CASE("a non-SIP set fails verification with exit 1") {
  REQUIRE(run("build-baseline dsp --env " + at("fast.cfg") + " --seed 5 --out " + at("dsp")) == 0);
  CHECK(run("verify-sip --set " + at("dsp") + " --out " + at("dsp_verify")) == 1);
}

TEST_CASE("reruns with the same seed are byte-identical") {
  const std::string cfg = " --env " + at("fast.cfg");
  REQUIRE(run("build-sip" + cfg + " --out " + at("sip")) == 0);
  const std::vector<std::pair<std::string, std::string>> cmds{
      {"sweep --set " + at("sip") + cfg, "sweep.csv"},
      {"sweep --set " + at("sip") + cfg + " --format json", "sweep.json"},
      {"meta sequential --set " + at("sip") + cfg + " --jobs 2", "curves.csv"},
      {"lifelong --set " + at("sip") + cfg, "lifelong.csv"},
      {"sf-snapshot --set " + at("sip") + cfg, "sf_snapshot.csv"},
      {"build-baseline smp" + cfg + " --seed 3", "set/member_1.sf"},
  };
  int k = 0;
  for (const auto& [cmd, file] : cmds) {
    const std::string a = at("rep_a" + std::to_string(k));
    const std::string b = at("rep_b" + std::to_string(k));
    REQUIRE(run(cmd + " --out " + a) == 0);
    REQUIRE(run(cmd + " --out " + b) == 0);
    CAPTURE(cmd);
    CHECK(read_text_file(fs::path(a) / file) == read_text_file(fs::path(b) / file));
    CHECK(read_text_file(fs::path(a) / "config.resolved") == read_text_file(fs::path(b) / "config.resolved"));
    ++k;
  }
}
