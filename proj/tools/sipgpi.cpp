// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line entry point. Exit codes: 0 success, 1 verification failure,
// 2 configuration, usage or i/o error, 3 any other failure.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sipgpi/config.hpp"
#include "sipgpi/parallel.hpp"
#include "sipgpi/random.hpp"
#include "sipgpi/sip.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace sipgpi;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitOther = 3;

struct Flags {
  std::string env;
  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 0;
  int jobs = 1;
  int episodes = 0;
  int runs = 0;
  std::string method;
  std::string kind;
  std::vector<std::string> sets;
  std::string references;
  int size = 0;
  int tasks = 0;
  std::string cell;
  std::string action = "left";

  CLI::Option* seed_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
  CLI::Option* episodes_opt = nullptr;
  CLI::Option* runs_opt = nullptr;
  CLI::Option* size_opt = nullptr;
  CLI::Option* tasks_opt = nullptr;
};

// Everything a subcommand needs, after flags have overridden the file.
struct Run {
  std::string name;
  RunConfig config;
  fs::path out;
  json manifest;
  std::vector<std::string> outputs;

  void write(const std::string& file, const std::string& text) {
    write_text_file(out / file, text);
    outputs.push_back(file);
  }
};

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

fs::path set_dir(const fs::path& p) { return fs::exists(p / "set" / "manifest.json") ? p / "set" : p; }

PolicySet load_set(const std::string& path) {
  if (path.empty()) throw ConfigError("--set is required");
  return PolicySet::load(set_dir(path));
}

RunConfig base_config(const Flags& f) {
  if (!f.env.empty()) return load_config(f.env);
  // Sets built by this tool carry their resolved config alongside.
  for (const auto& s : f.sets) {
    const fs::path p = fs::path(s) / "config.resolved";
    if (fs::exists(p)) return load_config(p);
  }
  return RunConfig{};
}

Run start(const std::string& name, const Flags& f) {
  Run r;
  r.name = name;
  r.config = base_config(f);
  auto& c = r.config;
  if (given(f.seed_opt)) c.seed = f.seed;
  if (given(f.jobs_opt)) c.jobs = f.jobs;
  if (given(f.episodes_opt)) {
    if (name == "sweep") c.sweep.episodes = f.episodes;
    else if (name == "meta") c.meta.params.episodes = f.episodes;
    else if (name == "build-baseline" && f.method == "diayn") c.diayn.episodes = f.episodes;
    else c.trainer.episodes = f.episodes;
  }
  if (given(f.runs_opt)) {
    c.sweep.runs = f.runs;
    c.meta.runs = f.runs;
    c.lifelong.runs = f.runs;
  }
  if (given(f.size_opt)) c.baseline.size = f.size;
  if (given(f.tasks_opt)) c.sweep.count = f.tasks;
  c.trainer.seed = c.seed;
  c.diayn.seed = c.seed;
  c.validate();
  parse_format(f.format);

  r.out = f.out.empty() ? fs::path("runs") / name : fs::path(f.out);
  std::error_code ec;
  fs::create_directories(r.out, ec);
  if (ec) throw IoError("cannot create " + r.out.string() + ": " + ec.message());
  r.manifest["tool"] = "sipgpi";
  r.manifest["version"] = kVersion;
  r.manifest["subcommand"] = name;
  r.manifest["seed"] = c.seed;
  std::ostringstream hash;
  hash << std::hex << c.env.hash();
  r.manifest["env_hash"] = hash.str();
  return r;
}

void finish(Run& r) {
  write_text_file(r.out / "config.resolved", render_config(r.config));
  r.manifest["outputs"] = r.outputs;
  write_text_file(r.out / "manifest.json", r.manifest.dump(2) + "\n");
}

int cmd_verify_sif(const Flags& f) {
  Run r = start("verify-sif", f);
  const SifReport rep = verify_sif(r.config.env);
  json j;
  j["pass"] = rep.pass;
  j["condition_i"] = rep.condition_i;
  j["condition_ii"] = rep.condition_ii;
  j["violations"] = rep.violations;
  j["witnesses"] = json::array();
  for (const auto& w : rep.witnesses) {
    j["witnesses"].push_back({{"type", w.type},
                              {"start", {w.start.row, w.start.col}},
                              {"found", w.found},
                              {"actions", action_string(w.actions)}});
  }
  r.write("sif.json", j.dump(2) + "\n");
  finish(r);
  std::printf("verify-sif: %s\n", rep.pass ? "pass" : "FAIL");
  for (const auto& v : rep.violations) std::printf("  %s\n", v.c_str());
  return rep.pass ? kExitOk : kExitVerifyFailed;
}

int cmd_build_sip(const Flags& f) {
  Run r = start("build-sip", f);
  const auto model = TabularModel::build(r.config.env);
  const auto tasks = r.config.sip_tasks.empty() ? default_sip_tasks(model.n_features()) : r.config.sip_tasks;
  const PolicySet set = build_sip(model, tasks, r.config.trainer, r.config.jobs);
  set.save(r.out / "set");
  r.manifest["set"] = "set";
  r.manifest["tasks"] = format_task_list(tasks);
  finish(r);
  std::printf("build-sip: %zu members written to %s\n", set.size(), (r.out / "set").string().c_str());
  return kExitOk;
}

int cmd_verify_sip(const Flags& f) {
  Run r = start("verify-sip", f);
  const auto model = TabularModel::build(r.config.env);
  const PolicySet set = load_set(f.sets.empty() ? "" : f.sets.front());
  const SipReport rep = verify_sip(set, model);
  r.write("verify_sip.json", rep.to_json() + "\n");
  const SparsityReport sparsity = sf_sparsity_check(set, model, 0.05, SfSource::kStored);
  json j;
  j["pass"] = sparsity.pass;
  j["tol"] = sparsity.tol;
  j["max_off_diagonal"] = sparsity.max_off_diagonal;
  r.write("sf_sparsity.json", j.dump(2) + "\n");
  r.manifest["pass"] = rep.pass;
  finish(r);
  std::printf("verify-sip: %s%s%s\n", rep.pass ? "pass" : "FAIL", rep.reason.empty() ? "" : ": ",
              rep.reason.c_str());
  return rep.pass ? kExitOk : kExitVerifyFailed;
}

int cmd_build_baseline(const Flags& f) {
  Run r = start("build-baseline", f);
  const auto& c = r.config;
  const auto model = TabularModel::build(c.env);
  const TaskVector init = c.baseline.init_task.empty() ? random_unit_task(model.n_features(), c.seed)
                                                       : normalize_task(c.baseline.init_task);
  BaselineResult res;
  if (f.method == "smp") {
    res = smp_build(model, c.baseline.size, init, c.trainer);
  } else if (f.method == "dsp") {
    res = dsp_build(model, c.baseline.size, init, c.trainer);
  } else {
    res = diayn_build(model, c.diayn, c.trainer).build;
  }
  res.save(r.out / "set");
  const SipReport rep = verify_sip(res.set, model);
  r.write("verify_sip.json", rep.to_json() + "\n");
  r.manifest["set"] = "set";
  r.manifest["method"] = f.method;
  r.manifest["sip"] = rep.pass;
  finish(r);
  std::printf("build-baseline %s: %zu members, verify_sip %s\n", f.method.c_str(), res.set.size(),
              rep.pass ? "pass" : "fail");
  return kExitOk;
}

int cmd_sweep(const Flags& f) {
  Run r = start("sweep", f);
  const auto model = TabularModel::build(r.config.env);
  const PolicySet set = load_set(f.sets.empty() ? "" : f.sets.front());
  const EvalReport rep = task_sweep(set, model, r.config.sweep_spec());
  const ReportFormat fmt = parse_format(f.format);
  const std::string file = fmt == ReportFormat::kCsv ? "sweep.csv" : "sweep.json";
  r.write(file, fmt == ReportFormat::kCsv ? report_csv(rep) : report_json(rep));
  finish(r);
  for (const auto& s : summarize(rep)) {
    std::printf("%8.2f  %.4f +- %.4f\n", s.angle_deg, s.mean_norm, s.stderr_norm);
  }
  return kExitOk;
}

Cell parse_cell(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError("--cell expects row,col");
  return {static_cast<int>(parse_double(text.substr(0, comma))), static_cast<int>(parse_double(text.substr(comma + 1)))};
}

int cmd_sf_snapshot(const Flags& f) {
  Run r = start("sf-snapshot", f);
  const auto model = TabularModel::build(r.config.env);
  const PolicySet set = load_set(f.sets.empty() ? "" : f.sets.front());
  int s = model.starts().front();
  if (!f.cell.empty()) {
    WorldState ws = model.decode(s);
    ws.agent = ws.start = parse_cell(f.cell);
    s = model.index(ws);
  }
  const int a = parse_action(f.action);
  r.write("sf_snapshot.csv", sf_snapshot_csv(set, sf_snapshot(set, s, a)));
  const Cell at = model.agent_cell(s);
  r.manifest["cell"] = {at.row, at.col};
  r.manifest["action"] = action_name(a);
  finish(r);
  return kExitOk;
}

int cmd_meta(const Flags& f) {
  Run r = start("meta", f);
  const auto& c = r.config;
  const auto model = TabularModel::build(c.env);
  const NonlinearKind kind = parse_nonlinear_kind(f.kind);
  std::vector<PolicySet> sets;
  for (const auto& s : f.sets) sets.push_back(load_set(s));
  const auto runs = static_cast<std::size_t>(c.meta.runs);
  // Agent 0 is flat Q-learning; the others follow --set order.
  std::vector<std::vector<LearningCurve>> curves(sets.size() + 1, std::vector<LearningCurve>(runs));
  std::vector<std::uint64_t> seeds;
  for (std::size_t k = 0; k < runs; ++k) seeds.push_back(derive_seed(c.seed, k));
  parallel_for(curves.size() * runs, c.jobs, [&](std::size_t cell) {
    const std::size_t agent = cell / runs;
    const std::size_t k = cell % runs;
    MetaParams p = c.meta.params;
    p.seed = seeds[k];
    if (agent == 0) {
      curves[agent][k] = qlearn_baseline(kind, model, p).curve;
    } else {
      const auto& set = sets[agent - 1];
      curves[agent][k] = train_meta(kind, set, model, p, set.label()).curve;
    }
  });
  r.write("curves.csv", curves_csv(curves));
  json summary = json::array();
  for (const auto& runs_of : curves) {
    json auc = json::array(), asym = json::array();
    for (const auto& cv : runs_of) {
      auc.push_back(cv.auc());
      asym.push_back(cv.asymptote());
    }
    summary.push_back({{"agent", runs_of.front().agent}, {"auc", auc}, {"asymptote", asym}});
    std::vector<double> a(auc.begin(), auc.end());
    const MeanStderr ms = mean_stderr(a);
    std::printf("%-12s auc %.4f +- %.4f\n", runs_of.front().agent.c_str(), ms.mean, ms.stderr_);
  }
  r.write("meta_summary.json", summary.dump(2) + "\n");
  r.manifest["kind"] = to_string(kind);
  r.manifest["run_seeds"] = seeds;
  finish(r);
  return kExitOk;
}

int cmd_lifelong(const Flags& f) {
  Run r = start("lifelong", f);
  const auto& c = r.config;
  const auto model = TabularModel::build(c.env);
  const PolicySet set = load_set(f.sets.empty() ? "" : f.sets.front());
  const TaskSchedule sched = c.schedule();
  const auto runs = static_cast<std::size_t>(c.lifelong.runs);
  const std::vector<LifelongAgent> agents{LifelongAgent::kGpiSet, LifelongAgent::kFlatQ, LifelongAgent::kMaxQInit};
  std::vector<LifelongLog> logs(runs * agents.size());
  std::vector<std::uint64_t> seeds;
  for (std::size_t k = 0; k < runs; ++k) seeds.push_back(derive_seed(c.seed, k));
  parallel_for(logs.size(), c.jobs, [&](std::size_t cell) {
    LifelongParams p = c.lifelong.params;
    p.seed = seeds[cell / agents.size()];
    logs[cell] = lifelong_run(agents[cell % agents.size()], &set, sched, model, p);
  });
  r.write("lifelong.csv", lifelong_csv(logs));
  const std::int64_t phases = (sched.resolved_total() + sched.phase_length - 1) / sched.phase_length;
  json summary = json::array();
  for (std::size_t i = 0; i < logs.size(); ++i) {
    json heads = json::array(), drops = json::array();
    for (std::int64_t ph = 0; ph < phases; ++ph) {
      heads.push_back(phase_head_mean(logs[i], sched, ph));
      drops.push_back(ph == 0 ? 0.0 : phase_drop(logs[i], sched, ph));
    }
    summary.push_back({{"run", i / agents.size()},
                       {"agent", logs[i].agent},
                       {"phase_head_mean", heads},
                       {"phase_drop", drops},
                       {"resets", logs[i].resets}});
  }
  r.write("lifelong_summary.json", summary.dump(2) + "\n");
  r.manifest["run_seeds"] = seeds;
  r.manifest["phase_length"] = sched.phase_length;
  finish(r);
  std::printf("lifelong: %zu runs x %zu agents, %lld steps each\n", runs, agents.size(),
              static_cast<long long>(sched.resolved_total()));
  return kExitOk;
}

int cmd_rep_classify(const Flags& f) {
  Run r = start("rep-classify", f);
  const auto model = TabularModel::build(r.config.env);
  const PolicySet set = load_set(f.sets.empty() ? "" : f.sets.front());
  const PolicySet refs = f.references.empty() ? reference_policies(model, r.config.trainer, r.config.jobs)
                                              : load_set(f.references);
  const auto tasks = r.config.sweep_spec().tasks;
  const double tol = rep_tolerance(model, tasks);
  std::string csv = "member,reference,label,distance,tolerance,equivalent\n";
  for (const auto& m : set.members()) {
    const RepLabel l = rep_classify(m.policy.action_of, refs, model, tasks, tol);
    csv += m.label + ',' + std::to_string(l.reference) + ',' + l.label + ',' + format_double(l.distance) + ',' +
           format_double(l.tolerance) + ',' + (l.equivalent ? "true" : "false") + '\n';
    std::printf("%-10s -> %s%s\n", m.label.c_str(), l.label.c_str(), l.equivalent ? "" : " (not equivalent)");
  }
  r.write("rep.csv", csv);
  finish(r);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Successor features, GPI and policy-set construction on item gridworlds"};
  app.set_version_flag("--version", std::string("sipgpi ") + kVersion);
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--env", f.env, "INI config file");
    sub->add_option("--out", f.out, "Output directory (default runs/<subcommand>)");
    f.seed_opt = sub->add_option("--seed", f.seed, "Master seed");
    f.jobs_opt = sub->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
    f.episodes_opt = sub->add_option("--episodes", f.episodes, "Training or evaluation episodes")
                         ->check(CLI::PositiveNumber);
    f.runs_opt = sub->add_option("--runs", f.runs, "Independent runs")->check(CLI::PositiveNumber);
    sub->add_option("--format", f.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  };
  auto needs_set = [&](CLI::App* sub, bool many = false) {
    auto* o = sub->add_option("--set", f.sets, "Policy set directory");
    o->required();
    if (!many) o->expected(1);
  };

  std::vector<std::pair<CLI::App*, std::function<int()>>> subs;
  auto add = [&](const std::string& name, const std::string& help, std::function<int()> fn) {
    CLI::App* sub = app.add_subcommand(name, help);
    common(sub);
    subs.emplace_back(sub, std::move(fn));
    return sub;
  };

  add("verify-sif", "Check the feature-independence conditions of an environment", [&] { return cmd_verify_sif(f); });
  add("build-sip", "Build a set of independent policies", [&] { return cmd_build_sip(f); });
  needs_set(add("verify-sip", "Verify a policy set", [&] { return cmd_verify_sip(f); }));
  auto* bb = add("build-baseline", "Build an SMP, DSP or DIAYN set", [&] { return cmd_build_baseline(f); });
  bb->add_option("method", f.method, "smp, dsp or diayn")->required()->check(CLI::IsMember({"smp", "dsp", "diayn"}));
  auto* sw = add("sweep", "Evaluate a set on the unit-circle task sweep", [&] { return cmd_sweep(f); });
  needs_set(sw);
  auto* snap = add("sf-snapshot", "Dump the SF matrix at one state-action", [&] { return cmd_sf_snapshot(f); });
  needs_set(snap);
  snap->add_option("--cell", f.cell, "Agent cell row,col (default first start)");
  snap->add_option("--action", f.action, "up, down, left or right");
  auto* meta = add("meta", "Meta-learn a nonlinear task over preference vectors", [&] { return cmd_meta(f); });
  meta->add_option("kind", f.kind, "sequential or balanced")->required()->check(
      CLI::IsMember({"sequential", "balanced"}));
  meta->add_option("--set", f.sets, "Policy set directory (repeatable)");
  needs_set(add("lifelong", "Run the cyclic lifelong protocol", [&] { return cmd_lifelong(f); }));
  auto* rep = add("rep-classify", "Label each member by its nearest reference policy", [&] { return cmd_rep_classify(f); });
  needs_set(rep);
  rep->add_option("--references", f.references, "Reference set directory (default: train pi_1..pi_9)");

  // Options shared by name across subcommands bind to one variable; only the
  // parsed subcommand's Option pointers matter.
  for (auto& [sub, fn] : subs) {
    sub->callback([&, s = sub] {
      f.seed_opt = s->get_option("--seed");
      f.jobs_opt = s->get_option("--jobs");
      f.episodes_opt = s->get_option("--episodes");
      f.runs_opt = s->get_option("--runs");
      f.size_opt = s->get_option_no_throw("--size");
      f.tasks_opt = s->get_option_no_throw("--tasks");
    });
  }
  bb->add_option("--size", f.size, "Members in the set")->check(CLI::PositiveNumber);
  sw->add_option("--tasks", f.tasks, "Number of sweep tasks")->check(CLI::Range(2, 1000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  try {
    for (auto& [sub, fn] : subs) {
      if (sub->parsed()) return fn();
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitOther;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitOther;
  }
  return kExitOther;
}
