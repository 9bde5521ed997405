// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sipgpi/config.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "sipgpi/sip.hpp"

namespace sipgpi {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int x{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError(key + ": not an integer: '" + v + "'");
  }
  return x;
}

std::vector<double> parse_numbers(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& tok : split(v, ',')) {
    try {
      out.push_back(parse_double(tok));
    } catch (const ConfigError&) {
      throw ConfigError(key + ": not a number: '" + tok + "'");
    }
  }
  return out;
}

// Pulls typed values out of the tree and remembers which keys were used.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <class T>
  void get(const std::string& section, const std::string& key, T& out) {
    const auto v = fetch(section, key);
    if (!v) return;
    const std::string name = section + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (*v == "true" || *v == "1") out = true;
      else if (*v == "false" || *v == "0") out = false;
      else throw ConfigError(name + ": expected true or false, got '" + *v + "'");
    } else if constexpr (std::is_same_v<T, double>) {
      try {
        out = parse_double(*v);
      } catch (const ConfigError&) {
        throw ConfigError(name + ": not a number: '" + *v + "'");
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      out = *v;
    } else {
      out = parse_int<T>(name, *v);
    }
  }

  std::optional<std::string> fetch(const std::string& section, const std::string& key) {
    used_.insert(section + "." + key);
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty()) throw ConfigError("key '" + section + "' outside any section");
      for (const auto& [key, value] : body) {
        if (!used_.count(section + "." + key)) throw ConfigError("unknown key '" + section + "." + key + "'");
      }
    }
  }

 private:
  const pt::ptree& tree_;
  std::set<std::string> used_;
};

std::vector<ItemPlacement> parse_placement(const std::string& v) {
  std::vector<ItemPlacement> out;
  for (const auto& item : split(v, ';')) {
    const auto f = split(item, ',');
    if (f.size() != 3) throw ConfigError("env.placement: expected row,col,type but got '" + item + "'");
    out.push_back({{parse_int<int>("env.placement", f[0]), parse_int<int>("env.placement", f[1])},
                   parse_int<int>("env.placement", f[2])});
  }
  return out;
}

std::vector<Cell> parse_cells(const std::string& v) {
  std::vector<Cell> out;
  for (const auto& item : split(v, ';')) {
    const auto f = split(item, ',');
    if (f.size() != 2) throw ConfigError("env.start_cells: expected row,col but got '" + item + "'");
    out.push_back({parse_int<int>("env.start_cells", f[0]), parse_int<int>("env.start_cells", f[1])});
  }
  return out;
}

std::string fmt(double x) { return format_double(x); }
std::string fmt(bool b) { return b ? "true" : "false"; }
template <class Int>
std::string fmt(Int x) {
  return std::to_string(x);
}

std::string numbers(std::span<const double> v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

}  // namespace

std::vector<TaskVector> parse_task_list(const std::string& text) {
  std::vector<TaskVector> out;
  for (const auto& item : split(text, ';')) {
    if (item.size() >= 2 && (item[0] == 'w' || item[0] == 'W')) {
      out.push_back(named_task(parse_int<int>("task", item.substr(1))));
      continue;
    }
    const auto v = parse_numbers("task", item);
    if (v.empty()) throw ConfigError("empty task '" + item + "'");
    const bool zero = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    out.push_back(zero ? TaskVector::raw(v) : normalize_task(v));
  }
  return out;
}

std::string format_task_list(const std::vector<TaskVector>& tasks) {
  std::string out;
  for (std::size_t i = 0; i < tasks.size(); ++i) out += (i ? "; " : "") + numbers(tasks[i].values());
  return out;
}

void RunConfig::validate() const {
  // The start-cell invariant is left to TabularModel::build so verify-sif can report it.
  env.validate_layout();
  if (!env.is_tabular()) throw ConfigError("env: only fixed-placement, no-respawn worlds are supported");
  trainer.validate();
  if (sweep.count < 2) throw ConfigError("sweep.count must be >= 2");
  if (sweep.episodes < 1 || sweep.runs < 1) throw ConfigError("sweep.episodes and sweep.runs must be >= 1");
  if (baseline.size < 1) throw ConfigError("baseline.size must be >= 1");
  if (!baseline.init_task.empty() && baseline.init_task.size() != static_cast<std::size_t>(env.n_item_types)) {
    throw ConfigError("baseline.init_task has the wrong dimension");
  }
  diayn.validate();
  meta.params.validate();
  if (meta.runs < 1) throw ConfigError("meta.runs must be >= 1");
  lifelong.params.validate();
  schedule();
  if (lifelong.runs < 1) throw ConfigError("lifelong.runs must be >= 1");
  if (jobs < 1) throw ConfigError("run.jobs must be >= 1");
}

SweepSpec RunConfig::sweep_spec() const {
  SweepSpec s;
  s.tasks = sweep_tasks(sweep.count, sweep.from_deg, sweep.to_deg);
  s.angles = sweep_angles(sweep.count, sweep.from_deg, sweep.to_deg);
  s.episodes = sweep.episodes;
  s.runs = sweep.runs;
  s.seed = seed;
  s.jobs = jobs;
  return s;
}

TaskSchedule RunConfig::schedule() const {
  return make_schedule(lifelong.cycle, lifelong.phase_length, lifelong.total_steps);
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("malformed config at line " + std::to_string(e.line()) + ": " + e.message());
  }
  Reader r(tree);
  RunConfig c;

  r.get("env", "preset", c.preset);
  if (c.preset == "desk") c.env = GridConfig::desk();
  else if (c.preset == "large") c.env = GridConfig::large();
  else throw ConfigError("env.preset: expected desk or large, got '" + c.preset + "'");
  auto& e = c.env;
  r.get("env", "height", e.height);
  r.get("env", "width", e.width);
  r.get("env", "n_item_types", e.n_item_types);
  r.get("env", "items_per_type", e.items_per_type);
  r.get("env", "random_placement", e.random_placement);
  if (auto v = r.fetch("env", "placement")) e.placement = parse_placement(*v);
  if (auto v = r.fetch("env", "start_cells")) e.start_cells = parse_cells(*v);
  r.get("env", "slip_prob", e.slip_prob);
  r.get("env", "horizon", e.horizon);
  r.get("env", "respawn", e.respawn);
  r.get("env", "seed", e.seed);
  r.get("env", "feature_value", e.feature_value);

  auto& t = c.trainer;
  r.get("trainer", "alpha", t.alpha);
  r.get("trainer", "epsilon_start", t.epsilon_start);
  r.get("trainer", "epsilon_end", t.epsilon_end);
  r.get("trainer", "anneal_fraction", t.anneal_fraction);
  r.get("trainer", "episodes", t.episodes);
  r.get("trainer", "exploring_starts", t.exploring_starts);
  r.get("trainer", "gamma", t.gamma);
  r.get("trainer", "tie_tol", t.tie_tol);
  r.get("trainer", "eval_sweeps", t.eval_sweeps);
  r.get("trainer", "eval_alpha_deterministic", t.eval_alpha_deterministic);
  r.get("trainer", "eval_alpha_stochastic", t.eval_alpha_stochastic);
  r.get("trainer", "eval_alpha_decay", t.eval_alpha_decay);

  if (auto v = r.fetch("sip", "tasks")) c.sip_tasks = parse_task_list(*v);

  r.get("sweep", "count", c.sweep.count);
  r.get("sweep", "from_deg", c.sweep.from_deg);
  r.get("sweep", "to_deg", c.sweep.to_deg);
  r.get("sweep", "episodes", c.sweep.episodes);
  r.get("sweep", "runs", c.sweep.runs);

  r.get("baseline", "size", c.baseline.size);
  if (auto v = r.fetch("baseline", "init_task")) c.baseline.init_task = parse_numbers("baseline.init_task", *v);

  auto& d = c.diayn;
  r.get("diayn", "skills", d.skills);
  r.get("diayn", "episodes", d.episodes);
  r.get("diayn", "policy_lr", d.policy_lr);
  r.get("diayn", "discriminator_lr", d.discriminator_lr);
  r.get("diayn", "entropy_coef", d.entropy_coef);
  r.get("diayn", "value_loss_coef", d.value_loss_coef);
  r.get("diayn", "grad_clip", d.grad_clip);
  r.get("diayn", "gamma", d.gamma);
  r.get("diayn", "sf_alpha", d.sf_alpha);

  auto& m = c.meta.params;
  if (auto v = r.fetch("meta", "options")) m.options = parse_task_list(*v);
  r.get("meta", "alpha", m.alpha);
  r.get("meta", "gamma", m.gamma);
  r.get("meta", "epsilon_start", m.epsilon_start);
  r.get("meta", "epsilon", m.epsilon);
  r.get("meta", "anneal_fraction", m.anneal_fraction);
  r.get("meta", "episodes", m.episodes);
  r.get("meta", "exploring_starts", m.exploring_starts);
  r.get("meta", "eval_every", m.eval_every);
  r.get("meta", "commit_steps", m.commit_steps);
  r.get("meta", "runs", c.meta.runs);

  auto& l = c.lifelong;
  if (auto v = r.fetch("lifelong", "cycle")) l.cycle = parse_task_list(*v);
  r.get("lifelong", "phase_length", l.phase_length);
  r.get("lifelong", "total_steps", l.total_steps);
  r.get("lifelong", "runs", l.runs);
  r.get("lifelong", "alpha", l.params.alpha);
  r.get("lifelong", "epsilon", l.params.epsilon);
  r.get("lifelong", "gamma", l.params.gamma);
  r.get("lifelong", "residual_threshold", l.params.residual_threshold);
  r.get("lifelong", "ridge_lambda", l.params.ridge_lambda);

  r.get("run", "seed", c.seed);
  r.get("run", "jobs", c.jobs);

  r.reject_unknown();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string render_config(const RunConfig& c) {
  std::ostringstream os;
  auto kv = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
  const auto& e = c.env;
  os << "[env]\n";
  kv("preset", c.preset);
  kv("height", fmt(e.height));
  kv("width", fmt(e.width));
  kv("n_item_types", fmt(e.n_item_types));
  kv("items_per_type", fmt(e.items_per_type));
  kv("random_placement", fmt(e.random_placement));
  {
    std::string s;
    for (std::size_t i = 0; i < e.placement.size(); ++i) {
      const auto& p = e.placement[i];
      s += (i ? "; " : "") + fmt(p.cell.row) + "," + fmt(p.cell.col) + "," + fmt(p.type);
    }
    kv("placement", s);
    s.clear();
    for (std::size_t i = 0; i < e.start_cells.size(); ++i) {
      s += (i ? "; " : "") + fmt(e.start_cells[i].row) + "," + fmt(e.start_cells[i].col);
    }
    kv("start_cells", s);
  }
  kv("slip_prob", fmt(e.slip_prob));
  kv("horizon", fmt(e.horizon));
  kv("respawn", fmt(e.respawn));
  kv("seed", fmt(e.seed));
  kv("feature_value", fmt(e.feature_value));

  const auto& t = c.trainer;
  os << "\n[trainer]\n";
  kv("alpha", fmt(t.alpha));
  kv("epsilon_start", fmt(t.epsilon_start));
  kv("epsilon_end", fmt(t.epsilon_end));
  kv("anneal_fraction", fmt(t.anneal_fraction));
  kv("episodes", fmt(t.episodes));
  kv("exploring_starts", fmt(t.exploring_starts));
  kv("gamma", fmt(t.gamma));
  kv("tie_tol", fmt(t.tie_tol));
  kv("eval_sweeps", fmt(t.eval_sweeps));
  kv("eval_alpha_deterministic", fmt(t.eval_alpha_deterministic));
  kv("eval_alpha_stochastic", fmt(t.eval_alpha_stochastic));
  kv("eval_alpha_decay", fmt(t.eval_alpha_decay));

  os << "\n[sip]\n";
  kv("tasks", format_task_list(c.sip_tasks.empty() ? default_sip_tasks(e.n_item_types) : c.sip_tasks));

  os << "\n[sweep]\n";
  kv("count", fmt(c.sweep.count));
  kv("from_deg", fmt(c.sweep.from_deg));
  kv("to_deg", fmt(c.sweep.to_deg));
  kv("episodes", fmt(c.sweep.episodes));
  kv("runs", fmt(c.sweep.runs));

  os << "\n[baseline]\n";
  kv("size", fmt(c.baseline.size));
  kv("init_task", numbers(c.baseline.init_task));

  const auto& d = c.diayn;
  os << "\n[diayn]\n";
  kv("skills", fmt(d.skills));
  kv("episodes", fmt(d.episodes));
  kv("policy_lr", fmt(d.policy_lr));
  kv("discriminator_lr", fmt(d.discriminator_lr));
  kv("entropy_coef", fmt(d.entropy_coef));
  kv("value_loss_coef", fmt(d.value_loss_coef));
  kv("grad_clip", fmt(d.grad_clip));
  kv("gamma", fmt(d.gamma));
  kv("sf_alpha", fmt(d.sf_alpha));

  const auto& m = c.meta.params;
  os << "\n[meta]\n";
  kv("options", format_task_list(m.resolved_options()));
  kv("alpha", fmt(m.alpha));
  kv("gamma", fmt(m.gamma));
  kv("epsilon_start", fmt(m.epsilon_start));
  kv("epsilon", fmt(m.epsilon));
  kv("anneal_fraction", fmt(m.anneal_fraction));
  kv("episodes", fmt(m.episodes));
  kv("exploring_starts", fmt(m.exploring_starts));
  kv("eval_every", fmt(m.eval_every));
  kv("commit_steps", fmt(m.commit_steps));
  kv("runs", fmt(c.meta.runs));

  const auto& l = c.lifelong;
  const TaskSchedule sched = c.schedule();
  os << "\n[lifelong]\n";
  kv("cycle", format_task_list(sched.cycle));
  kv("phase_length", fmt(l.phase_length));
  kv("total_steps", fmt(sched.resolved_total()));
  kv("runs", fmt(l.runs));
  kv("alpha", fmt(l.params.alpha));
  kv("epsilon", fmt(l.params.epsilon));
  kv("gamma", fmt(l.params.gamma));
  kv("residual_threshold", fmt(l.params.residual_threshold));
  kv("ridge_lambda", fmt(l.params.ridge_lambda));

  os << "\n[run]\n";
  kv("seed", fmt(c.seed));
  kv("jobs", fmt(c.jobs));
  return os.str();
}

}  // namespace sipgpi
