// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sipgpi/harness.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sipgpi/parallel.hpp"
#include "sipgpi/random.hpp"

namespace sipgpi {

namespace {

using ojson = nlohmann::ordered_json;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

int parse_int(const std::string& tok) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size()) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("not an integer: '" + tok + "'");
  }
}

std::string csv_header(int n) {
  std::string h = "task_index,angle_deg";
  for (int i = 0; i < n; ++i) h += ",w_" + std::to_string(i + 1);
  h += ",set_label,run,return_raw,return_norm,stderr";
  return h;
}

}  // namespace

std::vector<double> sweep_angles(int count, double from_deg, double to_deg) {
  if (count < 1) throw ConfigError("a sweep needs at least one task");
  std::vector<double> out;
  for (int k = 0; k < count; ++k) {
    out.push_back(count == 1 ? from_deg : from_deg + (to_deg - from_deg) * k / (count - 1));
  }
  return out;
}

std::vector<TaskVector> sweep_tasks(int count, double from_deg, double to_deg) {
  std::vector<TaskVector> out;
  for (double a : sweep_angles(count, from_deg, to_deg)) out.push_back(task_at_angle(a));
  return out;
}

TaskVector named_task(int index) {
  const double h = std::sqrt(0.5);
  switch (index) {
    case 1: return TaskVector::unit({-h, h});
    case 2: return TaskVector::unit({0.0, 1.0});
    case 3: return TaskVector::unit({h, h});
    case 4: return TaskVector::unit({1.0, 0.0});
    case 5: return TaskVector::unit({h, -h});
    case 6: return TaskVector::unit({0.0, -1.0});
    case 7: return TaskVector::unit({-h, -h});
    case 8: return TaskVector::unit({-1.0, 0.0});
    case 9: return TaskVector::raw({0.0, 0.0});
    default: throw ConfigError("named tasks are w1..w9, got w" + std::to_string(index));
  }
}

double oracle_return(const TabularModel& model, std::span<const double> rewards) {
  return mean_over_starts(model, plan_finite_horizon(model, rewards, model.horizon()));
}

double oracle_return(const TabularModel& model, const TaskVector& w) {
  return oracle_return(model, model.linear_rewards(w));
}

double exact_return(const TabularModel& model, std::span<const std::uint8_t> policy, std::span<const double> rewards) {
  return mean_over_starts(model, evaluate_finite_horizon(model, policy, rewards, model.horizon()));
}

MeanStderr mean_stderr(std::span<const double> values) {
  MeanStderr out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stderr_ = std::sqrt(ss / static_cast<double>(values.size() - 1)) / std::sqrt(static_cast<double>(values.size()));
  }
  return out;
}

EvalReport task_sweep(const PolicySet& set, const TabularModel& model, const SweepSpec& spec) {
  if (spec.tasks.size() != spec.angles.size()) throw ConfigError("sweep needs one angle per task");
  if (spec.runs < 1 || spec.episodes < 1) throw ConfigError("sweep needs runs >= 1 and episodes >= 1");
  EvalReport rep;
  rep.set_label = set.label();
  rep.env_hash = [&] {
    std::ostringstream os;
    os << std::hex << model.config().hash();
    return os.str();
  }();
  rep.seed = spec.seed;
  rep.n_features = model.n_features();
  if (!model.deterministic()) rep.normalizer = "DP J* on the stochastic tabular MDP (mean over start states)";

  const std::size_t T = spec.tasks.size();
  const auto R = static_cast<std::size_t>(spec.runs);
  std::vector<double> oracle(T);
  std::vector<ActionTable> policies(T);
  std::vector<std::vector<double>> rewards(T);
  parallel_for(T, spec.jobs, [&](std::size_t t) {
    rewards[t] = model.linear_rewards(spec.tasks[t]);
    oracle[t] = oracle_return(model, rewards[t]);
    policies[t] = gpi_policy(set, spec.tasks[t]);
  });

  rep.rows.resize(T * R);
  parallel_for(T * R, spec.jobs, [&](std::size_t cell) {
    const std::size_t t = cell / R;
    const std::size_t r = cell % R;
    Rng rng(derive_seed(spec.seed, cell));
    const auto returns = rollout_returns(model, policies[t], rewards[t], spec.episodes, rng);
    const double denom = std::max(oracle[t], kNormEpsilon);
    std::vector<double> norm(returns.size());
    for (std::size_t e = 0; e < returns.size(); ++e) norm[e] = returns[e] / denom;
    EvalRow& row = rep.rows[cell];
    row.task_index = static_cast<int>(t);
    row.angle_deg = spec.angles[t];
    row.w.assign(spec.tasks[t].values().begin(), spec.tasks[t].values().end());
    row.set_label = set.label();
    row.run = static_cast<int>(r);
    row.return_raw = mean_stderr(returns).mean;
    const MeanStderr ms = mean_stderr(norm);
    row.return_norm = ms.mean;
    row.stderr_norm = ms.stderr_;
  });
  return rep;
}

std::vector<TaskSummary> summarize(const EvalReport& report) {
  std::vector<TaskSummary> out;
  std::size_t i = 0;
  while (i < report.rows.size()) {
    std::size_t j = i;
    std::vector<double> norm, raw;
    while (j < report.rows.size() && report.rows[j].task_index == report.rows[i].task_index) {
      norm.push_back(report.rows[j].return_norm);
      raw.push_back(report.rows[j].return_raw);
      ++j;
    }
    TaskSummary s;
    s.task_index = report.rows[i].task_index;
    s.angle_deg = report.rows[i].angle_deg;
    const MeanStderr ms = mean_stderr(norm);
    s.mean_norm = ms.mean;
    s.stderr_norm = ms.stderr_;
    s.mean_raw = mean_stderr(raw).mean;
    s.runs = static_cast<int>(norm.size());
    out.push_back(s);
    i = j;
  }
  return out;
}

std::vector<double> exact_gpi_sweep(const PolicySet& set, const TabularModel& model,
                                    const std::vector<TaskVector>& tasks) {
  std::vector<double> out;
  for (const TaskVector& w : tasks) {
    const auto r = model.linear_rewards(w);
    out.push_back(exact_return(model, gpi_policy(set, w), r) / std::max(oracle_return(model, r), kNormEpsilon));
  }
  return out;
}

std::vector<std::vector<double>> sf_snapshot(const PolicySet& set, int s, int a) {
  if (set.empty()) throw ProtocolError("snapshot of an empty policy set");
  if (s < 0 || s >= set.num_states() || a < 0 || a >= kNumActions) throw ConfigError("state or action out of range");
  std::vector<std::vector<double>> out;
  for (const PolicyMember& m : set.members()) {
    const auto row = m.sf.row(s, a);
    out.emplace_back(row.begin(), row.end());
  }
  return out;
}

std::string sf_snapshot_csv(const PolicySet& set, const std::vector<std::vector<double>>& matrix) {
  std::string out = "policy_index,policy_label";
  const std::size_t n = matrix.empty() ? 0 : matrix.front().size();
  for (std::size_t i = 0; i < n; ++i) out += ",psi_" + std::to_string(i + 1);
  out += '\n';
  for (std::size_t k = 0; k < matrix.size(); ++k) {
    out += std::to_string(k) + ',' + set[k].label;
    for (double x : matrix[k]) out += ',' + format_double(x);
    out += '\n';
  }
  return out;
}

ReportFormat parse_format(const std::string& name) {
  if (name == "csv") return ReportFormat::kCsv;
  if (name == "json") return ReportFormat::kJson;
  throw ConfigError("unknown format '" + name + "' (expected csv or json)");
}

std::string report_csv(const EvalReport& report) {
  std::string out = csv_header(report.n_features) + '\n';
  for (const EvalRow& r : report.rows) {
    if (r.set_label.find_first_of(",\n\"") != std::string::npos) {
      throw ConfigError("set label '" + r.set_label + "' cannot be written to CSV");
    }
    out += std::to_string(r.task_index) + ',' + format_double(r.angle_deg);
    for (double x : r.w) out += ',' + format_double(x);
    out += ',' + r.set_label + ',' + std::to_string(r.run) + ',' + format_double(r.return_raw) + ',' +
           format_double(r.return_norm) + ',' + format_double(r.stderr_norm) + '\n';
  }
  return out;
}

EvalReport parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty report");
  const auto header = split(line, ',');
  const int n = static_cast<int>(header.size()) - 7;
  if (n < 1 || line != csv_header(n)) throw ConfigError("unexpected report header: " + line);
  EvalReport rep;
  rep.n_features = n;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw ConfigError("report row has " + std::to_string(f.size()) + " fields");
    EvalRow r;
    r.task_index = parse_int(f[0]);
    r.angle_deg = parse_double(f[1]);
    for (int i = 0; i < n; ++i) r.w.push_back(parse_double(f[2 + static_cast<std::size_t>(i)]));
    const std::size_t o = 2 + static_cast<std::size_t>(n);
    r.set_label = f[o];
    r.run = parse_int(f[o + 1]);
    r.return_raw = parse_double(f[o + 2]);
    r.return_norm = parse_double(f[o + 3]);
    r.stderr_norm = parse_double(f[o + 4]);
    if (rep.set_label.empty()) rep.set_label = r.set_label;
    rep.rows.push_back(std::move(r));
  }
  return rep;
}

std::string report_json(const EvalReport& report) {
  ojson j;
  j["metadata"] = {{"set_label", report.set_label},   {"env_hash", report.env_hash},
                   {"seed", report.seed},             {"normalizer", report.normalizer},
                   {"n_features", report.n_features}, {"version", kVersion}};
  j["rows"] = ojson::array();
  for (const EvalRow& r : report.rows) {
    j["rows"].push_back({{"task_index", r.task_index},
                         {"angle_deg", r.angle_deg},
                         {"w", r.w},
                         {"set_label", r.set_label},
                         {"run", r.run},
                         {"return_raw", r.return_raw},
                         {"return_norm", r.return_norm},
                         {"stderr", r.stderr_norm}});
  }
  return j.dump(2) + '\n';
}

EvalReport parse_report_json(const std::string& text) {
  try {
    const ojson j = ojson::parse(text);
    EvalReport rep;
    const auto& m = j.at("metadata");
    rep.set_label = m.at("set_label").get<std::string>();
    rep.env_hash = m.at("env_hash").get<std::string>();
    rep.seed = m.at("seed").get<std::uint64_t>();
    rep.normalizer = m.at("normalizer").get<std::string>();
    rep.n_features = m.at("n_features").get<int>();
    for (const auto& r : j.at("rows")) {
      EvalRow row;
      row.task_index = r.at("task_index").get<int>();
      row.angle_deg = r.at("angle_deg").get<double>();
      row.w = r.at("w").get<std::vector<double>>();
      row.set_label = r.at("set_label").get<std::string>();
      row.run = r.at("run").get<int>();
      row.return_raw = r.at("return_raw").get<double>();
      row.return_norm = r.at("return_norm").get<double>();
      row.stderr_norm = r.at("stderr").get<double>();
      rep.rows.push_back(std::move(row));
    }
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed report JSON: ") + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit_report(const EvalReport& report, const std::filesystem::path& path, ReportFormat format) {
  write_text_file(path, format == ReportFormat::kCsv ? report_csv(report) : report_json(report));
}

}  // namespace sipgpi
