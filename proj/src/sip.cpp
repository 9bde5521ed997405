// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sipgpi/sip.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include <json.hpp>

#include "sipgpi/parallel.hpp"
#include "sipgpi/random.hpp"

namespace sipgpi {

namespace {

const char kActionLetters[] = "UDLR";

}  // namespace

std::string action_string(const std::vector<int>& actions) {
  std::string out;
  for (int a : actions) out += kActionLetters[a];
  return out;
}

std::vector<TaskVector> default_sip_tasks(int n) {
  if (n < 1) throw ConfigError("need at least one feature");
  std::vector<TaskVector> out;
  const double mag = std::sqrt(1.0 / n);
  for (int t = 0; t < n; ++t) {
    std::vector<double> w(static_cast<std::size_t>(n), -mag);
    w[static_cast<std::size_t>(t)] = mag;
    out.push_back(normalize_task(w));
  }
  return out;
}

void check_sip_tasks(const std::vector<TaskVector>& tasks, int n) {
  if (static_cast<int>(tasks.size()) != n) {
    throw ConfigError("a SIP needs one task per feature: got " + std::to_string(tasks.size()) + " tasks for " +
                      std::to_string(n) + " features");
  }
  for (int t = 0; t < n; ++t) {
    const TaskVector& w = tasks[static_cast<std::size_t>(t)];
    if (w.dim() != static_cast<std::size_t>(n)) throw ConfigError("task " + std::to_string(t) + " has the wrong dimension");
    for (int j = 0; j < n; ++j) {
      const double x = w[static_cast<std::size_t>(j)];
      if ((j == t && !(x > 0.0)) || (j != t && !(x < 0.0))) {
        throw ConfigError("task " + std::to_string(t + 1) + " " + format_task(w) +
                          " violates the sign pattern (positive in coordinate " + std::to_string(t + 1) +
                          ", negative elsewhere)");
      }
    }
  }
}

PolicySet train_policy_set(const TabularModel& model, const std::vector<TaskVector>& tasks,
                           const std::vector<std::string>& labels, const TrainerParams& params, int jobs) {
  if (labels.size() != tasks.size()) throw ConfigError("one label per task required");
  params.validate();
  std::vector<TrainedPolicy> trained(tasks.size());
  parallel_for(tasks.size(), jobs, [&](std::size_t t) {
    TrainerParams p = params;
    p.seed = derive_seed(params.seed, t);
    trained[t] = train_sf_policy(model, tasks[t], p);
  });
  PolicySet set;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    set.add({labels[t], std::move(trained[t].policy), std::move(trained[t].sf)});
  }
  return set;
}

PolicySet build_sip(const TabularModel& model, const std::vector<TaskVector>& tasks, const TrainerParams& params,
                    int jobs) {
  check_sip_tasks(tasks, model.n_features());
  std::vector<std::string> labels;
  for (std::size_t t = 0; t < tasks.size(); ++t) labels.push_back("sip_" + std::to_string(t + 1));
  PolicySet set = train_policy_set(model, tasks, labels, params, jobs);
  set.set_label("sip");
  return set;
}

PolicySet build_sip(const TabularModel& model, const TrainerParams& params, int jobs) {
  return build_sip(model, default_sip_tasks(model.n_features()), params, jobs);
}

std::vector<int> assign_features(const PolicySet& set, const TabularModel& model) {
  const int n = model.n_features();
  std::vector<std::vector<double>> mean;
  for (const PolicyMember& m : set.members()) mean.push_back(expected_sf_at_start(model, m.sf, m.policy.action_of));
  std::vector<int> out(set.size(), 0);
  if (static_cast<int>(set.size()) == n && n <= 8) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = -1.0;
    do {
      double score = 0.0;
      for (std::size_t k = 0; k < perm.size(); ++k) score += mean[k][static_cast<std::size_t>(perm[k])];
      if (score > best) {
        best = score;
        out = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
  }
  for (std::size_t k = 0; k < set.size(); ++k) out[k] = argmax_first(mean[k]);
  return out;
}

SipReport verify_sip(const PolicySet& set, const TabularModel& model) {
  if (!model.deterministic()) {
    throw ConfigError("verify_sip needs deterministic dynamics: slip can make any trajectory trigger any feature");
  }
  SipReport rep;
  if (set.empty()) {
    rep.pass = true;
    rep.reason = "empty set (vacuous)";
    return rep;
  }
  if (set.num_states() != model.num_states() || set.n_features() != model.n_features()) {
    throw ConfigError("policy set does not match the environment");
  }
  const int n = model.n_features();
  const std::vector<int> feature = assign_features(set, model);
  rep.pass = true;
  if (static_cast<int>(set.size()) != n) {
    rep.pass = false;
    rep.reason = "set has " + std::to_string(set.size()) + " members for " + std::to_string(n) + " features";
  }
  for (std::size_t k = 0; k < set.size(); ++k) {
    const PolicyMember& m = set[k];
    SipMemberReport mr;
    mr.label = m.label;
    mr.feature = feature[k];
    mr.attains_own = true;
    for (int s0 : model.starts()) {
      int s = s0;
      std::vector<int> actions;
      bool own = false;
      bool violated = false;
      for (int t = 0; t < model.horizon(); ++t) {
        const int a = m.policy(s);
        actions.push_back(a);
        const int type = model.feature_type(s, a);
        if (type == mr.feature) own = true;
        if (type >= 0 && type != mr.feature && !violated) {
          violated = true;
          mr.violations.push_back({model.agent_cell(s0), t, type, action_string(actions)});
        }
        s = model.next(s, a);
      }
      if (!own) mr.attains_own = false;
      if (mr.witness.empty()) mr.witness = action_string(actions);
      const auto row = m.sf.row(s0, m.policy(s0));
      for (int j = 0; j < n; ++j) {
        if (j != mr.feature) mr.max_off_diagonal = std::max(mr.max_off_diagonal, std::fabs(row[static_cast<std::size_t>(j)]));
      }
    }
    mr.pass = mr.violations.empty() && mr.attains_own;
    if (!mr.pass) {
      rep.pass = false;
      if (rep.reason.empty()) {
        rep.reason = "member '" + m.label + "' " +
                     (mr.violations.empty() ? std::string("never collects its own feature")
                                            : "triggers feature " + std::to_string(mr.violations.front().feature));
      }
    }
    rep.members.push_back(std::move(mr));
  }
  if (rep.pass) rep.reason = "every member collects only its own feature from every start state";
  return rep;
}

std::string SipReport::to_json() const {
  nlohmann::ordered_json j;
  j["pass"] = pass;
  j["reason"] = reason;
  j["members"] = nlohmann::ordered_json::array();
  for (const SipMemberReport& m : members) {
    nlohmann::ordered_json jm;
    jm["label"] = m.label;
    jm["feature"] = m.feature;
    jm["pass"] = m.pass;
    jm["attains_own_feature"] = m.attains_own;
    jm["max_off_diagonal"] = m.max_off_diagonal;
    jm["witness"] = m.witness;
    jm["violations"] = nlohmann::ordered_json::array();
    for (const SipViolation& v : m.violations) {
      jm["violations"].push_back({{"start", {v.start.row, v.start.col}},
                                  {"step", v.step},
                                  {"feature", v.feature},
                                  {"actions", v.actions}});
    }
    j["members"].push_back(std::move(jm));
  }
  return j.dump(2) + '\n';
}

SparsityReport sf_sparsity_check(const PolicySet& set, const TabularModel& model, double tol, SfSource source) {
  SparsityReport rep;
  rep.tol = tol;
  if (set.empty()) {
    rep.pass = true;
    return rep;
  }
  const int n = model.n_features();
  const std::vector<int> feature = assign_features(set, model);
  const auto S = static_cast<std::size_t>(model.num_states());
  for (std::size_t k = 0; k < set.size(); ++k) {
    const PolicyMember& m = set[k];
    const SFTable exact = source == SfSource::kExact ? exact_sf(model, m.policy.action_of, m.sf.gamma()) : SFTable{};
    const SFTable& sf = source == SfSource::kExact ? exact : m.sf;
    // States reachable under pi from the starts (every slip outcome counts).
    std::vector<std::uint8_t> seen(S, 0);
    std::deque<int> queue;
    for (int s0 : model.starts()) {
      if (!seen[static_cast<std::size_t>(s0)]) {
        seen[static_cast<std::size_t>(s0)] = 1;
        queue.push_back(s0);
      }
    }
    SparsityMember lm{m.label, feature[k], 0.0};
    while (!queue.empty()) {
      const int s = queue.front();
      queue.pop_front();
      const int a = m.policy(s);
      const auto row = sf.row(s, a);
      for (int j = 0; j < n; ++j) {
        if (j != lm.feature) lm.max_off_diagonal = std::max(lm.max_off_diagonal, std::fabs(row[static_cast<std::size_t>(j)]));
      }
      for (int b = 0; b < kNumActions; ++b) {
        if (model.deterministic() && b != a) continue;
        const int nx = model.next(s, b);
        if (!seen[static_cast<std::size_t>(nx)]) {
          seen[static_cast<std::size_t>(nx)] = 1;
          queue.push_back(nx);
        }
      }
    }
    rep.max_off_diagonal = std::max(rep.max_off_diagonal, lm.max_off_diagonal);
    rep.members.push_back(lm);
  }
  rep.pass = rep.max_off_diagonal <= tol;
  return rep;
}

}  // namespace sipgpi
