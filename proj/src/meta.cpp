// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sipgpi/meta.hpp"

#include <algorithm>
#include <cmath>

#include "sipgpi/harness.hpp"
#include "sipgpi/random.hpp"

namespace sipgpi {

namespace {

std::vector<int> counts_at(const TabularModel& model, int s) {
  std::vector<int> counts(static_cast<std::size_t>(model.n_features()), 0);
  const std::uint64_t present = model.presence(s);
  const auto& items = model.config().placement;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if ((present >> k) & 1u) ++counts[static_cast<std::size_t>(items[k].type)];
  }
  return counts;
}

int sample_executed(const TabularModel& model, int a, Rng& rng) {
  if (model.slip() > 0.0 && uniform01(rng) < model.slip()) return static_cast<int>(uniform_index(rng, kNumActions));
  return a;
}

void check_finite(double q, double bound) {
  if (!(std::fabs(q) <= bound)) throw DivergenceError("Q estimate " + std::to_string(q) + " diverged");
}

std::vector<int> exploring_pool(const TabularModel& model) {
  std::vector<int> pool;
  for (int s = 0; s < model.num_states(); ++s) {
    if (model.valid(s) && model.reachable(s)) pool.push_back(s);
  }
  return pool;
}

int episode_start(const TabularModel& model, const std::vector<int>& pool, double fraction, Rng& rng) {
  if (fraction > 0.0 && uniform01(rng) < fraction) return pool[uniform_index(rng, pool.size())];
  return model.starts()[uniform_index(rng, model.starts().size())];
}

double normalized_return(const TabularModel& model, std::span<const std::uint8_t> policy,
                         std::span<const double> rewards, double oracle) {
  return exact_return(model, policy, rewards) / std::max(oracle, kNormEpsilon);
}

}  // namespace

NonlinearKind parse_nonlinear_kind(const std::string& name) {
  if (name == "sequential") return NonlinearKind::kSequential;
  if (name == "balanced") return NonlinearKind::kBalanced;
  throw ConfigError("unknown task kind '" + name + "' (expected sequential or balanced)");
}

std::string to_string(NonlinearKind kind) { return kind == NonlinearKind::kSequential ? "sequential" : "balanced"; }

double sequential_reward(std::span<const int> counts_before, int type) {
  if (type < 0) return 0.0;
  if (counts_before.size() < 2) throw ConfigError("the sequential task needs two item types");
  if (counts_before[0] > 0) return type == 0 ? 1.0 : -1.0;
  return type == 1 ? 1.0 : 0.0;
}

double balanced_reward(std::span<const int> counts_before, int type) {
  if (type < 0) return 0.0;
  const int mine = counts_before[static_cast<std::size_t>(type)];
  int other = 0;
  for (std::size_t t = 0; t < counts_before.size(); ++t) {
    if (static_cast<int>(t) != type) other = std::max(other, counts_before[t]);
  }
  if (mine > other) return 1.0;
  if (mine < other) return -1.0;
  return 0.0;
}

double nonlinear_reward(NonlinearKind kind, std::span<const int> counts_before, int type) {
  return kind == NonlinearKind::kSequential ? sequential_reward(counts_before, type)
                                            : balanced_reward(counts_before, type);
}

RewardTable nonlinear_rewards(const TabularModel& model, NonlinearKind kind) {
  RewardTable r(static_cast<std::size_t>(model.num_states()) * kNumActions, 0.0);
  for (int s = 0; s < model.num_states(); ++s) {
    const auto counts = counts_at(model, s);
    for (int b = 0; b < kNumActions; ++b) {
      r[static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(b)] =
          nonlinear_reward(kind, counts, model.feature_type(s, b));
    }
  }
  return r;
}

double LearningCurve::auc() const {
  if (returns.empty()) return 0.0;
  double acc = 0.0;
  for (double x : returns) acc += x;
  return acc / static_cast<double>(returns.size());
}

double LearningCurve::asymptote(int tail) const {
  if (returns.empty()) return 0.0;
  const std::size_t k = std::min(returns.size(), static_cast<std::size_t>(std::max(tail, 1)));
  double acc = 0.0;
  for (std::size_t i = returns.size() - k; i < returns.size(); ++i) acc += returns[i];
  return acc / static_cast<double>(k);
}

void MetaParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0 && epsilon_start >= 0.0 && epsilon_start <= 1.0)) {
    throw ConfigError("epsilon must lie in [0, 1]");
  }
  if (!(anneal_fraction > 0.0 && anneal_fraction <= 1.0)) throw ConfigError("anneal_fraction must lie in (0, 1]");
  if (episodes < 0) throw ConfigError("episodes must be >= 0");
  if (!(exploring_starts >= 0.0 && exploring_starts <= 1.0)) throw ConfigError("exploring_starts must lie in [0, 1]");
  if (eval_every < 1) throw ConfigError("eval_every must be >= 1");
  if (commit_steps < 1) throw ConfigError("commit_steps must be >= 1");
  DiscountFactor{gamma};
}

std::vector<TaskVector> MetaParams::resolved_options() const {
  if (!options.empty()) return options;
  std::vector<TaskVector> out;
  for (int i = 1; i <= 5; ++i) out.push_back(named_task(i));
  return out;
}

double MetaParams::epsilon_at(int episode) const {
  const double span = std::max(1.0, anneal_fraction * episodes);
  const double frac = std::min(1.0, episode / span);
  return epsilon_start + (epsilon - epsilon_start) * frac;
}

double nonlinear_oracle(const TabularModel& model, NonlinearKind kind) {
  return oracle_return(model, nonlinear_rewards(model, kind));
}

MetaResult train_meta(NonlinearKind kind, const PolicySet& set, const TabularModel& model, const MetaParams& params,
                      const std::string& agent) {
  params.validate();
  if (set.num_states() != model.num_states() || set.n_features() != model.n_features()) {
    throw ConfigError("policy set does not match the environment");
  }
  const auto options = params.resolved_options();
  const int K = static_cast<int>(options.size());
  const int S = model.num_states();
  std::vector<ActionTable> option_policy;
  for (const auto& w : options) option_policy.push_back(gpi_policy(set, w));
  const RewardTable rewards = nonlinear_rewards(model, kind);
  const double oracle = oracle_return(model, rewards);
  const double bound = 10.0 / (1.0 - params.gamma);

  MetaResult out;
  out.q_meta.assign(static_cast<std::size_t>(S) * static_cast<std::size_t>(K), 0.0);
  out.curve.agent = agent;
  auto row = [&](int s) {
    return std::span<double>(out.q_meta).subspan(static_cast<std::size_t>(s) * static_cast<std::size_t>(K),
                                                 static_cast<std::size_t>(K));
  };
  auto greedy = [&] {
    out.option_of.assign(static_cast<std::size_t>(S), 0);
    out.policy.assign(static_cast<std::size_t>(S), 0);
    for (int s = 0; s < S; ++s) {
      const int k = argmax_first(row(s));
      out.option_of[static_cast<std::size_t>(s)] = k;
      out.policy[static_cast<std::size_t>(s)] = option_policy[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
    }
  };
  auto checkpoint = [&](int ep) {
    greedy();
    out.curve.episodes.push_back(ep);
    out.curve.returns.push_back(normalized_return(model, out.policy, rewards, oracle));
  };

  Rng rng(derive_seed(params.seed, 0));
  const auto pool = exploring_pool(model);
  checkpoint(0);
  for (int ep = 1; ep <= params.episodes; ++ep) {
    const double eps = params.epsilon_at(ep - 1);
    int s = episode_start(model, pool, params.exploring_starts, rng);
    int k = 0;
    for (int t = 0; t < model.horizon(); ++t) {
      if (t % params.commit_steps == 0) {
        k = uniform01(rng) < eps ? static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(K)))
                                            : argmax_first(row(s));
      }
      const int a = option_policy[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
      const int b = sample_executed(model, a, rng);
      const int nx = model.next(s, b);
      const double r = rewards[static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(b)];
      double target = r;
      if (t + 1 < model.horizon()) {
        const auto next = row(nx);
        target += params.gamma * *std::max_element(next.begin(), next.end());
      }
      double& q = row(s)[static_cast<std::size_t>(k)];
      q += params.alpha * (target - q);
      check_finite(q, bound);
      s = nx;
    }
    if (ep % params.eval_every == 0) checkpoint(ep);
  }
  greedy();
  return out;
}

FlatQResult qlearn_baseline(NonlinearKind kind, const TabularModel& model, const MetaParams& params,
                            const std::string& agent) {
  params.validate();
  const int S = model.num_states();
  const RewardTable rewards = nonlinear_rewards(model, kind);
  const double oracle = oracle_return(model, rewards);
  const double bound = 10.0 / (1.0 - params.gamma);

  FlatQResult out;
  out.q.assign(static_cast<std::size_t>(S) * kNumActions, 0.0);
  out.curve.agent = agent;
  auto row = [&](int s) { return std::span<double>(out.q).subspan(static_cast<std::size_t>(s) * kNumActions, kNumActions); };
  auto checkpoint = [&](int ep) {
    out.policy = greedy_actions(out.q, kNumActions);
    out.curve.episodes.push_back(ep);
    out.curve.returns.push_back(normalized_return(model, out.policy, rewards, oracle));
  };

  Rng rng(derive_seed(params.seed, 0));
  const auto pool = exploring_pool(model);
  checkpoint(0);
  for (int ep = 1; ep <= params.episodes; ++ep) {
    const double eps = params.epsilon_at(ep - 1);
    int s = episode_start(model, pool, params.exploring_starts, rng);
    for (int t = 0; t < model.horizon(); ++t) {
      const int a = uniform01(rng) < eps ? static_cast<int>(uniform_index(rng, kNumActions))
                                                    : argmax_first(row(s));
      const int b = sample_executed(model, a, rng);
      const int nx = model.next(s, b);
      double target = rewards[static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(b)];
      if (t + 1 < model.horizon()) {
        const auto next = row(nx);
        target += params.gamma * *std::max_element(next.begin(), next.end());
      }
      double& q = row(s)[static_cast<std::size_t>(a)];
      q += params.alpha * (target - q);
      check_finite(q, bound);
      s = nx;
    }
    if (ep % params.eval_every == 0) checkpoint(ep);
  }
  out.policy = greedy_actions(out.q, kNumActions);
  return out;
}

std::string curves_csv(const std::vector<std::vector<LearningCurve>>& agents) {
  std::string out = "episode,mean,stderr,agent\n";
  for (const auto& runs : agents) {
    if (runs.empty()) continue;
    const auto& ref = runs.front();
    for (const auto& c : runs) {
      if (c.episodes != ref.episodes) throw ProtocolError("runs of agent '" + ref.agent + "' use different checkpoints");
    }
    for (std::size_t i = 0; i < ref.episodes.size(); ++i) {
      std::vector<double> v;
      for (const auto& c : runs) v.push_back(c.returns[i]);
      const MeanStderr ms = mean_stderr(v);
      out += std::to_string(ref.episodes[i]) + ',' + format_double(ms.mean) + ',' + format_double(ms.stderr_) + ',' +
             ref.agent + '\n';
    }
  }
  return out;
}

}  // namespace sipgpi
