// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sipgpi/sf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sipgpi/kernels.hpp"
#include "sipgpi/random.hpp"

namespace sipgpi {

namespace {

void append_double(std::string& out, double x) { out += format_double(x); }

int sample_executed(const TabularModel& model, int intended, Rng& rng) {
  if (model.slip() > 0.0 && uniform01(rng) < model.slip()) {
    return static_cast<int>(uniform_index(rng, kNumActions));
  }
  return intended;
}

void check_policy_size(const TabularModel& model, std::span<const std::uint8_t> policy) {
  if (policy.size() != static_cast<std::size_t>(model.num_states())) {
    throw ConfigError("policy covers " + std::to_string(policy.size()) + " states, model has " +
                      std::to_string(model.num_states()));
  }
}

// E[phi + gamma psi(s', pi(s'))] for row (s, a), written into `out`.
void sf_target(const TabularModel& model, const SFTable& sf, std::span<const std::uint8_t> policy, int s, int a,
               std::span<double> out) {
  const int n = model.n_features();
  const double g = sf.gamma();
  std::fill(out.begin(), out.end(), 0.0);
  auto add = [&](double p, int b) {
    const int nx = model.next(s, b);
    const auto next_row = sf.row(nx, policy[static_cast<std::size_t>(nx)]);
    const int t = model.feature_type(s, b);
    for (int i = 0; i < n; ++i) {
      const double phi = (i == t) ? model.feature_value() : 0.0;
      out[static_cast<std::size_t>(i)] += p * (phi + g * next_row[static_cast<std::size_t>(i)]);
    }
  };
  if (model.deterministic()) {
    add(1.0, a);
  } else {
    const auto probs = model.outcome_probs(a);
    for (int b = 0; b < kNumActions; ++b) add(probs[static_cast<std::size_t>(b)], b);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// SFTable

SFTable::SFTable(int n_features, int num_states, int num_actions, double gamma)
    : n_(n_features), num_states_(num_states), num_actions_(num_actions), gamma_(DiscountFactor(gamma).value()) {
  if (n_features < 1 || num_states < 1 || num_actions < 1) throw ConfigError("sftable: empty shape");
  psi_.assign(static_cast<std::size_t>(n_) * static_cast<std::size_t>(num_states_) *
                  static_cast<std::size_t>(num_actions_),
              0.0);
}

void SFTable::q_values(int s, const TaskVector& w, std::span<double> out) const {
  if (w.dim() != static_cast<std::size_t>(n_)) throw ConfigError("task dimension does not match the SF table");
  kernels::dot_rows(state_rows(s), static_cast<std::size_t>(n_), w.values(), out.first(static_cast<std::size_t>(num_actions_)));
}

std::vector<double> SFTable::q_table(const TaskVector& w) const {
  if (w.dim() != static_cast<std::size_t>(n_)) throw ConfigError("task dimension does not match the SF table");
  std::vector<double> q(static_cast<std::size_t>(num_states_) * static_cast<std::size_t>(num_actions_));
  kernels::dot_rows(psi_, static_cast<std::size_t>(n_), w.values(), q);
  return q;
}

std::string SFTable::serialize() const {
  std::string out = "sftable " + std::to_string(n_) + ' ' + std::to_string(num_states_) + ' ' +
                    std::to_string(num_actions_) + ' ';
  append_double(out, gamma_);
  out += '\n';
  for (std::size_t r = 0; r < psi_.size(); r += static_cast<std::size_t>(n_)) {
    for (int i = 0; i < n_; ++i) {
      if (i) out += ' ';
      append_double(out, psi_[r + static_cast<std::size_t>(i)]);
    }
    out += '\n';
  }
  return out;
}

SFTable SFTable::parse(const std::string& text) {
  std::istringstream in(text);
  std::string magic, g;
  int n = 0, S = 0, A = 0;
  if (!(in >> magic >> n >> S >> A >> g) || magic != "sftable") throw ConfigError("sftable: bad header");
  SFTable t(n, S, A, parse_double(g));
  std::string tok;
  for (double& x : t.psi_) {
    if (!(in >> tok)) throw ConfigError("sftable: truncated body");
    x = parse_double(tok);
  }
  if (in >> tok) throw ConfigError("sftable: trailing data");
  return t;
}

void SFTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize();
  if (!out) throw IoError("write failed: " + path.string());
}

SFTable SFTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Training

void TrainerParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
    throw ConfigError("epsilon must lie in [0, 1]");
  }
  if (!(anneal_fraction > 0.0 && anneal_fraction <= 1.0)) throw ConfigError("anneal_fraction must lie in (0, 1]");
  if (!(exploring_starts >= 0.0 && exploring_starts <= 1.0)) throw ConfigError("exploring_starts must lie in [0, 1]");
  if (episodes < 0) throw ConfigError("episodes must be >= 0");
  if (eval_sweeps < 1) throw ConfigError("eval_sweeps must be >= 1");
  if (!(tie_tol >= 0.0)) throw ConfigError("tie_tol must be >= 0");
  DiscountFactor{gamma};
}

TrainedPolicy train_sf_policy(const TabularModel& model, const TaskVector& w_train, const TrainerParams& params) {
  params.validate();
  const int n = model.n_features();
  if (w_train.dim() != static_cast<std::size_t>(n)) throw ConfigError("task dimension does not match the features");
  const int S = model.num_states();
  const double g = params.gamma;
  const double C = model.feature_value();
  const double bound = 10.0 * C / (1.0 - g);

  SFTable psi(n, S, kNumActions, g);
  Rng rng(derive_seed(params.seed, 0));
  std::array<double, kNumActions> q{};
  const auto& starts = model.starts();
  std::vector<int> pool;
  for (int s = 0; s < S; ++s) {
    if (model.valid(s) && model.reachable(s)) pool.push_back(s);
  }
  const double anneal_episodes = std::max(1.0, params.anneal_fraction * params.episodes);

  for (int ep = 0; ep < params.episodes; ++ep) {
    const double frac = std::min(1.0, ep / anneal_episodes);
    const double eps = params.epsilon_start + (params.epsilon_end - params.epsilon_start) * frac;
    const bool explore = params.exploring_starts > 0.0 && uniform01(rng) < params.exploring_starts;
    int s = explore ? pool[uniform_index(rng, pool.size())] : starts[uniform_index(rng, starts.size())];
    for (int t = 0; t < model.horizon(); ++t) {
      int a;
      if (uniform01(rng) < eps) {
        a = static_cast<int>(uniform_index(rng, kNumActions));
      } else {
        psi.q_values(s, w_train, q);
        a = argmax_first(q);
      }
      const int b = sample_executed(model, a, rng);
      const int nx = model.next(s, b);
      const int type = model.feature_type(s, b);
      const bool terminal = t + 1 == model.horizon();
      auto row = psi.row(s, a);
      if (terminal) {
        for (int i = 0; i < n; ++i) {
          const double phi = (i == type) ? C : 0.0;
          row[static_cast<std::size_t>(i)] += params.alpha * (phi - row[static_cast<std::size_t>(i)]);
        }
      } else {
        psi.q_values(nx, w_train, q);
        const auto next_row = psi.row(nx, argmax_first(q));
        for (int i = 0; i < n; ++i) {
          const double phi = (i == type) ? C : 0.0;
          const double target = phi + g * next_row[static_cast<std::size_t>(i)];
          row[static_cast<std::size_t>(i)] += params.alpha * (target - row[static_cast<std::size_t>(i)]);
        }
      }
      for (double x : row) {
        if (!(std::fabs(x) <= bound)) {
          throw DivergenceError("SF estimate " + std::to_string(x) + " left [-" + std::to_string(bound) + ", " +
                                std::to_string(bound) + "] while training on " + format_task(w_train));
        }
      }
      s = nx;
    }
  }

  TrainedPolicy out;
  out.policy.training_task = w_train;
  out.policy.action_of = greedy_actions(psi.q_table(w_train), kNumActions, params.tie_tol);
  out.control_sf = psi;

  out.sf = evaluate_sf_td(model, out.policy.action_of, params);
  return out;
}

// On-policy evaluation of a fixed policy over every (s, a). Deterministic
// dynamics make each update exact, so the step size stays put; sampled slip
// outcomes need a decaying step.
SFTable evaluate_sf_td(const TabularModel& model, std::span<const std::uint8_t> pi, const TrainerParams& params) {
  params.validate();
  check_policy_size(model, pi);
  const int n = model.n_features();
  const int S = model.num_states();
  const double g = params.gamma;
  const double C = model.feature_value();
  SFTable ev(n, S, kNumActions, g);
  Rng eval_rng(derive_seed(params.seed, 1));
  for (int k = 0; k < params.eval_sweeps; ++k) {
    const double alpha = model.deterministic()
                             ? params.eval_alpha_deterministic
                             : params.eval_alpha_stochastic / (1.0 + k / params.eval_alpha_decay);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < kNumActions; ++a) {
        const int b = sample_executed(model, a, eval_rng);
        const int nx = model.next(s, b);
        const int type = model.feature_type(s, b);
        const auto next_row = ev.row(nx, pi[static_cast<std::size_t>(nx)]);
        auto row = ev.row(s, a);
        for (int i = 0; i < n; ++i) {
          const double phi = (i == type) ? C : 0.0;
          row[static_cast<std::size_t>(i)] += alpha * (phi + g * next_row[static_cast<std::size_t>(i)] - row[static_cast<std::size_t>(i)]);
        }
      }
    }
  }
  return ev;
}

// ---------------------------------------------------------------------------
// Exact SFs

double sf_residual(const TabularModel& model, const SFTable& sf, std::span<const std::uint8_t> policy) {
  check_policy_size(model, policy);
  std::vector<double> target(static_cast<std::size_t>(model.n_features()));
  double worst = 0.0;
  for (int s = 0; s < model.num_states(); ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      sf_target(model, sf, policy, s, a, target);
      worst = std::max(worst, kernels::max_abs_diff(sf.row(s, a), target));
    }
  }
  return worst;
}

SFTable exact_sf(const TabularModel& model, std::span<const std::uint8_t> policy, double gamma, double tol) {
  check_policy_size(model, policy);
  SFTable sf(model.n_features(), model.num_states(), kNumActions, gamma);
  std::vector<double> target(static_cast<std::size_t>(model.n_features()));
  for (int sweep = 0; sweep < 1000000; ++sweep) {
    double delta = 0.0;
    for (int s = 0; s < model.num_states(); ++s) {
      for (int a = 0; a < kNumActions; ++a) {
        sf_target(model, sf, policy, s, a, target);
        auto row = sf.row(s, a);
        delta = std::max(delta, kernels::max_abs_diff(row, target));
        std::copy(target.begin(), target.end(), row.begin());
      }
    }
    if (delta < tol * 0.01 && sf_residual(model, sf, policy) < tol) return sf;
  }
  throw DivergenceError("exact_sf did not reach the residual tolerance");
}

std::vector<double> expected_sf_at_start(const TabularModel& model, const SFTable& sf,
                                         std::span<const std::uint8_t> policy) {
  check_policy_size(model, policy);
  std::vector<double> mean(static_cast<std::size_t>(sf.n_features()), 0.0);
  for (int s0 : model.starts()) {
    const auto row = sf.row(s0, policy[static_cast<std::size_t>(s0)]);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += row[i];
  }
  for (double& x : mean) x /= static_cast<double>(model.starts().size());
  return mean;
}

}  // namespace sipgpi
