// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sipgpi/planning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sipgpi {

namespace {

void check_rewards(const TabularModel& model, std::span<const double> rewards) {
  if (rewards.size() != static_cast<std::size_t>(model.num_states()) * kNumActions) {
    throw ConfigError("reward table has the wrong size");
  }
}

void check_policy(const TabularModel& model, std::span<const std::uint8_t> policy) {
  if (policy.size() != static_cast<std::size_t>(model.num_states())) {
    throw ConfigError("policy table has the wrong size");
  }
}

// E[r + future(next)] for intended action a.
template <class Future>
double backup(const TabularModel& model, std::span<const double> rewards, int s, int a, Future&& future) {
  const std::size_t base = static_cast<std::size_t>(s) * kNumActions;
  if (model.deterministic()) {
    return rewards[base + static_cast<std::size_t>(a)] + future(model.next(s, a));
  }
  const auto probs = model.outcome_probs(a);
  double acc = 0.0;
  for (int b = 0; b < kNumActions; ++b) {
    acc += probs[static_cast<std::size_t>(b)] * (rewards[base + static_cast<std::size_t>(b)] + future(model.next(s, b)));
  }
  return acc;
}

}  // namespace

std::vector<double> plan_finite_horizon(const TabularModel& model, std::span<const double> rewards,
                                        int horizon) {
  check_rewards(model, rewards);
  const auto S = static_cast<std::size_t>(model.num_states());
  std::vector<double> v(S, 0.0), nv(S, 0.0);
  for (int t = 0; t < horizon; ++t) {
    for (int s = 0; s < model.num_states(); ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < kNumActions; ++a) {
        best = std::max(best, backup(model, rewards, s, a, [&](int n) { return v[static_cast<std::size_t>(n)]; }));
      }
      nv[static_cast<std::size_t>(s)] = best;
    }
    std::swap(v, nv);
  }
  return v;
}

std::vector<double> evaluate_finite_horizon(const TabularModel& model, std::span<const std::uint8_t> policy,
                                            std::span<const double> rewards, int horizon) {
  check_rewards(model, rewards);
  check_policy(model, policy);
  const auto S = static_cast<std::size_t>(model.num_states());
  std::vector<double> v(S, 0.0), nv(S, 0.0);
  for (int t = 0; t < horizon; ++t) {
    for (int s = 0; s < model.num_states(); ++s) {
      nv[static_cast<std::size_t>(s)] = backup(model, rewards, s, policy[static_cast<std::size_t>(s)],
                                               [&](int n) { return v[static_cast<std::size_t>(n)]; });
    }
    std::swap(v, nv);
  }
  return v;
}

double mean_over_starts(const TabularModel& model, std::span<const double> values) {
  double acc = 0.0;
  for (int s : model.starts()) acc += values[static_cast<std::size_t>(s)];
  return acc / static_cast<double>(model.starts().size());
}

std::vector<double> evaluate_discounted_q(const TabularModel& model, std::span<const std::uint8_t> policy,
                                          std::span<const double> rewards, double gamma, double tol) {
  check_rewards(model, rewards);
  check_policy(model, policy);
  DiscountFactor{gamma};
  const auto S = static_cast<std::size_t>(model.num_states());
  // Solve for V^pi first, then read Q off one backup.
  std::vector<double> v(S, 0.0);
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double delta = 0.0;
    for (int s = 0; s < model.num_states(); ++s) {
      const double nv = backup(model, rewards, s, policy[static_cast<std::size_t>(s)],
                               [&](int n) { return gamma * v[static_cast<std::size_t>(n)]; });
      delta = std::max(delta, std::fabs(nv - v[static_cast<std::size_t>(s)]));
      v[static_cast<std::size_t>(s)] = nv;
    }
    if (delta < tol) break;
  }
  std::vector<double> q(S * kNumActions, 0.0);
  for (int s = 0; s < model.num_states(); ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      q[static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(a)] =
          backup(model, rewards, s, a, [&](int n) { return gamma * v[static_cast<std::size_t>(n)]; });
    }
  }
  return q;
}

std::vector<double> solve_discounted_q(const TabularModel& model, std::span<const double> rewards,
                                       double gamma, double tol) {
  check_rewards(model, rewards);
  DiscountFactor{gamma};
  const auto S = static_cast<std::size_t>(model.num_states());
  std::vector<double> v(S, 0.0);
  for (int sweep = 0; sweep < 100000; ++sweep) {
    double delta = 0.0;
    for (int s = 0; s < model.num_states(); ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < kNumActions; ++a) {
        best = std::max(best, backup(model, rewards, s, a, [&](int n) { return gamma * v[static_cast<std::size_t>(n)]; }));
      }
      delta = std::max(delta, std::fabs(best - v[static_cast<std::size_t>(s)]));
      v[static_cast<std::size_t>(s)] = best;
    }
    if (delta < tol) break;
  }
  std::vector<double> q(S * kNumActions, 0.0);
  for (int s = 0; s < model.num_states(); ++s) {
    for (int a = 0; a < kNumActions; ++a) {
      q[static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(a)] =
          backup(model, rewards, s, a, [&](int n) { return gamma * v[static_cast<std::size_t>(n)]; });
    }
  }
  return q;
}

int argmax_first(std::span<const double> values, double tie_tol) {
  if (values.empty()) throw ProtocolError("argmax over an empty range");
  double best = values[0];
  for (double x : values) best = std::max(best, x);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= best - tie_tol) return static_cast<int>(i);
  }
  return 0;
}

ActionTable greedy_actions(std::span<const double> q, int num_actions, double tie_tol) {
  const std::size_t A = static_cast<std::size_t>(num_actions);
  ActionTable out(q.size() / A, 0);
  for (std::size_t s = 0; s < out.size(); ++s) {
    out[s] = static_cast<std::uint8_t>(argmax_first(q.subspan(s * A, A), tie_tol));
  }
  return out;
}

}  // namespace sipgpi
