// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sipgpi/lifelong.hpp"

#include <algorithm>
#include <cmath>

#include "sipgpi/harness.hpp"
#include "sipgpi/kernels.hpp"
#include "sipgpi/random.hpp"

namespace sipgpi {

void TaskSchedule::validate() const {
  if (cycle.empty()) throw ConfigError("task schedule has no tasks");
  if (phase_length < 1) throw ConfigError("phase_length must be >= 1");
  if (total_steps < 0) throw ConfigError("total_steps must be >= 0");
}

std::int64_t TaskSchedule::resolved_total() const {
  if (total_steps > 0) return total_steps;
  return static_cast<std::int64_t>(cycle.size() + 1) * phase_length;
}

int TaskSchedule::task_index_at(std::int64_t step) const {
  return static_cast<int>(phase_at(step) % static_cast<std::int64_t>(cycle.size()));
}

TaskSchedule make_schedule(std::vector<TaskVector> cycle, std::int64_t phase_length, std::int64_t total_steps) {
  if (cycle.empty()) {
    for (int i = 1; i <= 5; ++i) cycle.push_back(named_task(i));
  }
  TaskSchedule s{std::move(cycle), phase_length, total_steps};
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// WEstimator

WEstimator::WEstimator(int n, double lambda, std::vector<double> prior)
    : n_(n), lambda_(lambda), prior_(std::move(prior)) {
  if (n < 1) throw ConfigError("estimator needs at least one feature");
  if (!(lambda > 0.0)) throw ConfigError("ridge lambda must be > 0");
  if (prior_.empty()) prior_.assign(static_cast<std::size_t>(n), 1.0 / std::sqrt(static_cast<double>(n)));
  if (prior_.size() != static_cast<std::size_t>(n)) throw ConfigError("prior has the wrong dimension");
  unit_ = normalize_task(prior_);
  reset();
}

void WEstimator::reset() {
  const auto N = static_cast<std::size_t>(n_);
  gram_.assign(N * N, 0.0);
  rhs_.assign(N, 0.0);
  seen_.assign(N, 0);
  count_ = 0;
  solve();
}

void WEstimator::observe(std::span<const double> phi, double r) {
  if (phi.size() != static_cast<std::size_t>(n_)) throw ConfigError("feature vector has the wrong dimension");
  bool any = false;
  for (double x : phi) any = any || x != 0.0;
  if (!any) return;
  const auto N = static_cast<std::size_t>(n_);
  for (std::size_t i = 0; i < N; ++i) {
    if (phi[i] != 0.0) seen_[i] = 1;
    rhs_[i] += phi[i] * r;
    for (std::size_t j = 0; j < N; ++j) gram_[i * N + j] += phi[i] * phi[j];
  }
  ++count_;
  solve();
}

double WEstimator::residual(std::span<const double> phi, double r) const { return std::fabs(r - dot(phi, w_)); }

void WEstimator::solve() {
  const auto N = static_cast<std::size_t>(n_);
  // Gaussian elimination with partial pivoting on the n x (n+1) system.
  std::vector<double> a(N * (N + 1));
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) a[i * (N + 1) + j] = gram_[i * N + j] + (i == j ? lambda_ : 0.0);
    a[i * (N + 1) + N] = rhs_[i] + lambda_ * prior_[i];
  }
  for (std::size_t c = 0; c < N; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < N; ++r) {
      if (std::fabs(a[r * (N + 1) + c]) > std::fabs(a[piv * (N + 1) + c])) piv = r;
    }
    if (piv != c) {
      for (std::size_t j = 0; j <= N; ++j) std::swap(a[c * (N + 1) + j], a[piv * (N + 1) + j]);
    }
    for (std::size_t r = c + 1; r < N; ++r) {
      const double f = a[r * (N + 1) + c] / a[c * (N + 1) + c];
      for (std::size_t j = c; j <= N; ++j) a[r * (N + 1) + j] -= f * a[c * (N + 1) + j];
    }
  }
  w_.assign(N, 0.0);
  for (std::size_t i = N; i-- > 0;) {
    double acc = a[i * (N + 1) + N];
    for (std::size_t j = i + 1; j < N; ++j) acc -= a[i * (N + 1) + j] * w_[j];
    w_[i] = acc / a[i * (N + 1) + i];
  }
  double norm = 0.0;
  for (double x : w_) norm += x * x;
  if (std::sqrt(norm) > kNormEpsilon) unit_ = normalize_task(w_);
}

std::vector<double> maxqinit_tables(const std::vector<std::vector<double>>& tables) {
  if (tables.empty()) throw ConfigError("maxqinit needs at least one table");
  std::vector<double> out = tables.front();
  for (const auto& t : tables) {
    if (t.size() != out.size()) throw ConfigError("maxqinit tables differ in shape");
    kernels::max_into(out, t);
  }
  return out;
}

LifelongAgent parse_lifelong_agent(const std::string& name) {
  if (name == "gpi-set") return LifelongAgent::kGpiSet;
  if (name == "flat-q") return LifelongAgent::kFlatQ;
  if (name == "maxqinit") return LifelongAgent::kMaxQInit;
  throw ConfigError("unknown lifelong agent '" + name + "' (expected gpi-set, flat-q or maxqinit)");
}

std::string to_string(LifelongAgent agent) {
  switch (agent) {
    case LifelongAgent::kGpiSet: return "gpi-set";
    case LifelongAgent::kFlatQ: return "flat-q";
    case LifelongAgent::kMaxQInit: return "maxqinit";
  }
  return "?";
}

void LifelongParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
  if (!(residual_threshold > 0.0)) throw ConfigError("residual_threshold must be > 0");
  if (!(ridge_lambda > 0.0)) throw ConfigError("ridge_lambda must be > 0");
  DiscountFactor{gamma};
}

LifelongLog lifelong_run(LifelongAgent agent, const PolicySet* set, const TaskSchedule& schedule,
                         const TabularModel& model, const LifelongParams& params) {
  schedule.validate();
  params.validate();
  if (agent == LifelongAgent::kGpiSet) {
    if (set == nullptr || set->empty()) throw ConfigError("the gpi-set agent needs a policy set");
    if (set->num_states() != model.num_states() || set->n_features() != model.n_features()) {
      throw ConfigError("policy set does not match the environment");
    }
  }
  const int n = model.n_features();
  const std::size_t K = schedule.cycle.size();
  std::vector<RewardTable> rewards;
  std::vector<std::vector<double>> best;  // J* per state, per cycle task
  for (const auto& w : schedule.cycle) {
    rewards.push_back(model.linear_rewards(w));
    best.push_back(plan_finite_horizon(model, rewards.back(), model.horizon()));
  }

  const auto SA = static_cast<std::size_t>(model.num_states()) * kNumActions;
  std::vector<double> q(SA, 0.0);
  std::vector<double> init;
  if (agent == LifelongAgent::kMaxQInit) {
    std::vector<std::vector<double>> tables;
    for (std::size_t k = 0; k < K; ++k) tables.push_back(solve_discounted_q(model, rewards[k], params.gamma));
    init = maxqinit_tables(tables);
    q = init;
  }
  WEstimator est(n, params.ridge_lambda);

  LifelongLog log;
  log.agent = to_string(agent);
  Rng rng(derive_seed(params.seed, 0));
  const auto& starts = model.starts();
  const std::int64_t total = schedule.resolved_total();
  const double bound = 10.0 * model.feature_value() / (1.0 - params.gamma);
  std::vector<double> phi(static_cast<std::size_t>(n));
  std::int64_t step = 0;
  int episode = 0;
  while (step < total) {
    const int s0 = starts[uniform_index(rng, starts.size())];
    const int task0 = schedule.task_index_at(step);
    LifelongRow row;
    row.step = step;
    row.episode = episode;
    row.agent = log.agent;
    row.active_task_index = task0;
    int s = s0;
    for (int t = 0; t < model.horizon() && step < total; ++t, ++step) {
      if (agent == LifelongAgent::kMaxQInit && step > 0 && step % schedule.phase_length == 0) q = init;
      const auto& r_tab = rewards[static_cast<std::size_t>(schedule.task_index_at(step))];
      int a;
      if (agent == LifelongAgent::kGpiSet) {
        a = gpi_action(*set, est.unit(), s);
      } else if (uniform01(rng) < params.epsilon) {
        a = static_cast<int>(uniform_index(rng, kNumActions));
      } else {
        a = argmax_first(std::span<const double>(q).subspan(static_cast<std::size_t>(s) * kNumActions, kNumActions));
      }
      int b = a;
      if (model.slip() > 0.0 && uniform01(rng) < model.slip()) b = static_cast<int>(uniform_index(rng, kNumActions));
      const int nx = model.next(s, b);
      const double r = r_tab[static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(b)];
      row.return_raw += r;

      if (agent == LifelongAgent::kGpiSet) {
        const int type = model.feature_type(s, b);
        if (type >= 0) {
          std::fill(phi.begin(), phi.end(), 0.0);
          phi[static_cast<std::size_t>(type)] = model.feature_value();
          if (est.observed(type) && est.residual(phi, r) > params.residual_threshold) {
            est.reset();
            log.resets.push_back(step);
          }
          est.observe(phi, r);
        }
      } else {
        double target = r;
        if (t + 1 < model.horizon()) {
          const double* nq = q.data() + static_cast<std::size_t>(nx) * kNumActions;
          target += params.gamma * *std::max_element(nq, nq + kNumActions);
        }
        double& cell = q[static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(a)];
        cell += params.alpha * (target - cell);
        if (!(std::fabs(cell) <= bound)) throw DivergenceError("lifelong Q estimate diverged");
      }
      s = nx;
    }
    row.return_norm = row.return_raw / std::max(best[static_cast<std::size_t>(task0)][static_cast<std::size_t>(s0)], kNormEpsilon);
    log.rows.push_back(std::move(row));
    ++episode;
  }
  return log;
}

namespace {

std::vector<double> phase_values(const LifelongLog& log, const TaskSchedule& schedule, std::int64_t phase) {
  std::vector<double> v;
  for (const auto& r : log.rows) {
    if (schedule.phase_at(r.step) == phase) v.push_back(r.return_norm);
  }
  return v;
}

double mean_of(std::span<const double> v) {
  if (v.empty()) throw ProtocolError("no episodes in the requested phase");
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

double phase_head_mean(const LifelongLog& log, const TaskSchedule& schedule, std::int64_t phase, int k) {
  const auto v = phase_values(log, schedule, phase);
  return mean_of(std::span<const double>(v).first(std::min(v.size(), static_cast<std::size_t>(k))));
}

double phase_drop(const LifelongLog& log, const TaskSchedule& schedule, std::int64_t phase, int k) {
  if (phase < 1) throw ProtocolError("the first phase has no predecessor");
  const auto prev = phase_values(log, schedule, phase - 1);
  const std::size_t m = std::min(prev.size(), static_cast<std::size_t>(k));
  return mean_of(std::span<const double>(prev).last(m)) - phase_head_mean(log, schedule, phase, k);
}

std::string lifelong_csv(const std::vector<LifelongLog>& logs) {
  std::string out = "step,episode,agent,active_task_index,return_raw,return_normalized\n";
  for (const auto& log : logs) {
    for (const auto& r : log.rows) {
      out += std::to_string(r.step) + ',' + std::to_string(r.episode) + ',' + r.agent + ',' +
             std::to_string(r.active_task_index) + ',' + format_double(r.return_raw) + ',' +
             format_double(r.return_norm) + '\n';
    }
  }
  return out;
}

}  // namespace sipgpi
