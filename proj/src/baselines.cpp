// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sipgpi/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "sipgpi/harness.hpp"
#include "sipgpi/parallel.hpp"
#include "sipgpi/sip.hpp"
#include "sipgpi/random.hpp"

namespace sipgpi {

namespace {

using json = nlohmann::ordered_json;

double worst_case(const std::vector<std::vector<double>>& psibars, std::span<const double> w) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : psibars) best = std::max(best, dot(p, w));
  return best;
}

void check_psibars(const std::vector<std::vector<double>>& psibars) {
  if (psibars.empty()) throw ConfigError("need at least one member SF");
  for (const auto& p : psibars) {
    if (p.size() != psibars.front().size() || p.empty()) throw ConfigError("member SFs differ in dimension");
  }
}

std::vector<double> unit_or_empty(std::vector<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (!(norm > kNormEpsilon)) return {};
  for (double& x : v) x /= norm;
  return v;
}

std::vector<double> start_psibar(const TabularModel& model, const TrainedPolicy& tp) {
  return expected_sf_at_start(model, tp.sf, tp.policy.action_of);
}

std::string member_label(const std::string& method, std::size_t k) { return method + "_" + std::to_string(k + 1); }

int sample_from(std::span<const double> probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    acc += probs[a];
    if (u < acc) return static_cast<int>(a);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

TaskVector random_unit_task(int n, std::uint64_t seed) {
  if (n < 1) throw ConfigError("task dimension must be >= 1");
  Rng rng(derive_seed(seed, 0x7a5c));
  if (n == 2) return task_at_angle(360.0 * uniform01(rng));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = gauss(rng);
    auto u = unit_or_empty(v);
    if (!u.empty()) return TaskVector::unit(u);
  }
}

TaskVector smp_next_task(const std::vector<std::vector<double>>& psibars, std::uint64_t seed) {
  check_psibars(psibars);
  const std::size_t n = psibars.front().size();

  if (n == 2) {
    // Exact candidates first: each -psibar_i, and the unit vectors where two
    // pieces of the max cross. The grid covers anything they miss.
    std::vector<std::vector<double>> candidates;
    for (const auto& p : psibars) {
      auto u = unit_or_empty({-p[0], -p[1]});
      if (!u.empty()) candidates.push_back(u);
    }
    for (std::size_t i = 0; i < psibars.size(); ++i) {
      for (std::size_t j = i + 1; j < psibars.size(); ++j) {
        const double dx = psibars[i][0] - psibars[j][0];
        const double dy = psibars[i][1] - psibars[j][1];
        auto u = unit_or_empty({-dy, dx});
        if (u.empty()) continue;
        candidates.push_back(u);
        candidates.push_back({-u[0], -u[1]});
      }
    }
    for (int k = 0; k < 720; ++k) {
      const TaskVector w = task_at_angle(0.5 * k);
      candidates.emplace_back(w.values().begin(), w.values().end());
    }
    std::size_t best = 0;
    double best_val = worst_case(psibars, candidates[0]);
    for (std::size_t c = 1; c < candidates.size(); ++c) {
      const double v = worst_case(psibars, candidates[c]);
      if (v < best_val - 1e-12) {
        best_val = v;
        best = c;
      }
    }
    return TaskVector::unit(candidates[best]);
  }

  Rng rng(derive_seed(seed, 0x5a9));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> best_w;
  double best_val = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < 32; ++restart) {
    std::vector<double> w;
    while (w.empty()) {
      std::vector<double> v(n);
      for (double& x : v) x = gauss(rng);
      w = unit_or_empty(v);
    }
    for (int it = 0; it < 2000; ++it) {
      const double val = worst_case(psibars, w);
      if (val < best_val) {
        best_val = val;
        best_w = w;
      }
      // Subgradient of the max: the active member's psibar.
      std::size_t active = 0;
      for (std::size_t i = 1; i < psibars.size(); ++i) {
        if (dot(psibars[i], w) > dot(psibars[active], w)) active = i;
      }
      const double step = 0.5 / std::sqrt(it + 1.0);
      std::vector<double> next(n);
      for (std::size_t i = 0; i < n; ++i) next[i] = w[i] - step * psibars[active][i];
      auto u = unit_or_empty(next);
      if (u.empty()) break;
      w = std::move(u);
    }
  }
  return TaskVector::unit(best_w);
}

std::optional<TaskVector> dsp_next_task(const std::vector<std::vector<double>>& psibars) {
  check_psibars(psibars);
  std::vector<double> raw(psibars.front().size(), 0.0);
  for (const auto& p : psibars) {
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] -= p[i];
  }
  for (double& x : raw) x /= static_cast<double>(psibars.size());
  auto u = unit_or_empty(raw);
  if (u.empty()) return std::nullopt;
  return TaskVector::unit(u);
}

std::string BaselineResult::to_json() const {
  json j;
  j["kind"] = "baseline";
  j["method"] = method;
  j["version"] = kVersion;
  j["tasks"] = json::array();
  for (const auto& w : tasks) {
    json row = json::array();
    for (double x : w.values()) row.push_back(x);
    j["tasks"].push_back(row);
  }
  j["degenerate_steps"] = degenerate_steps;
  return j.dump(2) + '\n';
}

void BaselineResult::save(const std::filesystem::path& dir) const {
  set.save(dir);
  write_text_file(dir / "baseline.json", to_json());
}

BaselineResult smp_build(const TabularModel& model, int size, const TaskVector& init_task,
                         const TrainerParams& params) {
  if (size < 1) throw ConfigError("set size must be >= 1");
  BaselineResult out{"smp", PolicySet("smp"), {}, {}};
  std::vector<std::vector<double>> psibars;
  TaskVector w = init_task;
  for (int k = 0; k < size; ++k) {
    if (k > 0) w = smp_next_task(psibars, derive_seed(params.seed, 0x100 + static_cast<std::uint64_t>(k)));
    TrainerParams p = params;
    p.seed = derive_seed(params.seed, static_cast<std::uint64_t>(k));
    TrainedPolicy tp = train_sf_policy(model, w, p);
    psibars.push_back(start_psibar(model, tp));
    out.tasks.push_back(w);
    out.set.add({member_label("smp", static_cast<std::size_t>(k)), std::move(tp.policy), std::move(tp.sf)});
  }
  return out;
}

BaselineResult dsp_build(const TabularModel& model, int size, const TaskVector& init_task,
                         const TrainerParams& params) {
  if (size < 1) throw ConfigError("set size must be >= 1");
  BaselineResult out{"dsp", PolicySet("dsp"), {}, {}};
  std::vector<std::vector<double>> psibars;
  TaskVector w = init_task;
  for (int k = 0; k < size; ++k) {
    if (k > 0) {
      if (auto next = dsp_next_task(psibars)) {
        w = *next;
      } else {
        out.degenerate_steps.push_back(k);
      }
    }
    TrainerParams p = params;
    p.seed = derive_seed(params.seed, static_cast<std::uint64_t>(k));
    TrainedPolicy tp = train_sf_policy(model, w, p);
    psibars.push_back(start_psibar(model, tp));
    out.tasks.push_back(w);
    out.set.add({member_label("dsp", static_cast<std::size_t>(k)), std::move(tp.policy), std::move(tp.sf)});
  }
  return out;
}

void DiaynParams::validate() const {
  if (skills < 1) throw ConfigError("skills must be >= 1");
  if (episodes < 0) throw ConfigError("episodes must be >= 0");
  if (!(policy_lr > 0.0) || !(discriminator_lr > 0.0 && discriminator_lr <= 1.0)) {
    throw ConfigError("learning rates must be positive (discriminator rate at most 1)");
  }
  if (!(entropy_coef >= 0.0) || !(value_loss_coef > 0.0 && value_loss_coef <= 1.0) || !(grad_clip > 0.0)) {
    throw ConfigError("bad DIAYN coefficients");
  }
  if (!(sf_alpha > 0.0 && sf_alpha <= 1.0)) throw ConfigError("sf_alpha must lie in (0, 1]");
  DiscountFactor{gamma};
}

int event_category(const std::vector<int>& counts) {
  int c = 0;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    if (counts[t] > 0) c |= 1 << t;
  }
  return c;
}

double discriminator_prob(const std::vector<double>& table, int skills, int category, int z) {
  const std::size_t base = static_cast<std::size_t>(category) * static_cast<std::size_t>(skills);
  double total = 0.0;
  for (int k = 0; k < skills; ++k) total += table[base + static_cast<std::size_t>(k)];
  return (table[base + static_cast<std::size_t>(z)] + 1.0) / (total + skills);
}

DiaynResult diayn_build(const TabularModel& model, const DiaynParams& params, const TrainerParams& trainer) {
  params.validate();
  trainer.validate();
  const int K = params.skills;
  const int S = model.num_states();
  const int n = model.n_features();
  const std::size_t SA = static_cast<std::size_t>(S) * kNumActions;
  const int categories = 1 << n;

  DiaynResult out;
  out.degenerate = K == 1;
  std::vector<std::vector<double>> logits(static_cast<std::size_t>(K), std::vector<double>(SA, 0.0));
  std::vector<std::vector<double>> baseline(static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(S), 0.0));
  std::vector<double> disc(static_cast<std::size_t>(categories * K), 0.0);
  out.online_sf.assign(static_cast<std::size_t>(K), SFTable(n, S, kNumActions, params.gamma));

  auto probs_at = [&](int z, int s) {
    std::array<double, kNumActions> p{};
    const double* l = logits[static_cast<std::size_t>(z)].data() + static_cast<std::size_t>(s) * kNumActions;
    const double m = *std::max_element(l, l + kNumActions);
    double total = 0.0;
    for (int a = 0; a < kNumActions; ++a) total += p[static_cast<std::size_t>(a)] = std::exp(l[a] - m);
    for (double& x : p) x /= total;
    return p;
  };

  Rng rng(derive_seed(params.seed, 0));
  const auto& starts = model.starts();
  const double log_prior = std::log(1.0 / K);
  std::vector<int> states, actions;
  for (int ep = 0; ep < params.episodes; ++ep) {
    const int z = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(K)));
    int s = starts[uniform_index(rng, starts.size())];
    std::vector<int> counts(static_cast<std::size_t>(n), 0);
    states.clear();
    actions.clear();
    auto& sf = out.online_sf[static_cast<std::size_t>(z)];
    for (int t = 0; t < model.horizon(); ++t) {
      const auto p = probs_at(z, s);
      const int a = sample_from(p, rng);
      int b = a;
      if (model.slip() > 0.0 && uniform01(rng) < model.slip()) b = static_cast<int>(uniform_index(rng, kNumActions));
      const int nx = model.next(s, b);
      const int type = model.feature_type(s, b);
      if (type >= 0) ++counts[static_cast<std::size_t>(type)];

      // Expected-SARSA SF update under the stochastic skill.
      const bool last = t + 1 == model.horizon();
      const auto pn = probs_at(z, nx);
      auto row = sf.row(s, a);
      for (int i = 0; i < n; ++i) {
        double boot = 0.0;
        if (!last) {
          for (int c = 0; c < kNumActions; ++c) boot += pn[static_cast<std::size_t>(c)] * sf.row(nx, c)[static_cast<std::size_t>(i)];
        }
        const double phi = (i == type) ? model.feature_value() : 0.0;
        row[static_cast<std::size_t>(i)] += params.sf_alpha * (phi + params.gamma * boot - row[static_cast<std::size_t>(i)]);
      }
      states.push_back(s);
      actions.push_back(a);
      s = nx;
    }

    const int cat = event_category(counts);
    const double reward = std::log(discriminator_prob(disc, K, cat, z)) - log_prior;
    // Count-based discriminator with forgetting rate discriminator_lr.
    for (double& x : disc) x *= 1.0 - params.discriminator_lr;
    disc[static_cast<std::size_t>(cat * K + z)] += 1.0;

    auto& lz = logits[static_cast<std::size_t>(z)];
    auto& bz = baseline[static_cast<std::size_t>(z)];
    const int T = static_cast<int>(states.size());
    for (int t = 0; t < T; ++t) {
      const int st = states[static_cast<std::size_t>(t)];
      const double G = std::pow(params.gamma, T - 1 - t) * reward;
      const double adv = G - bz[static_cast<std::size_t>(st)];
      bz[static_cast<std::size_t>(st)] += params.value_loss_coef * adv;
      const auto p = probs_at(z, st);
      double entropy = 0.0;
      for (double q : p) entropy -= q > 0.0 ? q * std::log(q) : 0.0;
      std::array<double, kNumActions> grad{};
      double norm = 0.0;
      for (int a = 0; a < kNumActions; ++a) {
        const double pa = p[static_cast<std::size_t>(a)];
        const double pg = adv * ((a == actions[static_cast<std::size_t>(t)] ? 1.0 : 0.0) - pa);
        // dH/dlogit_a = -p_a (log p_a + H)
        const double eg = -pa * ((pa > 0.0 ? std::log(pa) : 0.0) + entropy);
        grad[static_cast<std::size_t>(a)] = pg + params.entropy_coef * eg;
        norm += grad[static_cast<std::size_t>(a)] * grad[static_cast<std::size_t>(a)];
      }
      norm = std::sqrt(norm);
      const double scale = norm > params.grad_clip ? params.grad_clip / norm : 1.0;
      for (int a = 0; a < kNumActions; ++a) {
        lz[static_cast<std::size_t>(st) * kNumActions + static_cast<std::size_t>(a)] +=
            params.policy_lr * scale * grad[static_cast<std::size_t>(a)];
      }
    }
  }

  out.build.method = "diayn";
  out.build.set = PolicySet("diayn");
  const TaskVector none = TaskVector::raw(std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int z = 0; z < K; ++z) {
    std::vector<double> probs(SA);
    ActionTable greedy(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s) {
      const auto p = probs_at(z, s);
      std::copy(p.begin(), p.end(), probs.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(s) * kNumActions));
      greedy[static_cast<std::size_t>(s)] = static_cast<std::uint8_t>(argmax_first(
          std::span<const double>(logits[static_cast<std::size_t>(z)]).subspan(static_cast<std::size_t>(s) * kNumActions, kNumActions)));
    }
    out.action_probs.push_back(std::move(probs));
    TrainerParams p = trainer;
    p.seed = derive_seed(params.seed, 1 + static_cast<std::uint64_t>(z));
    SFTable sf = evaluate_sf_td(model, greedy, p);
    out.build.tasks.push_back(none);
    out.build.set.add({member_label("diayn", static_cast<std::size_t>(z)), GreedyPolicy{none, std::move(greedy)}, std::move(sf)});
  }
  return out;
}

PolicySet reference_policies(const TabularModel& model, const TrainerParams& params, int jobs) {
  std::vector<TaskVector> tasks;
  std::vector<std::string> labels;
  for (int i = 1; i <= 9; ++i) {
    tasks.push_back(named_task(i));
    labels.push_back("pi_" + std::to_string(i));
  }
  PolicySet set = train_policy_set(model, tasks, labels, params, jobs);
  set.set_label("references");
  return set;
}

double rep_tolerance(const TabularModel& model, const std::vector<TaskVector>& tasks) {
  double scale = 0.0;
  for (const auto& w : tasks) scale = std::max(scale, oracle_return(model, w));
  return 0.1 * scale;
}

RepLabel rep_classify(std::span<const std::uint8_t> candidate, const PolicySet& references,
                      const TabularModel& model, const std::vector<TaskVector>& tasks, double tolerance) {
  if (references.empty()) throw ConfigError("no reference policies");
  if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be >= 0");
  std::vector<double> mine;
  std::vector<RewardTable> rewards;
  for (const auto& w : tasks) {
    rewards.push_back(model.linear_rewards(w));
    mine.push_back(exact_return(model, candidate, rewards.back()));
  }
  RepLabel out;
  out.tolerance = tolerance;
  out.distance = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < references.size(); ++r) {
    double worst = 0.0;
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      worst = std::max(worst, std::fabs(mine[t] - exact_return(model, references[r].policy.action_of, rewards[t])));
    }
    if (worst < out.distance) {
      out.distance = worst;
      out.reference = static_cast<int>(r);
      out.label = references[r].label;
    }
  }
  out.equivalent = out.distance <= tolerance;
  return out;
}

}  // namespace sipgpi
