// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sipgpi/gpi.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sipgpi/kernels.hpp"
#include "sipgpi/random.hpp"

namespace sipgpi {

namespace {

using json = nlohmann::json;

void require_members(const PolicySet& set) {
  if (set.empty()) throw ProtocolError("GPI over an empty policy set");
}

void check_task(const PolicySet& set, const TaskVector& w) {
  if (w.dim() != static_cast<std::size_t>(set.n_features())) {
    throw ConfigError("task dimension " + std::to_string(w.dim()) + " does not match " +
                      std::to_string(set.n_features()) + " features");
  }
}

int gpi_action_unchecked(const PolicySet& set, const TaskVector& w, int s, std::span<double> best,
                         std::span<double> scratch) {
  const auto n = static_cast<std::size_t>(set.n_features());
  kernels::dot_rows(set[0].sf.state_rows(s), n, w.values(), best);
  for (std::size_t i = 1; i < set.size(); ++i) {
    kernels::dot_rows(set[i].sf.state_rows(s), n, w.values(), scratch);
    kernels::max_into(best, scratch);
  }
  return argmax_first(best);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void PolicySet::add(PolicyMember member) {
  if (!members_.empty() && !members_.front().sf.same_shape(member.sf)) {
    throw ConfigError("policy '" + member.label + "' does not share the set's (n, |S|, |A|, gamma)");
  }
  if (member.policy.action_of.size() != static_cast<std::size_t>(member.sf.num_states())) {
    throw ConfigError("policy '" + member.label + "' covers a different state count than its SF table");
  }
  members_.push_back(std::move(member));
}

int PolicySet::n_features() const {
  require_members(*this);
  return members_.front().sf.n_features();
}

int PolicySet::num_states() const {
  require_members(*this);
  return members_.front().sf.num_states();
}

double PolicySet::gamma() const {
  require_members(*this);
  return members_.front().sf.gamma();
}

void PolicySet::save(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  json manifest;
  manifest["kind"] = "policy_set";
  manifest["label"] = label_;
  manifest["version"] = kVersion;
  manifest["members"] = json::array();
  for (std::size_t k = 0; k < members_.size(); ++k) {
    const PolicyMember& m = members_[k];
    const std::string stem = "member_" + std::to_string(k);
    m.sf.save(dir / (stem + ".sf"));
    std::string pol = "policy " + std::to_string(m.policy.action_of.size()) + '\n';
    for (std::uint8_t a : m.policy.action_of) pol += static_cast<char>('0' + a);
    pol += '\n';
    write_file(dir / (stem + ".policy"), pol);
    manifest["members"].push_back({{"label", m.label},
                                   {"task", std::vector<double>(m.policy.training_task.values().begin(),
                                                                m.policy.training_task.values().end())},
                                   {"task_raw", m.policy.training_task.is_raw()},
                                   {"sf", stem + ".sf"},
                                   {"policy", stem + ".policy"}});
  }
  write_file(dir / "manifest.json", manifest.dump(2) + '\n');
}

PolicySet PolicySet::load(const std::filesystem::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw ConfigError((dir / "manifest.json").string() + ": " + e.what());
  }
  PolicySet set(manifest.value("label", std::string{}));
  try {
    for (const auto& m : manifest.at("members")) {
      PolicyMember member;
      member.label = m.at("label").get<std::string>();
      const auto task = m.at("task").get<std::vector<double>>();
      member.policy.training_task = m.value("task_raw", false) ? TaskVector::raw(task) : TaskVector::unit(task);
      member.sf = SFTable::load(dir / m.at("sf").get<std::string>());
      std::istringstream pol(read_file(dir / m.at("policy").get<std::string>()));
      std::string magic, digits;
      std::size_t count = 0;
      if (!(pol >> magic >> count >> digits) || magic != "policy" || digits.size() != count) {
        throw ConfigError("malformed policy file for member '" + member.label + "'");
      }
      for (char c : digits) {
        if (c < '0' || c >= '0' + kNumActions) throw ConfigError("bad action in policy file");
        member.policy.action_of.push_back(static_cast<std::uint8_t>(c - '0'));
      }
      set.add(std::move(member));
    }
  } catch (const json::exception& e) {
    throw ConfigError((dir / "manifest.json").string() + ": " + e.what());
  }
  return set;
}

std::vector<double> gpe(const PolicySet& set, const TaskVector& w, int s, int a) {
  require_members(set);
  check_task(set, w);
  std::vector<double> q;
  q.reserve(set.size());
  for (const PolicyMember& m : set.members()) q.push_back(dot(m.sf.row(s, a), w.values()));
  return q;
}

int gpi_action(const PolicySet& set, const TaskVector& w, int s) {
  require_members(set);
  check_task(set, w);
  std::array<double, kNumActions> best{}, scratch{};
  return gpi_action_unchecked(set, w, s, best, scratch);
}

ActionTable gpi_policy(const PolicySet& set, const TaskVector& w) {
  require_members(set);
  check_task(set, w);
  std::array<double, kNumActions> best{}, scratch{};
  ActionTable out(static_cast<std::size_t>(set.num_states()));
  for (int s = 0; s < set.num_states(); ++s) {
    out[static_cast<std::size_t>(s)] = static_cast<std::uint8_t>(gpi_action_unchecked(set, w, s, best, scratch));
  }
  return out;
}

std::vector<double> rollout_returns(const TabularModel& model, std::span<const std::uint8_t> policy,
                                    std::span<const double> rewards, int episodes, Rng& rng) {
  if (policy.size() != static_cast<std::size_t>(model.num_states())) {
    throw ConfigError("policy does not match the environment's state space");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max(episodes, 0)));
  const auto& starts = model.starts();
  for (int ep = 0; ep < episodes; ++ep) {
    int s = starts[uniform_index(rng, starts.size())];
    double ret = 0.0;
    for (int t = 0; t < model.horizon(); ++t) {
      int b = policy[static_cast<std::size_t>(s)];
      if (model.slip() > 0.0 && uniform01(rng) < model.slip()) b = static_cast<int>(uniform_index(rng, kNumActions));
      ret += rewards[static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(b)];
      s = model.next(s, b);
    }
    out.push_back(ret);
  }
  return out;
}

std::vector<double> gpi_rollout(const PolicySet& set, const TaskVector& w, const TabularModel& model, int episodes,
                                Rng& rng) {
  if (set.num_states() != model.num_states() || set.n_features() != model.n_features()) {
    throw ConfigError("policy set does not match the environment");
  }
  const ActionTable pi = gpi_policy(set, w);
  return rollout_returns(model, pi, model.linear_rewards(w), episodes, rng);
}

}  // namespace sipgpi
