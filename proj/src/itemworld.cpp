// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sipgpi/itemworld.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

#include "sipgpi/random.hpp"

namespace sipgpi {

namespace {

constexpr int kDr[kNumActions] = {-1, 1, 0, 0};
constexpr int kDc[kNumActions] = {0, 0, -1, 1};

bool adjacent_or_same(Cell a, Cell b) { return std::abs(a.row - b.row) + std::abs(a.col - b.col) <= 1; }

int cell_index(const GridConfig& cfg, Cell c) { return c.row * cfg.width + c.col; }

Cell cell_at(const GridConfig& cfg, int index) { return {index / cfg.width, index % cfg.width}; }

void check_action(int action) {
  if (action < 0 || action >= kNumActions) {
    throw ConfigError("action out of range: " + std::to_string(action));
  }
}

}  // namespace

const char* action_name(int action) {
  static constexpr const char* kNames[kNumActions] = {"up", "down", "left", "right"};
  check_action(action);
  return kNames[action];
}

int parse_action(const std::string& name) {
  if (name == "up" || name == "u") return 0;
  if (name == "down" || name == "d") return 1;
  if (name == "left" || name == "l") return 2;
  if (name == "right" || name == "r") return 3;
  throw ConfigError("unknown action '" + name + "'");
}

GridConfig GridConfig::desk() {
  GridConfig c;
  c.height = 5;
  c.width = 6;
  c.n_item_types = 2;
  c.items_per_type = 2;
  c.placement = {{{0, 2}, 0}, {{1, 3}, 0}, {{0, 3}, 1}, {{1, 2}, 1}};
  c.horizon = 50;
  return c;
}

GridConfig GridConfig::large() {
  GridConfig c;
  c.height = 10;
  c.width = 10;
  c.n_item_types = 2;
  c.items_per_type = 5;
  c.random_placement = true;
  c.respawn = true;
  c.horizon = 50;
  return c;
}

void GridConfig::validate() const {
  validate_layout();
  for (const Cell& s : start_cells) {
    for (const ItemPlacement& p : placement) {
      if (adjacent_or_same(s, p.cell)) {
        throw ConfigError("start cell (" + std::to_string(s.row) + "," + std::to_string(s.col) +
                          ") holds or neighbours an item");
      }
    }
  }
}

void GridConfig::validate_layout() const {
  if (height < 1 || width < 1) throw ConfigError("grid dimensions must be positive");
  if (n_item_types < 1) throw ConfigError("need at least one item type");
  if (items_per_type < 1) throw ConfigError("need at least one item per type");
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (!(slip_prob >= 0.0 && slip_prob < 1.0)) throw ConfigError("slip_prob must lie in [0, 1)");
  if (!(feature_value > 0.0) || !std::isfinite(feature_value)) {
    throw ConfigError("feature value C must be positive");
  }
  if (num_items() > 62) throw ConfigError("at most 62 items are supported");
  if (random_placement) {
    if (height * width < num_items() + 5) {
      throw ConfigError("placement infeasible: grid too small for " +
                        std::to_string(num_items()) + " items");
    }
    return;
  }
  if (static_cast<int>(placement.size()) != num_items()) {
    throw ConfigError("fixed placement lists " + std::to_string(placement.size()) +
                      " items, expected " + std::to_string(num_items()));
  }
  std::vector<int> per_type(static_cast<std::size_t>(n_item_types), 0);
  std::set<Cell> seen;
  for (const ItemPlacement& p : placement) {
    if (!in_bounds(p.cell)) throw ConfigError("item outside the grid");
    if (p.type < 0 || p.type >= n_item_types) throw ConfigError("item type out of range");
    if (!seen.insert(p.cell).second) throw ConfigError("two items share a cell");
    ++per_type[static_cast<std::size_t>(p.type)];
  }
  for (int t = 0; t < n_item_types; ++t) {
    if (per_type[static_cast<std::size_t>(t)] != items_per_type) {
      throw ConfigError("type " + std::to_string(t) + " has " +
                        std::to_string(per_type[static_cast<std::size_t>(t)]) + " items, expected " +
                        std::to_string(items_per_type));
    }
  }
  for (const Cell& s : start_cells) {
    if (!in_bounds(s)) throw ConfigError("start cell outside the grid");
  }
  if (permitted_starts().empty()) throw ConfigError("placement infeasible: no permitted start cell");
}

std::vector<Cell> GridConfig::permitted_starts() const {
  if (!start_cells.empty()) return start_cells;
  std::vector<Cell> out;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const Cell cell{r, c};
      bool ok = true;
      for (const ItemPlacement& p : placement) ok = ok && !adjacent_or_same(cell, p.cell);
      if (ok) out.push_back(cell);
    }
  }
  return out;
}

std::string GridConfig::canonical() const {
  std::ostringstream os;
  os.precision(17);
  os << "height=" << height << "\nwidth=" << width << "\nn_item_types=" << n_item_types
     << "\nitems_per_type=" << items_per_type << "\nrandom_placement=" << random_placement
     << "\nplacement=";
  for (std::size_t i = 0; i < placement.size(); ++i) {
    if (i) os << ';';
    os << placement[i].cell.row << ',' << placement[i].cell.col << ',' << placement[i].type;
  }
  os << "\nstart_cells=";
  for (std::size_t i = 0; i < start_cells.size(); ++i) {
    if (i) os << ';';
    os << start_cells[i].row << ',' << start_cells[i].col;
  }
  os << "\nslip_prob=" << slip_prob << "\nhorizon=" << horizon << "\nrespawn=" << respawn
     << "\nseed=" << seed << "\nfeature_value=" << feature_value << '\n';
  return os.str();
}

std::uint64_t GridConfig::hash() const {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::vector<int> WorldState::counts(int n_types) const {
  std::vector<int> out(static_cast<std::size_t>(n_types), 0);
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (item_present(k)) ++out[static_cast<std::size_t>(items[k].type)];
  }
  return out;
}

Cell move(const GridConfig& config, Cell from, int action) {
  check_action(action);
  const Cell to{from.row + kDr[action], from.col + kDc[action]};
  return config.in_bounds(to) ? to : from;
}

WorldState reset(const GridConfig& config, Rng& rng) {
  config.validate();
  WorldState s;
  if (!config.random_placement) {
    const std::vector<Cell> starts = config.permitted_starts();
    s.agent = starts[uniform_index(rng, starts.size())];
    s.items = config.placement;
  } else {
    const int cells = config.height * config.width;
    s.agent = cell_at(config, static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(cells))));
    std::vector<Cell> free;
    for (int i = 0; i < cells; ++i) {
      const Cell c = cell_at(config, i);
      if (!adjacent_or_same(c, s.agent)) free.push_back(c);
    }
    if (static_cast<int>(free.size()) < config.num_items()) {
      throw ConfigError("placement infeasible: grid too small");
    }
    // Partial Fisher-Yates.
    for (int k = 0; k < config.num_items(); ++k) {
      const auto j = static_cast<std::size_t>(k) +
                     uniform_index(rng, free.size() - static_cast<std::size_t>(k));
      std::swap(free[static_cast<std::size_t>(k)], free[j]);
      s.items.push_back({free[static_cast<std::size_t>(k)], k / config.items_per_type});
    }
  }
  s.start = s.agent;
  s.present = config.num_items() >= 64 ? ~0ull : ((1ull << config.num_items()) - 1);
  s.steps_elapsed = 0;
  return s;
}

StepOutcome step(const GridConfig& config, const WorldState& state, int action, Rng& rng) {
  check_action(action);
  if (state.steps_elapsed >= config.horizon) throw ProtocolError("step() called on a terminal state");
  int executed = action;
  if (config.slip_prob > 0.0 && uniform01(rng) < config.slip_prob) {
    executed = static_cast<int>(uniform_index(rng, kNumActions));
  }
  StepOutcome out;
  out.executed_action = executed;
  out.next = state;
  out.next.agent = move(config, state.agent, executed);
  out.next.steps_elapsed = state.steps_elapsed + 1;
  out.phi = FeatureVector::zero(static_cast<std::size_t>(config.n_item_types));
  for (std::size_t k = 0; k < state.items.size(); ++k) {
    if (!state.item_present(k) || state.items[k].cell != out.next.agent) continue;
    out.phi.phi[static_cast<std::size_t>(state.items[k].type)] = config.feature_value;
    if (config.respawn) {
      std::vector<Cell> free;
      for (int i = 0; i < config.height * config.width; ++i) {
        const Cell c = cell_at(config, i);
        if (c == out.next.agent || adjacent_or_same(c, state.start)) continue;
        bool taken = false;
        for (std::size_t j = 0; j < state.items.size(); ++j) {
          taken = taken || (j != k && out.next.item_present(j) && out.next.items[j].cell == c);
        }
        if (!taken) free.push_back(c);
      }
      if (free.empty()) {
        out.next.present &= ~(1ull << k);
      } else {
        out.next.items[k].cell = free[uniform_index(rng, free.size())];
      }
    } else {
      out.next.present &= ~(1ull << k);
    }
    break;
  }
  out.terminal = out.next.steps_elapsed >= config.horizon;
  return out;
}

// ---------------------------------------------------------------------------
// TabularModel

TabularModel TabularModel::build(const GridConfig& config) {
  config.validate();
  return build_unchecked(config);
}

TabularModel TabularModel::build_unchecked(const GridConfig& config) {
  config.validate_layout();
  if (!config.is_tabular()) {
    throw ConfigError("tabular model needs fixed placement without respawn");
  }
  TabularModel m;
  m.config_ = config;
  m.num_items_ = config.num_items();
  const std::size_t masks = std::size_t{1} << m.num_items_;
  const std::size_t cells = static_cast<std::size_t>(config.height * config.width);
  if (m.num_items_ > 30 || cells * masks > config.enumeration_cap) {
    throw CapacityError("tabular state space of " + std::to_string(cells) + " cells x 2^" +
                        std::to_string(m.num_items_) + " exceeds the enumeration cap " +
                        std::to_string(config.enumeration_cap));
  }
  m.num_states_ = static_cast<int>(cells * masks);
  const auto S = static_cast<std::size_t>(m.num_states_);
  m.next_.assign(S * kNumActions, 0);
  m.feature_.assign(S * kNumActions, -1);
  m.valid_.assign(S, 0);
  m.reachable_.assign(S, 0);

  std::vector<int> item_at(cells, -1);
  for (int k = 0; k < m.num_items_; ++k) {
    item_at[static_cast<std::size_t>(cell_index(config, config.placement[static_cast<std::size_t>(k)].cell))] = k;
  }
  for (std::size_t ci = 0; ci < cells; ++ci) {
    const Cell cell = cell_at(config, static_cast<int>(ci));
    for (std::size_t mask = 0; mask < masks; ++mask) {
      const std::size_t s = ci * masks + mask;
      const int here = item_at[ci];
      m.valid_[s] = !(here >= 0 && ((mask >> here) & 1u));
      for (int a = 0; a < kNumActions; ++a) {
        const Cell to = move(config, cell, a);
        const auto ti = static_cast<std::size_t>(cell_index(config, to));
        std::size_t nmask = mask;
        const int k = item_at[ti];
        if (k >= 0 && ((mask >> k) & 1u)) {
          nmask &= ~(std::size_t{1} << k);
          m.feature_[s * kNumActions + static_cast<std::size_t>(a)] =
              static_cast<std::int8_t>(config.placement[static_cast<std::size_t>(k)].type);
        }
        m.next_[s * kNumActions + static_cast<std::size_t>(a)] = static_cast<std::int32_t>(ti * masks + nmask);
      }
    }
  }
  for (const Cell& c : config.permitted_starts()) {
    m.starts_.push_back(static_cast<int>(static_cast<std::size_t>(cell_index(config, c)) * masks + (masks - 1)));
  }
  std::deque<int> queue(m.starts_.begin(), m.starts_.end());
  for (int s : m.starts_) m.reachable_[static_cast<std::size_t>(s)] = 1;
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (int a = 0; a < kNumActions; ++a) {
      const int n = m.next(s, a);
      if (!m.reachable_[static_cast<std::size_t>(n)]) {
        m.reachable_[static_cast<std::size_t>(n)] = 1;
        queue.push_back(n);
      }
    }
  }
  return m;
}

std::array<double, kNumActions> TabularModel::outcome_probs(int intended) const {
  const double p = config_.slip_prob;
  std::array<double, kNumActions> out{};
  for (int b = 0; b < kNumActions; ++b) out[static_cast<std::size_t>(b)] = p / kNumActions;
  out[static_cast<std::size_t>(intended)] += 1.0 - p;
  return out;
}

int TabularModel::index(const WorldState& state) const {
  const std::size_t masks = std::size_t{1} << num_items_;
  if (!config_.in_bounds(state.agent)) throw ConfigError("agent outside the grid");
  if (state.items != config_.placement) throw ConfigError("state does not use the fixed placement");
  return static_cast<int>(static_cast<std::size_t>(cell_index(config_, state.agent)) * masks +
                          (state.present & (masks - 1)));
}

WorldState TabularModel::decode(int s) const {
  WorldState w;
  w.agent = agent_cell(s);
  w.start = w.agent;
  w.items = config_.placement;
  w.present = presence(s);
  return w;
}

Cell TabularModel::agent_cell(int s) const { return cell_at(config_, s >> num_items_); }

std::uint64_t TabularModel::presence(int s) const {
  return static_cast<std::uint64_t>(s) & ((std::uint64_t{1} << num_items_) - 1);
}

std::vector<double> TabularModel::linear_rewards(const TaskVector& w) const {
  if (w.dim() != static_cast<std::size_t>(n_features())) {
    throw ConfigError("task dimension " + std::to_string(w.dim()) + " does not match " +
                      std::to_string(n_features()) + " features");
  }
  std::vector<double> r(next_.size(), 0.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const int t = feature_[i];
    if (t >= 0) r[i] = feature_value() * w[static_cast<std::size_t>(t)];
  }
  return r;
}

// ---------------------------------------------------------------------------
// SIF verification

SifReport verify_sif(const GridConfig& config) {
  if (config.slip_prob != 0.0) throw ConfigError("verify_sif needs deterministic dynamics");
  const TabularModel model = TabularModel::build_unchecked(config);
  SifReport rep;
  rep.condition_i = true;
  for (int s0 : model.starts()) {
    for (int a = 0; a < kNumActions; ++a) {
      if (model.feature_type(s0, a) >= 0) {
        rep.condition_i = false;
        const Cell c = model.agent_cell(s0);
        rep.violations.push_back("condition (i): feature " + std::to_string(model.feature_type(s0, a)) +
                                 " fires on the first transition from (" + std::to_string(c.row) + "," +
                                 std::to_string(c.col) + ") with action " + action_name(a));
      }
    }
  }

  rep.condition_ii = true;
  const auto S = static_cast<std::size_t>(model.num_states());
  for (int type = 0; type < config.n_item_types; ++type) {
    std::uint64_t own = 0;
    for (int k = 0; k < model.num_items(); ++k) {
      if (config.placement[static_cast<std::size_t>(k)].type == type) own |= 1ull << k;
    }
    for (int s0 : model.starts()) {
      std::vector<int> parent(S, -2);
      std::vector<std::int8_t> via(S, -1);
      std::vector<int> depth(S, 0);
      std::deque<int> queue{s0};
      parent[static_cast<std::size_t>(s0)] = -1;
      int goal = -1;
      while (!queue.empty()) {
        const int s = queue.front();
        queue.pop_front();
        if ((model.presence(s) & own) == 0) {
          goal = s;
          break;
        }
        if (depth[static_cast<std::size_t>(s)] >= config.horizon) continue;
        for (int a = 0; a < kNumActions; ++a) {
          const int t = model.feature_type(s, a);
          if (t >= 0 && t != type) continue;
          const int n = model.next(s, a);
          if (parent[static_cast<std::size_t>(n)] != -2) continue;
          parent[static_cast<std::size_t>(n)] = s;
          via[static_cast<std::size_t>(n)] = static_cast<std::int8_t>(a);
          depth[static_cast<std::size_t>(n)] = depth[static_cast<std::size_t>(s)] + 1;
          queue.push_back(n);
        }
      }
      FeatureWitness wit;
      wit.type = type;
      wit.start = model.agent_cell(s0);
      wit.found = goal >= 0;
      if (wit.found) {
        for (int s = goal; parent[static_cast<std::size_t>(s)] >= 0; s = parent[static_cast<std::size_t>(s)]) {
          wit.actions.push_back(via[static_cast<std::size_t>(s)]);
        }
        std::reverse(wit.actions.begin(), wit.actions.end());
      } else {
        rep.condition_ii = false;
        rep.violations.push_back("condition (ii): no trajectory from (" + std::to_string(wit.start.row) +
                                 "," + std::to_string(wit.start.col) + ") collects every type-" +
                                 std::to_string(type) + " item while avoiding the others");
      }
      rep.witnesses.push_back(std::move(wit));
    }
  }
  rep.pass = rep.condition_i && rep.condition_ii;
  return rep;
}

// ---------------------------------------------------------------------------
// Egocentric encoding

Observation encode_egocentric(const GridConfig& config, const WorldState& state) {
  Observation obs;
  obs.rows = config.height + 1;
  obs.cols = config.width + 1;
  obs.channels = config.n_item_types + 1;
  obs.data.assign(static_cast<std::size_t>(obs.rows * obs.cols * obs.channels), 0.0f);
  auto put = [&](int r, int c, int ch) {
    const int rr = ((r - state.agent.row) % obs.rows + obs.rows) % obs.rows;
    const int cc = ((c - state.agent.col) % obs.cols + obs.cols) % obs.cols;
    obs.data[(static_cast<std::size_t>(rr) * static_cast<std::size_t>(obs.cols) + static_cast<std::size_t>(cc)) *
                 static_cast<std::size_t>(obs.channels) +
             static_cast<std::size_t>(ch)] = 1.0f;
  };
  for (int r = 0; r < obs.rows; ++r) {
    for (int c = 0; c < obs.cols; ++c) {
      if (r == config.height || c == config.width) put(r, c, config.n_item_types);
    }
  }
  for (std::size_t k = 0; k < state.items.size(); ++k) {
    if (state.item_present(k)) put(state.items[k].cell.row, state.items[k].cell.col, state.items[k].type);
  }
  return obs;
}

}  // namespace sipgpi
