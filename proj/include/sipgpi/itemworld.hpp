// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

// The 2-D item-collection gridworld. Four moves, walls at the border (a move
// into a wall leaves the agent in place), one feature per item type that
// fires with value C when an item of that type is picked up.
//
// Two configurations are supported:
//  * fixed placement without respawn ("desk" mode): every world state maps
//    to a dense index agent_cell * 2^K + presence_mask, which makes exact
//    dynamic programming possible;
//  * random placement per episode, optionally with respawn ("large" preset),
//    which is simulation-only.

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sipgpi/core.hpp"

namespace sipgpi {

using Rng = std::mt19937_64;

enum class Action : std::uint8_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
inline constexpr int kNumActions = 4;

const char* action_name(int action);
/// Accepts up/down/left/right or u/d/l/r; throws ConfigError otherwise.
int parse_action(const std::string& name);

struct Cell {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct ItemPlacement {
  Cell cell;
  int type = 0;
  friend bool operator==(const ItemPlacement&, const ItemPlacement&) = default;
};

struct GridConfig {
  int height = 5;
  int width = 6;
  int n_item_types = 2;
  int items_per_type = 2;
  /// When true, `placement` is ignored and items are drawn every episode.
  bool random_placement = false;
  std::vector<ItemPlacement> placement;
  /// Empty means every cell that neither holds nor neighbours an item.
  std::vector<Cell> start_cells;
  double slip_prob = 0.0;
  int horizon = 50;
  bool respawn = false;
  std::uint64_t seed = 0;
  /// C, the value of an active feature.
  double feature_value = 1.0;
  std::size_t enumeration_cap = std::size_t{1} << 20;

  /// 5x6 grid, checkerboard 2x2 block of items in the top rows.
  static GridConfig desk();
  /// 10x10, 5 random items per type, respawn on.
  static GridConfig large();

  void validate() const;
  /// validate() minus the start-cell invariant; lets verifiers report it.
  void validate_layout() const;
  bool is_tabular() const { return !random_placement && !respawn; }
  int num_items() const { return n_item_types * items_per_type; }
  /// Start cells for fixed placement (explicit list or derived).
  std::vector<Cell> permitted_starts() const;
  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.row < height && c.col >= 0 && c.col < width;
  }

  /// Stable key=value rendering; input to hash().
  std::string canonical() const;
  /// FNV-1a over canonical().
  std::uint64_t hash() const;
};

struct WorldState {
  Cell agent;
  Cell start;
  /// Item slots; slot k is present iff bit k of `present` is set.
  std::vector<ItemPlacement> items;
  std::uint64_t present = 0;
  int steps_elapsed = 0;

  bool item_present(std::size_t k) const { return (present >> k) & 1u; }
  /// Present item counts per type.
  std::vector<int> counts(int n_types) const;
};

struct StepOutcome {
  WorldState next;
  FeatureVector phi;
  bool terminal = false;
  int executed_action = 0;
};

Cell move(const GridConfig& config, Cell from, int action);

WorldState reset(const GridConfig& config, Rng& rng);
/// Throws ProtocolError when `state` is already terminal.
StepOutcome step(const GridConfig& config, const WorldState& state, int action, Rng& rng);

/// Dense, exactly enumerated form of a fixed-placement, no-respawn world.
/// Transitions are indexed by the executed action; slip turns an intended
/// action a into executed action b with probability (1-p)[a==b] + p/4.
class TabularModel {
 public:
  static TabularModel build(const GridConfig& config);
  /// Skips the start-cell invariant (used by verify_sif to report it).
  static TabularModel build_unchecked(const GridConfig& config);

  const GridConfig& config() const { return config_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return kNumActions; }
  int n_features() const { return config_.n_item_types; }
  int num_items() const { return num_items_; }
  double feature_value() const { return config_.feature_value; }
  double slip() const { return config_.slip_prob; }
  bool deterministic() const { return config_.slip_prob == 0.0; }
  int horizon() const { return config_.horizon; }

  int next(int s, int executed) const { return next_[idx(s, executed)]; }
  /// Item type picked up by the transition, or -1.
  int feature_type(int s, int executed) const { return feature_[idx(s, executed)]; }
  /// Agent not standing on a present item.
  bool valid(int s) const { return valid_[static_cast<std::size_t>(s)] != 0; }
  /// Reachable from some start state.
  bool reachable(int s) const { return reachable_[static_cast<std::size_t>(s)] != 0; }
  const std::vector<int>& starts() const { return starts_; }
  std::array<double, kNumActions> outcome_probs(int intended) const;

  int index(const WorldState& state) const;
  WorldState decode(int s) const;
  Cell agent_cell(int s) const;
  std::uint64_t presence(int s) const;

  /// r[s*A + b] = phi(s, b) . w
  std::vector<double> linear_rewards(const TaskVector& w) const;
  /// phi(s, b) as a vector.
  FeatureVector phi(int s, int executed) const {
    return FeatureVector::event(static_cast<std::size_t>(n_features()), feature_type(s, executed),
                                feature_value());
  }

 private:
  std::size_t idx(int s, int a) const {
    return static_cast<std::size_t>(s) * kNumActions + static_cast<std::size_t>(a);
  }

  GridConfig config_;
  int num_states_ = 0;
  int num_items_ = 0;
  std::vector<std::int32_t> next_;
  std::vector<std::int8_t> feature_;
  std::vector<std::uint8_t> valid_;
  std::vector<std::uint8_t> reachable_;
  std::vector<int> starts_;
};

struct FeatureWitness {
  int type = 0;
  Cell start;
  bool found = false;
  std::vector<int> actions;
};

struct SifReport {
  bool pass = false;
  bool condition_i = false;
  bool condition_ii = false;
  std::vector<std::string> violations;
  std::vector<FeatureWitness> witnesses;
};

/// Checks the independence conditions on a deterministic fixed config:
/// (i) no feature fires on any first transition from any start state;
/// (ii) from every start, for every type i, some trajectory within the
/// horizon collects every type-i item and no other item (breadth-first
/// search; the shortest such trajectory is the witness).
SifReport verify_sif(const GridConfig& config);

/// (height+1) x (width+1) x (n+1) tensor, channel-last. Channels 0..n-1 hold
/// items, channel n the wall row/column. Shifted so the agent sits at (0,0);
/// indices wrap.
struct Observation {
  int rows = 0;
  int cols = 0;
  int channels = 0;
  std::vector<float> data;

  float at(int r, int c, int ch) const {
    return data[(static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                 static_cast<std::size_t>(c)) *
                    static_cast<std::size_t>(channels) +
                static_cast<std::size_t>(ch)];
  }
};

Observation encode_egocentric(const GridConfig& config, const WorldState& state);

}  // namespace sipgpi
