// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sipgpi {

inline constexpr const char* kVersion = "0.1.0";

// Error taxonomy. Everything the library throws derives from Error so
// callers (the CLI in particular) can map failures onto exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Invalid configuration, dimension mismatch, malformed input file.
struct ConfigError : Error {
  using Error::Error;
};
/// API used out of order (stepping a terminal state, empty policy set).
struct ProtocolError : Error {
  using Error::Error;
};
/// A task vector with zero norm where a direction was required.
struct DegenerateTaskError : Error {
  using Error::Error;
};
/// A learner's estimates left their admissible range.
struct DivergenceError : Error {
  using Error::Error;
};
/// Tabular enumeration would exceed the configured state cap.
struct CapacityError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

inline constexpr double kUnitNormTol = 1e-9;

/// Preference vector w. Unit norm unless explicitly built as raw.
class TaskVector {
 public:
  TaskVector() = default;

  /// Normalizes `values`; throws DegenerateTaskError on a zero vector.
  static TaskVector unit(std::span<const double> values);
  static TaskVector unit(std::initializer_list<double> values) {
    return unit(std::span<const double>(values.begin(), values.size()));
  }
  /// Keeps `values` as given (DSP intermediates, the zero task).
  static TaskVector raw(std::span<const double> values);
  static TaskVector raw(std::initializer_list<double> values) {
    return raw(std::span<const double>(values.begin(), values.size()));
  }

  std::size_t dim() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> values() const { return w_; }
  bool is_raw() const { return raw_; }
  double norm() const;

  /// c * w, flagged raw.
  TaskVector scaled(double c) const;

  friend bool operator==(const TaskVector&, const TaskVector&) = default;
  friend TaskVector normalize_task(std::span<const double> raw);

 private:
  TaskVector(std::vector<double> w, bool raw) : w_(std::move(w)), raw_(raw) {}

  std::vector<double> w_;
  bool raw_ = false;
};

/// phi(s, a, s'). Entries are 0 or C.
struct FeatureVector {
  std::vector<double> phi;

  static FeatureVector zero(std::size_t n) { return {std::vector<double>(n, 0.0)}; }
  /// One-hot event of type `type` with value c; type < 0 gives the zero vector.
  static FeatureVector event(std::size_t n, int type, double c = 1.0);

  std::size_t dim() const { return phi.size(); }
  bool is_zero() const;
  /// Index of the single nonzero entry, or -1.
  int active_type() const;
};

class DiscountFactor {
 public:
  explicit DiscountFactor(double gamma);
  double value() const { return gamma_; }

 private:
  double gamma_;
};

struct Transition {
  int state_before = 0;
  int action = 0;
  int state_after = 0;
  FeatureVector phi;
  double reward = 0.0;
  bool terminal = false;
};

double dot(std::span<const double> a, std::span<const double> b);

/// r_w = phi . w
double linear_reward(const FeatureVector& phi, const TaskVector& w);

/// raw / ||raw||_2
TaskVector normalize_task(std::span<const double> raw);
inline TaskVector normalize_task(std::initializer_list<double> raw) {
  return normalize_task(std::span<const double>(raw.begin(), raw.size()));
}

/// Unit vector at `degrees` on the 2-D circle.
TaskVector task_at_angle(double degrees);

std::string format_task(const TaskVector& w);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
/// Strict parse of a whole token; throws ConfigError.
double parse_double(std::string_view token);

}  // namespace sipgpi
