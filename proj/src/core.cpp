// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#include "sipgpi/core.hpp"

#include <charconv>

#include <cmath>
#include <numbers>
#include <sstream>

namespace sipgpi {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ConfigError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

TaskVector TaskVector::unit(std::span<const double> values) { return normalize_task(values); }

TaskVector TaskVector::raw(std::span<const double> values) {
  return TaskVector(std::vector<double>(values.begin(), values.end()), true);
}

double TaskVector::norm() const { return std::sqrt(dot(w_, w_)); }

TaskVector TaskVector::scaled(double c) const {
  TaskVector t = *this;
  for (double& x : t.w_) x *= c;
  t.raw_ = true;
  return t;
}

FeatureVector FeatureVector::event(std::size_t n, int type, double c) {
  FeatureVector f = zero(n);
  if (type >= 0) {
    if (static_cast<std::size_t>(type) >= n) throw ConfigError("feature type out of range");
    f.phi[static_cast<std::size_t>(type)] = c;
  }
  return f;
}

bool FeatureVector::is_zero() const {
  for (double x : phi)
    if (x != 0.0) return false;
  return true;
}

int FeatureVector::active_type() const {
  int found = -1;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (phi[i] != 0.0) {
      if (found >= 0) return -1;
      found = static_cast<int>(i);
    }
  }
  return found;
}

DiscountFactor::DiscountFactor(double gamma) : gamma_(gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw ConfigError("discount factor must lie in [0, 1), got " + std::to_string(gamma));
  }
}

double linear_reward(const FeatureVector& phi, const TaskVector& w) {
  return dot(phi.phi, w.values());
}

TaskVector normalize_task(std::span<const double> raw) {
  double sq = 0.0;
  for (double x : raw) sq += x * x;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DegenerateTaskError("cannot normalize a zero or non-finite task vector");
  }
  std::vector<double> w(raw.begin(), raw.end());
  for (double& x : w) x /= norm;
  return TaskVector(std::move(w), false);
}

TaskVector task_at_angle(double degrees) {
  const double rad = degrees * std::numbers::pi / 180.0;
  const double v[2] = {std::cos(rad), std::sin(rad)};
  return normalize_task(v);
}

std::string format_task(const TaskVector& w) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < w.dim(); ++i) {
    if (i) os << ',';
    os << w[i];
  }
  os << ')';
  return os.str();
}

std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  double x = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), x);
  if (token.empty() || res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw ConfigError("not a number: '" + std::string(token) + "'");
  }
  return x;
}

}  // namespace sipgpi
