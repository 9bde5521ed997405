// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "kernels_impl.hpp"

namespace sipgpi::kernels::detail {

void dot_rows_scalar(const double* rows, std::size_t count, std::size_t n, const double* w,
                     double* out) {
  for (std::size_t r = 0; r < count; ++r) {
    const double* row = rows + r * n;
    double acc = row[0] * w[0];
    for (std::size_t j = 1; j < n; ++j) acc = acc + row[j] * w[j];
    out[r] = acc;
  }
}

void max_into_scalar(double* acc, const double* x, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) acc[i] = acc[i] > x[i] ? acc[i] : x[i];
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t len) {
  double m = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    m = m > d ? m : d;
  }
  return m;
}

}  // namespace sipgpi::kernels::detail
