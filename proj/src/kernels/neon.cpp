// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#include <arm_neon.h>

#include <cmath>

#include "kernels_impl.hpp"

namespace sipgpi::kernels::detail {

void dot_rows_neon(const double* rows, std::size_t count, std::size_t n, const double* w,
                   double* out) {
  // Two rows per iteration, one lane each; same accumulation order as scalar.
  std::size_t r = 0;
  for (; r + 2 <= count; r += 2) {
    const double* a = rows + r * n;
    const double* b = a + n;
    float64x2_t acc = vmulq_n_f64(float64x2_t{a[0], b[0]}, w[0]);
    for (std::size_t j = 1; j < n; ++j) {
      acc = vaddq_f64(acc, vmulq_n_f64(float64x2_t{a[j], b[j]}, w[j]));
    }
    vst1q_f64(out + r, acc);
  }
  if (r < count) dot_rows_scalar(rows + r * n, count - r, n, w, out + r);
}

void max_into_neon(double* acc, const double* x, std::size_t len) {
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const float64x2_t a = vld1q_f64(acc + i);
    const float64x2_t b = vld1q_f64(x + i);
    vst1q_f64(acc + i, vbslq_f64(vcgtq_f64(a, b), a, b));
  }
  for (; i < len; ++i) acc[i] = acc[i] > x[i] ? acc[i] : x[i];
}

double max_abs_diff_neon(const double* a, const double* b, std::size_t len) {
  float64x2_t m = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const float64x2_t d = vabsq_f64(vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    m = vbslq_f64(vcgtq_f64(m, d), m, d);
  }
  double best = vgetq_lane_f64(m, 0);
  const double hi = vgetq_lane_f64(m, 1);
  best = best > hi ? best : hi;
  for (; i < len; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    best = best > d ? best : d;
  }
  return best;
}

}  // namespace sipgpi::kernels::detail
