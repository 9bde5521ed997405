// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 only; reached through the runtime dispatcher after a
// CPU feature check. No FMA: see kernels.hpp.

#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "kernels_impl.hpp"

namespace sipgpi::kernels::detail {

namespace {

// Two features per row: two rows fit one register, hadd finishes each dot.
void dot_rows_avx2_n2(const double* rows, std::size_t count, const double* w, double* out) {
  const __m256d wv = _mm256_setr_pd(w[0], w[1], w[0], w[1]);
  std::size_t r = 0;
  for (; r + 4 <= count; r += 4) {
    const __m256d lo = _mm256_mul_pd(_mm256_loadu_pd(rows + 2 * r), wv);
    const __m256d hi = _mm256_mul_pd(_mm256_loadu_pd(rows + 2 * r + 4), wv);
    // [r, r+2, r+1, r+3] -> [r, r+1, r+2, r+3]
    const __m256d sums = _mm256_permute4x64_pd(_mm256_hadd_pd(lo, hi), 0xD8);
    _mm256_storeu_pd(out + r, sums);
  }
  for (; r < count; ++r) out[r] = rows[2 * r] * w[0] + rows[2 * r + 1] * w[1];
}

}  // namespace

void dot_rows_avx2(const double* rows, std::size_t count, std::size_t n, const double* w,
                   double* out) {
  if (n == 2) {
    dot_rows_avx2_n2(rows, count, w, out);
    return;
  }
  const auto stride = static_cast<std::int64_t>(n);
  const __m256i idx = _mm256_setr_epi64x(0, stride, 2 * stride, 3 * stride);
  std::size_t r = 0;
  for (; r + 4 <= count; r += 4) {
    const double* base = rows + r * n;
    __m256d acc = _mm256_mul_pd(_mm256_i64gather_pd(base, idx, 8), _mm256_set1_pd(w[0]));
    for (std::size_t j = 1; j < n; ++j) {
      const __m256d col = _mm256_i64gather_pd(base + j, idx, 8);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(col, _mm256_set1_pd(w[j])));
    }
    _mm256_storeu_pd(out + r, acc);
  }
  if (r < count) dot_rows_scalar(rows + r * n, count - r, n, w, out + r);
}

void max_into_avx2(double* acc, const double* x, std::size_t len) {
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d a = _mm256_loadu_pd(acc + i);
    const __m256d b = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(acc + i, _mm256_max_pd(a, b));
  }
  for (; i < len; ++i) acc[i] = acc[i] > x[i] ? acc[i] : x[i];
}

double max_abs_diff_avx2(const double* a, const double* b, std::size_t len) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign, d));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double best = 0.0;
  for (double v : lanes) best = best > v ? best : v;
  for (; i < len; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    best = best > d ? best : d;
  }
  return best;
}

}  // namespace sipgpi::kernels::detail
