// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

namespace sipgpi::kernels::detail {

void dot_rows_scalar(const double* rows, std::size_t count, std::size_t n, const double* w,
                     double* out);
void max_into_scalar(double* acc, const double* x, std::size_t len);
double max_abs_diff_scalar(const double* a, const double* b, std::size_t len);

#if defined(SIPGPI_HAVE_AVX2)
void dot_rows_avx2(const double* rows, std::size_t count, std::size_t n, const double* w,
                   double* out);
void max_into_avx2(double* acc, const double* x, std::size_t len);
double max_abs_diff_avx2(const double* a, const double* b, std::size_t len);
#endif

#if defined(SIPGPI_HAVE_NEON)
void dot_rows_neon(const double* rows, std::size_t count, std::size_t n, const double* w,
                   double* out);
void max_into_neon(double* acc, const double* x, std::size_t len);
double max_abs_diff_neon(const double* a, const double* b, std::size_t len);
#endif

}  // namespace sipgpi::kernels::detail
