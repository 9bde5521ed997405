// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

// Data-parallel inner loops shared by GPE/GPI, MaxQInit and the fixed-point
// solvers. Every variant is bit-identical to the scalar reference: products
// are accumulated in ascending feature order starting from the first
// product, with no fused multiply-add. GPI argmax ties therefore resolve the
// same way whichever variant is active.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sipgpi::kernels {

struct KernelSet {
  const char* name;
  /// out[r] = sum_j rows[r*n + j] * w[j], for r in [0, count). n >= 1.
  void (*dot_rows)(const double* rows, std::size_t count, std::size_t n, const double* w,
                   double* out);
  /// acc[i] = acc[i] > x[i] ? acc[i] : x[i]
  void (*max_into)(double* acc, const double* x, std::size_t len);
  /// max_i |a[i] - b[i]|, 0 for len == 0.
  double (*max_abs_diff)(const double* a, const double* b, std::size_t len);
};

const KernelSet& scalar_kernels();
/// nullptr when not compiled in or unsupported by the running CPU.
const KernelSet* avx2_kernels();
const KernelSet* neon_kernels();

/// Every variant usable on this machine, scalar first.
std::vector<const KernelSet*> available_kernels();

/// Chosen once per process: the widest available variant, unless the
/// SIPGPI_KERNELS environment variable names one (scalar, avx2, neon).
const KernelSet& active_kernels();

// Span front-ends over the active variant.
void dot_rows(std::span<const double> rows, std::size_t n, std::span<const double> w,
              std::span<double> out);
void max_into(std::span<double> acc, std::span<const double> x);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace sipgpi::kernels
