// Copyright 2026 The sipgpi Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <string_view>

#include "kernels_impl.hpp"
#include "sipgpi/core.hpp"
#include "sipgpi/kernels.hpp"

namespace sipgpi::kernels {

const KernelSet& scalar_kernels() {
  static const KernelSet k{"scalar", detail::dot_rows_scalar, detail::max_into_scalar,
                           detail::max_abs_diff_scalar};
  return k;
}

const KernelSet* avx2_kernels() {
#if defined(SIPGPI_HAVE_AVX2)
  static const KernelSet k{"avx2", detail::dot_rows_avx2, detail::max_into_avx2,
                           detail::max_abs_diff_avx2};
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &k : nullptr;
#else
  return nullptr;
#endif
}

const KernelSet* neon_kernels() {
#if defined(SIPGPI_HAVE_NEON)
  static const KernelSet k{"neon", detail::dot_rows_neon, detail::max_into_neon,
                           detail::max_abs_diff_neon};
  return &k;
#else
  return nullptr;
#endif
}

std::vector<const KernelSet*> available_kernels() {
  std::vector<const KernelSet*> out{&scalar_kernels()};
  if (const KernelSet* k = avx2_kernels()) out.push_back(k);
  if (const KernelSet* k = neon_kernels()) out.push_back(k);
  return out;
}

namespace {

const KernelSet& select() {
  const char* forced = std::getenv("SIPGPI_KERNELS");
  const std::string_view want = forced ? forced : "auto";
  if (want == "auto" || want.empty()) return *available_kernels().back();
  for (const KernelSet* k : available_kernels()) {
    if (want == k->name) return *k;
  }
  throw ConfigError("SIPGPI_KERNELS names an unavailable kernel set: " + std::string(want));
}

}  // namespace

const KernelSet& active_kernels() {
  static const KernelSet& k = select();
  return k;
}

void dot_rows(std::span<const double> rows, std::size_t n, std::span<const double> w,
              std::span<double> out) {
  if (n == 0 || w.size() != n || rows.size() != out.size() * n) {
    throw ConfigError("dot_rows: shape mismatch");
  }
  if (out.empty()) return;
  active_kernels().dot_rows(rows.data(), out.size(), n, w.data(), out.data());
}

void max_into(std::span<double> acc, std::span<const double> x) {
  if (acc.size() != x.size()) throw ConfigError("max_into: length mismatch");
  active_kernels().max_into(acc.data(), x.data(), acc.size());
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("max_abs_diff: length mismatch");
  return active_kernels().max_abs_diff(a.data(), b.data(), a.size());
}

}  // namespace sipgpi::kernels
