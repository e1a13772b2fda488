#pragma once

#include <cmath>
#include <cstddef>

#include "fplap/simd.hpp"

namespace fplap::simd::detail {

/// Vector variants take the multiply-only path for integral p in [2, 16].
inline bool integer_exponent(double p, int& k) noexcept {
  if (!(p >= 2.0 && p <= 16.0)) return false;
  const double r = std::round(p);
  if (r != p) return false;
  k = static_cast<int>(r);
  return true;
}

inline double ipow(double x, int k) noexcept {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

double flux_scalar(const double* w, const double* u, double ui, std::size_t n, double p);
double energy_scalar(const double* w, const double* u, double ui, std::size_t n, double p);
double jacobian_scalar(const double* w, const double* u, double ui, std::size_t n, double p, double* out);

extern const RowKernels kScalarKernels;
#if defined(FPLAP_HAVE_AVX2)
extern const RowKernels kAvx2Kernels;
#endif
#if defined(FPLAP_HAVE_NEON)
extern const RowKernels kNeonKernels;
#endif

}  // namespace fplap::simd::detail
