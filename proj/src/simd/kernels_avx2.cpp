#include <immintrin.h>

#include "kernels_internal.hpp"

namespace fplap::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d vabs(__m256d d) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), d); }

inline __m256d vipow(__m256d x, int k) {
  __m256d r = _mm256_set1_pd(1.0);
  for (int i = 0; i < k; ++i) r = _mm256_mul_pd(r, x);
  return r;
}

double flux_avx2(const double* w, const double* u, double ui, std::size_t n, double p) {
  int k = 0;
  if (!integer_exponent(p, k)) return flux_scalar(w, u, ui, n, p);
  const __m256d vui = _mm256_set1_pd(ui);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d d = _mm256_sub_pd(vui, _mm256_loadu_pd(u + j));
    const __m256d term = _mm256_mul_pd(vipow(vabs(d), k - 2), d);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + j), term, acc);
  }
  double tail = 0.0;
  for (; j < n; ++j) {
    const double d = ui - u[j];
    tail += w[j] * ipow(std::abs(d), k - 2) * d;
  }
  return hsum(acc) + tail;
}

double energy_avx2(const double* w, const double* u, double ui, std::size_t n, double p) {
  int k = 0;
  if (!integer_exponent(p, k)) return energy_scalar(w, u, ui, n, p);
  const __m256d vui = _mm256_set1_pd(ui);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d ad = vabs(_mm256_sub_pd(vui, _mm256_loadu_pd(u + j)));
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + j), vipow(ad, k), acc);
  }
  double tail = 0.0;
  for (; j < n; ++j) tail += w[j] * ipow(std::abs(ui - u[j]), k);
  return hsum(acc) + tail;
}

double jacobian_avx2(const double* w, const double* u, double ui, std::size_t n, double p, double* out) {
  int k = 0;
  if (!integer_exponent(p, k)) return jacobian_scalar(w, u, ui, n, p, out);
  const __m256d vui = _mm256_set1_pd(ui);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d ad = vabs(_mm256_sub_pd(vui, _mm256_loadu_pd(u + j)));
    const __m256d v = _mm256_mul_pd(_mm256_loadu_pd(w + j), vipow(ad, k - 2));
    _mm256_storeu_pd(out + j, v);
    acc = _mm256_add_pd(acc, v);
  }
  double tail = 0.0;
  for (; j < n; ++j) {
    out[j] = w[j] * ipow(std::abs(ui - u[j]), k - 2);
    tail += out[j];
  }
  return hsum(acc) + tail;
}

}  // namespace

const RowKernels kAvx2Kernels{flux_avx2, energy_avx2, jacobian_avx2};

}  // namespace fplap::simd::detail
