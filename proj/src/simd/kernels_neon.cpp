#include <arm_neon.h>

#include "kernels_internal.hpp"

namespace fplap::simd::detail {
namespace {

inline float64x2_t vipow(float64x2_t x, int k) {
  float64x2_t r = vdupq_n_f64(1.0);
  for (int i = 0; i < k; ++i) r = vmulq_f64(r, x);
  return r;
}

double flux_neon(const double* w, const double* u, double ui, std::size_t n, double p) {
  int k = 0;
  if (!integer_exponent(p, k)) return flux_scalar(w, u, ui, n, p);
  const float64x2_t vui = vdupq_n_f64(ui);
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t d = vsubq_f64(vui, vld1q_f64(u + j));
    const float64x2_t term = vmulq_f64(vipow(vabsq_f64(d), k - 2), d);
    acc = vfmaq_f64(acc, vld1q_f64(w + j), term);
  }
  double tail = 0.0;
  for (; j < n; ++j) {
    const double d = ui - u[j];
    tail += w[j] * ipow(std::abs(d), k - 2) * d;
  }
  return vaddvq_f64(acc) + tail;
}

double energy_neon(const double* w, const double* u, double ui, std::size_t n, double p) {
  int k = 0;
  if (!integer_exponent(p, k)) return energy_scalar(w, u, ui, n, p);
  const float64x2_t vui = vdupq_n_f64(ui);
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t ad = vabsq_f64(vsubq_f64(vui, vld1q_f64(u + j)));
    acc = vfmaq_f64(acc, vld1q_f64(w + j), vipow(ad, k));
  }
  double tail = 0.0;
  for (; j < n; ++j) tail += w[j] * ipow(std::abs(ui - u[j]), k);
  return vaddvq_f64(acc) + tail;
}

double jacobian_neon(const double* w, const double* u, double ui, std::size_t n, double p, double* out) {
  int k = 0;
  if (!integer_exponent(p, k)) return jacobian_scalar(w, u, ui, n, p, out);
  const float64x2_t vui = vdupq_n_f64(ui);
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t ad = vabsq_f64(vsubq_f64(vui, vld1q_f64(u + j)));
    const float64x2_t v = vmulq_f64(vld1q_f64(w + j), vipow(ad, k - 2));
    vst1q_f64(out + j, v);
    acc = vaddq_f64(acc, v);
  }
  double tail = 0.0;
  for (; j < n; ++j) {
    out[j] = w[j] * ipow(std::abs(ui - u[j]), k - 2);
    tail += out[j];
  }
  return vaddvq_f64(acc) + tail;
}

}  // namespace

const RowKernels kNeonKernels{flux_neon, energy_neon, jacobian_neon};

}  // namespace fplap::simd::detail
