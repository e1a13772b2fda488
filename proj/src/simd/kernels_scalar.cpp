#include "kernels_internal.hpp"

namespace fplap::simd::detail {

double flux_scalar(const double* w, const double* u, double ui, std::size_t n, double p) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = ui - u[j];
    acc += w[j] * std::pow(std::abs(d), p - 2.0) * d;
  }
  return acc;
}

double energy_scalar(const double* w, const double* u, double ui, std::size_t n, double p) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += w[j] * std::pow(std::abs(ui - u[j]), p);
  return acc;
}

double jacobian_scalar(const double* w, const double* u, double ui, std::size_t n, double p, double* out) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = w[j] * std::pow(std::abs(ui - u[j]), p - 2.0);
    acc += out[j];
  }
  return acc;
}

const RowKernels kScalarKernels{flux_scalar, energy_scalar, jacobian_scalar};

}  // namespace fplap::simd::detail
