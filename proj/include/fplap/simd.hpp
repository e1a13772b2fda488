#pragma once

#include <cstddef>
#include <string_view>

namespace fplap::simd {

enum class Level { Scalar, Avx2, Neon };

std::string_view to_string(Level level);

/// Row primitives of the dense Gagliardo sums. Every variant computes the
/// same quantity; vector variants are only required to agree with the scalar
/// reference up to floating-point reassociation.
struct RowKernels {
  /// sum_j w[j] * |ui - u[j]|^(p-2) (ui - u[j])
  double (*flux)(const double* w, const double* u, double ui, std::size_t n, double p);
  /// sum_j w[j] * |ui - u[j]|^p
  double (*energy)(const double* w, const double* u, double ui, std::size_t n, double p);
  /// out[j] = w[j] * |ui - u[j]|^(p-2); returns sum_j out[j]
  double (*jacobian)(const double* w, const double* u, double ui, std::size_t n, double p, double* out);
};

bool supported(Level level) noexcept;

/// Best level supported by both the build and the running CPU.
Level detected_level() noexcept;

/// Level used by kernels(). Starts at detected_level(), unless the
/// FPLAP_SIMD environment variable names another supported level
/// ("scalar", "avx2", "neon").
Level active_level() noexcept;

/// Throws std::invalid_argument if the level is unsupported here.
void set_active_level(Level level);

const RowKernels& kernels() noexcept;
const RowKernels& kernels(Level level);

}  // namespace fplap::simd
