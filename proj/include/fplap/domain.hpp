#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fplap/error.hpp"

namespace fplap {

/// Uniform mesh of N interior nodes on the interval (a, b).
/// Node i (0-based) sits at a + (i + 1) h with h = (b - a) / (N + 1).
class Mesh {
 public:
  Mesh() = default;

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  std::size_t size() const noexcept { return n_; }
  double h() const noexcept { return h_; }
  double length() const noexcept { return b_ - a_; }

  double node(std::size_t i) const noexcept { return a_ + static_cast<double>(i + 1) * h_; }
  std::vector<double> nodes() const;

  bool operator==(const Mesh&) const = default;

 private:
  friend Mesh build_mesh(double a, double b, std::size_t n);
  Mesh(double a, double b, std::size_t n) : a_(a), b_(b), n_(n), h_((b - a) / static_cast<double>(n + 1)) {}

  double a_ = 0.0;
  double b_ = 1.0;
  std::size_t n_ = 0;
  double h_ = 0.0;
};

inline constexpr std::size_t kMinNodes = 8;

/// Throws InvalidDomain if b <= a or n < 8.
Mesh build_mesh(double a, double b, std::size_t n);

/// Nodal values on the interior nodes; the function is zero outside (a, b).
class DiscreteFunction {
 public:
  DiscreteFunction() = default;
  explicit DiscreteFunction(const Mesh& mesh, double fill = 0.0) : mesh_(mesh), values_(mesh.size(), fill) {}
  DiscreteFunction(const Mesh& mesh, std::vector<double> values);

  template <class F>
  static DiscreteFunction from_function(const Mesh& mesh, F&& f) {
    DiscreteFunction u(mesh);
    for (std::size_t i = 0; i < mesh.size(); ++i) u.values_[i] = f(mesh.node(i));
    return u;
  }

  const Mesh& mesh() const noexcept { return mesh_; }
  std::size_t size() const noexcept { return values_.size(); }

  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  const std::vector<double>& vec() const noexcept { return values_; }

  double sup_norm() const noexcept;
  double min_value() const noexcept;
  bool is_zero() const noexcept;

  DiscreteFunction& operator+=(const DiscreteFunction& o);
  DiscreteFunction& operator-=(const DiscreteFunction& o);
  DiscreteFunction& operator*=(double c) noexcept;

  friend DiscreteFunction operator+(DiscreteFunction l, const DiscreteFunction& r) { return l += r; }
  friend DiscreteFunction operator-(DiscreteFunction l, const DiscreteFunction& r) { return l -= r; }
  friend DiscreteFunction operator*(double c, DiscreteFunction u) { return u *= c; }
  friend DiscreteFunction operator*(DiscreteFunction u, double c) { return u *= c; }

 private:
  Mesh mesh_;
  std::vector<double> values_;
};

/// Throws MeshMismatch unless both functions live on the same mesh.
void require_same_mesh(const Mesh& m1, const Mesh& m2);

/// h * sum_i g(u_i). Throws NonFiniteValue if any g(u_i) is not finite.
template <class G>
double integrate(const DiscreteFunction& u, G&& g) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double gi = g(u[i]);
    if (!std::isfinite(gi)) throw Error(ErrorCode::NonFiniteValue, "integrand not finite at node " + std::to_string(i));
    acc += gi;
  }
  return u.mesh().h() * acc;
}

/// (h sum |u_i|^beta)^(1/beta). Throws InvalidExponent for beta <= 0.
double norm_lp(const DiscreteFunction& u, double beta);

/// h sum |u_i|^beta (the beta-th power of norm_lp, without the root).
double integral_abs_pow(const DiscreteFunction& u, double beta);

/// Pointwise linear interpolation onto another mesh, zero outside (a, b).
DiscreteFunction interpolate(const DiscreteFunction& u, const Mesh& target);

}  // namespace fplap
