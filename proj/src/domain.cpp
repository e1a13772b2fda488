#include "fplap/domain.hpp"

#include <algorithm>
#include <string>

namespace fplap {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidDomain: return "InvalidDomain";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidExponent: return "InvalidExponent";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::MeshMismatch: return "MeshMismatch";
    case ErrorCode::SingularLog: return "SingularLog";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::ZeroFunction: return "ZeroFunction";
    case ErrorCode::NonPositiveT: return "NonPositiveT";
    case ErrorCode::DegenerateB: return "DegenerateB";
    case ErrorCode::BracketFail: return "BracketFail";
    case ErrorCode::InvalidConstants: return "InvalidConstants";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::NonPositiveEigenvector: return "NonPositiveEigenvector";
    case ErrorCode::NoTwoRoots: return "NoTwoRoots";
    case ErrorCode::SupercriticalAlpha: return "SupercriticalAlpha";
    case ErrorCode::EmptyInterval: return "EmptyInterval";
    case ErrorCode::MonotonicityViolation: return "MonotonicityViolation";
    case ErrorCode::InvalidMode: return "InvalidMode";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::CacheFormat: return "CacheFormat";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Mesh build_mesh(double a, double b, std::size_t n) {
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
    throw Error(ErrorCode::InvalidDomain, "requires b > a");
  if (n < kMinNodes) throw Error(ErrorCode::InvalidDomain, "requires N >= 8 interior nodes");
  return Mesh(a, b, n);
}

std::vector<double> Mesh::nodes() const {
  std::vector<double> x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[i] = node(i);
  return x;
}

DiscreteFunction::DiscreteFunction(const Mesh& mesh, std::vector<double> values)
    : mesh_(mesh), values_(std::move(values)) {
  if (values_.size() != mesh_.size())
    throw Error(ErrorCode::MeshMismatch, "value count " + std::to_string(values_.size()) + " != N " +
                                             std::to_string(mesh_.size()));
}

double DiscreteFunction::sup_norm() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double DiscreteFunction::min_value() const noexcept {
  return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

bool DiscreteFunction::is_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

DiscreteFunction& DiscreteFunction::operator+=(const DiscreteFunction& o) {
  require_same_mesh(mesh_, o.mesh_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

DiscreteFunction& DiscreteFunction::operator-=(const DiscreteFunction& o) {
  require_same_mesh(mesh_, o.mesh_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

DiscreteFunction& DiscreteFunction::operator*=(double c) noexcept {
  for (double& v : values_) v *= c;
  return *this;
}

void require_same_mesh(const Mesh& m1, const Mesh& m2) {
  if (!(m1 == m2)) throw Error(ErrorCode::MeshMismatch, "functions live on different meshes");
}

double integral_abs_pow(const DiscreteFunction& u, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidExponent, "requires beta > 0");
  return integrate(u, [beta](double v) { return std::pow(std::abs(v), beta); });
}

double norm_lp(const DiscreteFunction& u, double beta) {
  return std::pow(integral_abs_pow(u, beta), 1.0 / beta);
}

DiscreteFunction interpolate(const DiscreteFunction& u, const Mesh& target) {
  const Mesh& src = u.mesh();
  const std::size_t n = src.size();
  return DiscreteFunction::from_function(target, [&](double x) {
    if (x <= src.a() || x >= src.b()) return 0.0;
    // Knots at a + k h for k = 0..N+1, with zero values at k = 0 and k = N+1.
    const double pos = (x - src.a()) / src.h();
    const auto k = std::min(static_cast<std::size_t>(pos), n);
    const double frac = pos - static_cast<double>(k);
    const double left = k == 0 ? 0.0 : u[k - 1];
    const double right = k >= n ? 0.0 : u[k];
    return (1.0 - frac) * left + frac * right;
  });
}

}  // namespace fplap
