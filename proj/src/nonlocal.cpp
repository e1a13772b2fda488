#include "fplap/nonlocal.hpp"

#include <cmath>
#include <sstream>

#include "fplap/simd.hpp"

namespace fplap {

std::string_view to_string(Mode mode) { return mode == Mode::Full ? "full" : "pure_singular"; }

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

inline double signed_pow(double t, double e) { return std::pow(std::abs(t), e) * t; }

}  // namespace

void ProblemParams::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidParams, msg); };
  if (!(s > 0.0 && s < 1.0)) fail("requires s in (0,1), got s = " + fmt(s));
  if (!(p >= 2.0)) fail("requires p >= 2, got p = " + fmt(p));
  if (!(s * p < 1.0)) fail("requires n > sp (n = 1), got sp = " + fmt(s * p));
  if (!(q > 0.0 && q <= 1.0)) fail("requires 0 < q <= 1, got q = " + fmt(q));
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("requires lambda >= 0, got lambda = " + fmt(lambda));
  if (mode == Mode::Full) {
    if (!(alpha > p - 1.0)) fail("requires alpha > p - 1, got alpha = " + fmt(alpha));
    if (!(alpha <= p_star() - 1.0)) fail("requires alpha <= p*_s - 1 = " + fmt(p_star() - 1.0));
  } else if (!(q < 1.0)) {
    fail("pure singular mode requires 0 < q < 1");
  }
}

KernelWeights::KernelWeights(const Mesh& mesh, double s, double p, std::vector<double> weights,
                             std::vector<double> zeta)
    : mesh_(mesh), s_(s), p_(p), w_(std::move(weights)), zeta_(std::move(zeta)) {
  const std::size_t n = mesh_.size();
  if (w_.size() != n * n || zeta_.size() != n) throw Error(ErrorCode::MeshMismatch, "kernel arrays do not match mesh");
}

KernelWeights build_kernel(const Mesh& mesh, double s, double p) {
  if (!(s > 0.0 && s < 1.0) || !(p >= 2.0)) throw Error(ErrorCode::InvalidParams, "requires s in (0,1) and p >= 2");
  if (!(s * p < 1.0)) throw Error(ErrorCode::InvalidParams, "requires n > sp (n = 1)");
  const std::size_t n = mesh.size();
  const double h = mesh.h();
  const double sp = s * p;
  std::vector<double> w(n * n, 0.0);
  std::vector<double> zeta(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = mesh.node(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = h * h / std::pow(std::abs(xi - mesh.node(j)), 1.0 + sp);
      w[i * n + j] = v;
      w[j * n + i] = v;
    }
    zeta[i] = (std::pow(xi - mesh.a(), -sp) + std::pow(mesh.b() - xi, -sp)) / sp;
  }
  return KernelWeights(mesh, s, p, std::move(w), std::move(zeta));
}

double seminorm_p(const KernelWeights& K, const DiscreteFunction& u) {
  require_same_mesh(K.mesh(), u.mesh());
  const auto& ops = simd::kernels();
  const std::size_t n = K.size();
  const double p = K.p();
  const double* x = u.values().data();
  double pair = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pair += ops.energy(K.row(i).data() + i + 1, x + i + 1, x[i], n - i - 1, p);
    comp += K.zeta()[i] * std::pow(std::abs(x[i]), p);
  }
  return 2.0 * pair + 2.0 * K.h() * comp;
}

double seminorm(const KernelWeights& K, const DiscreteFunction& u) { return std::pow(seminorm_p(K, u), 1.0 / K.p()); }

DiscreteFunction apply_fplap(const KernelWeights& K, const DiscreteFunction& u) {
  require_same_mesh(K.mesh(), u.mesh());
  const auto& ops = simd::kernels();
  const std::size_t n = K.size();
  const double p = K.p();
  const double h = K.h();
  const double* x = u.values().data();
  DiscreteFunction out(K.mesh());
  for (std::size_t i = 0; i < n; ++i) {
    const double flux = ops.flux(K.row(i).data(), x, x[i], n, p);
    out[i] = (2.0 / h) * (flux + h * K.zeta()[i] * signed_pow(x[i], p - 2.0));
  }
  return out;
}

Eigen::MatrixXd fplap_jacobian(const KernelWeights& K, const DiscreteFunction& u) {
  require_same_mesh(K.mesh(), u.mesh());
  const auto& ops = simd::kernels();
  const std::size_t n = K.size();
  const double p = K.p();
  const double h = K.h();
  const double c = 2.0 * (p - 1.0) / h;
  const double* x = u.values().data();
  // Rows of a column-major matrix are strided, so assemble the (symmetric) transpose column by column.
  Eigen::MatrixXd J(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double* col = J.col(static_cast<Eigen::Index>(i)).data();
    const double diag = ops.jacobian(K.row(i).data(), x, x[i], n, p, col);
    for (std::size_t j = 0; j < n; ++j) col[j] *= -c;
    col[i] = c * (diag + h * K.zeta()[i] * std::pow(std::abs(x[i]), p - 2.0));
  }
  return J;
}

void require_compatible(const KernelWeights& K, const ProblemParams& params) {
  if (K.s() != params.s || K.p() != params.p)
    throw Error(ErrorCode::InvalidParams, "kernel built for (s, p) = (" + fmt(K.s()) + ", " + fmt(K.p()) +
                                              ") but problem has (" + fmt(params.s) + ", " + fmt(params.p) + ")");
}

double energy(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u) {
  require_compatible(K, params);
  const double q = params.q;
  double singular = 0.0;
  if (params.lambda != 0.0) {
    if (q == 1.0) {
      for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] == 0.0) throw Error(ErrorCode::SingularLog, "ln|u| undefined at node " + std::to_string(i));
      singular = integrate(u, [](double v) { return std::log(std::abs(v)); });
    } else {
      singular = integrate(u, [q](double v) { return std::pow(std::abs(v), 1.0 - q) / (1.0 - q); });
    }
  }
  double power = 0.0;
  if (params.has_power_term()) power = integral_abs_pow(u, params.alpha + 1.0) / (params.alpha + 1.0);
  return seminorm_p(K, u) / params.p - params.lambda * singular - power;
}

DiscreteFunction energy_gradient(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u) {
  require_compatible(K, params);
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!(u[i] > 0.0)) throw Error(ErrorCode::NonPositiveValue, "u must be positive, node " + std::to_string(i));
  DiscreteFunction g = apply_fplap(K, u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    g[i] -= params.lambda * std::pow(u[i], -params.q);
    if (params.has_power_term()) g[i] -= std::pow(u[i], params.alpha);
  }
  return g;
}

Eigen::MatrixXd energy_hessian(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u,
                               HessianPart part) {
  require_compatible(K, params);
  Eigen::MatrixXd H = fplap_jacobian(K, u);
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!(u[i] > 0.0)) throw Error(ErrorCode::NonPositiveValue, "u must be positive, node " + std::to_string(i));
    double d = params.lambda * params.q * std::pow(u[i], -params.q - 1.0);
    if (part == HessianPart::Full && params.has_power_term())
      d -= params.alpha * std::pow(u[i], params.alpha - 1.0);
    H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += d;
  }
  return H;
}

}  // namespace fplap
