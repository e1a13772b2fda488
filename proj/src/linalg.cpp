#include "fplap/linalg.hpp"

#include <cmath>

namespace fplap {

Eigen::VectorXd to_eigen(const DiscreteFunction& u) {
  return Eigen::Map<const Eigen::VectorXd>(u.values().data(), static_cast<Eigen::Index>(u.size()));
}

DiscreteFunction from_eigen(const Mesh& mesh, const Eigen::VectorXd& v) {
  return DiscreteFunction(mesh, std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& M, const Eigen::VectorXd& rhs) {
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  const double scale = std::max(M.diagonal().cwiseAbs().mean(), 1e-300);
  double shift = 1e-12 * scale;
  for (int attempt = 0; attempt < 40; ++attempt, shift *= 10.0) {
    Eigen::MatrixXd S = M;
    S.diagonal().array() += shift;
    llt.compute(S);
    if (llt.info() == Eigen::Success) return llt.solve(rhs);
  }
  throw Error(ErrorCode::NotConverged, "could not regularize matrix to positive definite");
}

Eigen::VectorXd solve_general(const Eigen::MatrixXd& M, const Eigen::VectorXd& rhs) {
  return M.partialPivLu().solve(rhs);
}

double h_dot(const DiscreteFunction& a, const DiscreteFunction& b) {
  require_same_mesh(a.mesh(), b.mesh());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return a.mesh().h() * acc;
}

}  // namespace fplap
