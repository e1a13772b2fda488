#include "doctest.h"

#include "../common/oracles.hpp"
#include "fplap/eigenpair.hpp"
#include "fplap/fiber.hpp"

using namespace fplap;

TEST_SUITE("eigen") {
  TEST_CASE("p = 2 eigenpair against a dense symmetric eigensolve") {
    const std::size_t n = 160;
    const Mesh m = build_mesh(0.0, 1.0, n);
    const auto K = build_kernel(m, 0.4, 2.0);
    const auto ep = principal_eigenpair(K);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::linear_matrix(0.0, 1.0, 0.4, n));
    const double l1 = es.eigenvalues()(0);
    CHECK(ep.lambda1 == doctest::Approx(l1).epsilon(1e-10));
    CHECK(ep.residual <= 1e-10 * ep.lambda1);
    Eigen::VectorXd v = es.eigenvectors().col(0);
    v /= v.cwiseAbs().maxCoeff();
    if (v.sum() < 0) v = -v;
    for (std::size_t i = 0; i < n; ++i) CHECK(ep.phi1[i] == doctest::Approx(v(static_cast<Eigen::Index>(i))).epsilon(1e-8));
    CHECK(ep.phi1.min_value() > 0.0);
    CHECK(ep.phi1.sup_norm() == doctest::Approx(1.0));
    const double l2 = second_eigenvalue_p2(K, ep);
    CHECK(l2 == doctest::Approx(es.eigenvalues()(1)).epsilon(1e-8));
    CHECK(l2 > 1.5 * ep.lambda1);
  }

  TEST_CASE("p = 2 eigenvalue is mesh stable") {
    const auto e160 = principal_eigenpair(build_kernel(build_mesh(0, 1, 160), 0.4, 2.0));
    const auto e320 = principal_eigenpair(build_kernel(build_mesh(0, 1, 320), 0.4, 2.0));
    CHECK(std::abs(e320.lambda1 - e160.lambda1) < 0.01 * e160.lambda1);
  }

  TEST_CASE("p = 3 Rayleigh descent") {
    const Mesh m = build_mesh(0.0, 1.0, 96);
    const auto K = build_kernel(m, 0.3, 3.0);
    const auto ep = principal_eigenpair(K);
    CHECK(ep.residual <= 1e-10 * ep.lambda1);
    CHECK(ep.phi1.min_value() > 0.0);
    for (std::size_t k = 1; k < ep.quotient_trace.size(); ++k)
      CHECK(ep.quotient_trace[k] <= ep.quotient_trace[k - 1] * (1 + 1e-13));
    CHECK(rayleigh_quotient(K, ep.phi1) == doctest::Approx(ep.lambda1));
    // λ₁ is a minimum: random positive trials do not go below it.
    for (std::size_t k = 0; k < 20; ++k)
      CHECK(rayleigh_quotient(K, random_direction(m, 9, k)) >= ep.lambda1 * (1 - 1e-12));
    CHECK(rayleigh_quotient(K, 3.0 * ep.phi1) == doctest::Approx(ep.lambda1).epsilon(1e-12));
  }

  TEST_CASE("embedding constants") {
    const Mesh m = build_mesh(0.0, 1.0, 80);
    const auto K = build_kernel(m, 0.4, 2.0);
    const auto ep = principal_eigenpair(K);
    const auto Cp = embedding_constant(K, 2.0);
    CHECK(Cp.value <= 1.0 / ep.lambda1 * (1 + 1e-9));
    CHECK(Cp.value == doctest::Approx(1.0 / ep.lambda1).epsilon(1e-8));
    for (double beta : {0.5, 4.0}) {
      const auto C = embedding_constant(K, beta);
      CHECK(C.value > 0.0);
      CHECK(seminorm(K, C.maximizer) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(integral_abs_pow(C.maximizer, beta) == doctest::Approx(C.value).epsilon(1e-12));
      auto trial = [&](const DiscreteFunction& u) { return integral_abs_pow(u, beta) / std::pow(seminorm(K, u), beta); };
      CHECK(trial(ep.phi1) <= C.value * (1 + 1e-12));
      for (std::size_t k = 0; k < 30; ++k) CHECK(trial(random_direction(m, 5, k)) <= C.value * (1 + 1e-12));
    }
    CHECK_THROWS_AS(embedding_constant(K, 0.0), Error);
    CHECK_THROWS_AS(embedding_constant(K, 11.0), Error);
  }

  TEST_CASE("Sobolev constant") {
    const auto K = build_kernel(build_mesh(0, 1, 40), 0.4, 2.0);
    const auto S = sobolev_constant(K);
    CHECK(S.value > 0.0);
    CHECK(norm_lp(S.minimizer, 10.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(seminorm_p(K, S.minimizer) == doctest::Approx(S.value).epsilon(1e-10));
    const Mesh& m = K.mesh();
    for (std::size_t k = 0; k < 20; ++k) {
      const auto u = random_direction(m, 2, k);
      CHECK(seminorm_p(K, u) / std::pow(norm_lp(u, 10.0), 2.0) >= S.value * (1 - 1e-12));
    }
  }
}
