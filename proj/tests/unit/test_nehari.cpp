#include "doctest.h"

#include "fplap/nehari.hpp"

using namespace fplap;

namespace {

struct Setup {
  ProblemParams P;
  Mesh mesh;
  KernelWeights K;
  EigenPair eig;
  Setup(double s, double p, std::size_t n, double lambda_rel_phi1)
      : P{s, p, 0.5, 3.0, 0.1, Mode::Full},
        mesh(build_mesh(0.0, 1.0, n)),
        K(build_kernel(mesh, s, p)),
        eig(principal_eigenpair(K)) {
    P.lambda = lambda_rel_phi1 * lambda_bar(fiber_coeffs(K, P, eig.phi1));
  }
};

}  // namespace

TEST_SUITE("nehari") {
  TEST_CASE("projections") {
    Setup S(0.4, 2.0, 64, 0.5);
    const auto up = project_plus(S.K, S.P, S.eig.phi1);
    const auto um = project_minus(S.K, S.P, S.eig.phi1);
    CHECK(energy(S.K, S.P, up) < 0.0);
    CHECK(energy(S.K, S.P, um) > energy(S.K, S.P, up));
    const auto upp = project_plus(S.K, S.P, up);
    for (std::size_t i = 0; i < up.size(); ++i) CHECK(upp[i] == doctest::Approx(up[i]).epsilon(1e-10));
    const auto umm = project_minus(S.K, S.P, um);
    for (std::size_t i = 0; i < um.size(); ++i) CHECK(umm[i] == doctest::Approx(um[i]).epsilon(1e-10));
    for (const auto* v : {&up, &um}) {
      const auto c = fiber_coeffs(S.K, S.P, *v);
      CHECK(std::abs(evaluate_fiber(c, S.P.lambda, 1.0).d1) <= 1e-10 * std::max(1.0, c.P));
    }
    CHECK(classify(S.K, S.P, up) == NehariClass::Plus);
    CHECK(classify(S.K, S.P, um) == NehariClass::Minus);
    CHECK(classify(S.K, S.P, 0.5 * (up + um)) == NehariClass::None);
    // the minus branch stays away from the origin
    const double Ca = embedding_constant(S.K, S.P.alpha + 1.0).value;
    const double lower = std::pow((S.P.p - 1 + S.P.q) / ((S.P.alpha + S.P.q) * Ca), S.P.p / (S.P.alpha + 1 - S.P.p));
    for (std::size_t k = 0; k < 10; ++k) {
      const auto d = random_direction(S.mesh, 4, k);
      if (!(S.P.lambda < lambda_bar(fiber_coeffs(S.K, S.P, d)))) continue;
      CHECK(seminorm_p(S.K, project_minus(S.K, S.P, d)) >= lower * (1 - 1e-9));
    }
    auto big = S.P.with_lambda(3.0 * S.P.lambda);
    try {
      project_plus(S.K, big, S.eig.phi1);
      FAIL("expected NoTwoRoots");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoTwoRoots);
    }
  }

  TEST_CASE("two solutions on the Nehari branches") {
    for (auto [s, p] : {std::pair{0.4, 2.0}, std::pair{0.3, 3.0}}) {
      CAPTURE(p);
      Setup S(s, p, 64, 0.25);
      const auto u = minimize_plus(S.K, S.P, S.eig, S.eig.phi1);
      const auto v = minimize_minus(S.K, S.P, S.eig, S.eig.phi1);
      CHECK(u.converged);
      CHECK(v.converged);
      CHECK(u.residual <= 1e-8);
      CHECK(v.residual <= 1e-8);
      CHECK(u.energy < 0.0);
      CHECK(v.energy > u.energy);
      CHECK(u.nehari_class == NehariClass::Plus);
      CHECK(v.nehari_class == NehariClass::Minus);
      CHECK(seminorm(S.K, v.u - u.u) > 0.1 * seminorm(S.K, u.u));
      CHECK(u.lower_bound_ok);
      CHECK(v.lower_bound_ok);
      for (const auto* r : {&u, &v}) {
        const auto& tr = r->t_projection_trace;
        for (std::size_t k = 1; k < tr.size(); ++k) CHECK(tr[k].energy <= tr[k - 1].energy + 1e-12);
      }
      // norm bounds on the two branches
      const double Cq = embedding_constant(S.K, 1 - S.P.q).value;
      const double Ca = embedding_constant(S.K, S.P.alpha + 1).value;
      const double pq = S.P.p - 1 + S.P.q;
      const double ap = S.P.alpha + 1 - S.P.p;
      CHECK(u.seminorm <= std::pow(S.P.lambda * (S.P.alpha + S.P.q) * Cq / ap, 1 / pq));
      CHECK(v.seminorm >= std::pow(pq / ((S.P.alpha + S.P.q) * Ca), 1 / ap));
    }
  }

  TEST_CASE("minus branch rejects the critical exponent") {
    Setup S(0.4, 2.0, 32, 0.25);
    auto P = S.P;
    P.alpha = P.p_star() - 1.0;
    CHECK_THROWS_AS(minimize_minus(S.K, P, S.eig, S.eig.phi1), Error);
    P = S.P;
    P.mode = Mode::PureSingular;
    CHECK_THROWS_AS(minimize_plus(S.K, P, S.eig, S.eig.phi1), Error);
  }

  TEST_CASE("verification detects non-solutions") {
    Setup S(0.4, 2.0, 64, 0.25);
    const auto u = minimize_plus(S.K, S.P, S.eig, S.eig.phi1);
    const auto vr = verify_solution(S.K, S.P, S.eig, u.u, 1e-6, true);
    CHECK(vr.residual_ok);
    CHECK(vr.barrier_ok);
    CHECK(vr.refined);
    CHECK(vr.refinement_ok);
    CHECK(vr.refined_sup_norm == doctest::Approx(vr.sup_norm).epsilon(0.05));
    CHECK(vr.ok());
    auto bad = u.u;
    bad[20] *= 1.1;
    CHECK_FALSE(verify_solution(S.K, S.P, S.eig, bad, 1e-6).residual_ok);
    CHECK_THROWS_AS(verify_solution(S.K, S.P, S.eig, DiscreteFunction(S.mesh), 1e-6), Error);
    CHECK(barrier_eta(S.P, S.eig.lambda1) <= barrier_eta_literal(S.P));
  }

  TEST_CASE("Newton polish keeps a solution fixed") {
    Setup S(0.4, 2.0, 48, 0.25);
    const auto u = minimize_minus(S.K, S.P, S.eig, S.eig.phi1);
    const auto pr = newton_polish(S.K, S.P, u.u);
    for (std::size_t i = 0; i < u.u.size(); ++i) CHECK(pr.u[i] == doctest::Approx(u.u[i]).epsilon(1e-9));
  }
}
