#include "doctest.h"

#include "../common/oracles.hpp"
#include "fplap/linalg.hpp"
#include "fplap/ordermethod.hpp"

using namespace fplap;

namespace {

struct Setup {
  ProblemParams P;
  Mesh mesh;
  KernelWeights K;
  EigenPair eig;
  Setup(double s, double p, std::size_t n, double lambda)
      : P{s, p, 0.5, 3.0, lambda, Mode::Full},
        mesh(build_mesh(0.0, 1.0, n)),
        K(build_kernel(mesh, s, p)),
        eig(principal_eigenpair(K)) {}
};

}  // namespace

TEST_SUITE("ordermethod") {
  TEST_CASE("sub-solution construction") {
    Setup S(0.4, 2.0, 64, 1.0);
    double prev = 0.0;
    for (double lam : {0.5, 1.0, 2.0, 4.0}) {
      const auto sub = build_subsolution(S.K, S.P.with_lambda(lam), S.eig);
      CHECK(sub.t >= prev);
      prev = sub.t;
      CHECK(sub.verified);
      const auto g = energy_gradient(S.K, S.P.with_lambda(lam), sub.u);
      for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] <= 1e-10);
    }
    const auto sub = build_subsolution(S.K, S.P, S.eig);
    const auto capped = build_subsolution(S.K, S.P, S.eig, sub.u);
    CHECK(capped.t == doctest::Approx(0.99 * sub.t));
    for (std::size_t i = 0; i < sub.u.size(); ++i) CHECK(capped.u[i] <= sub.u[i]);
    CHECK_THROWS_AS(build_subsolution(S.K, S.P.with_lambda(0.0), S.eig), Error);
  }

  TEST_CASE("inner solve") {
    const Mesh m = build_mesh(0.0, 1.0, 60);
    const auto K2 = build_kernel(m, 0.4, 2.0);
    CHECK(inner_solve(K2, DiscreteFunction(m)).is_zero());
    const DiscreteFunction f(m, oracle::random_positive(m.size(), 3, -1.0, 1.0));
    const auto u = inner_solve(K2, f);
    const Eigen::VectorXd ref = oracle::linear_matrix(0, 1, 0.4, 60).partialPivLu().solve(to_eigen(f));
    for (std::size_t i = 0; i < m.size(); ++i)
      CHECK(u[i] == doctest::Approx(ref(static_cast<Eigen::Index>(i))).epsilon(1e-12));
    // maximum principle and order preservation
    const DiscreteFunction fp(m, oracle::random_positive(m.size(), 4, 0.0, 1.0));
    const auto up = inner_solve(K2, fp);
    CHECK(up.min_value() >= 0.0);
    const auto ug = inner_solve(K2, fp + DiscreteFunction(m, oracle::random_positive(m.size(), 5, 0.0, 0.5)));
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(ug[i] >= up[i]);
    // p = 3: Au = f
    const auto K3 = build_kernel(m, 0.3, 3.0);
    const auto u3 = inner_solve(K3, f);
    const auto A3 = apply_fplap(K3, u3);
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(A3[i] == doctest::Approx(f[i]).epsilon(1e-9).scale(1.0));
  }

  TEST_CASE("monotone iteration") {
    for (auto [s, p, lam] : {std::tuple{0.4, 2.0, 3.0}, std::tuple{0.3, 3.0, 20.0}}) {
      CAPTURE(p);
      Setup S(s, p, 64, lam);
      const auto sub = build_subsolution(S.K, S.P, S.eig);
      const auto mr = monotone_iterate(S.K, S.P, S.eig, {sub.u, std::nullopt});
      CHECK(mr.solve.converged);
      CHECK(mr.solve.residual < 1e-6);
      CHECK(mr.max_order_violation <= 1e-12);
      for (std::size_t k = 1; k < mr.sup_trace.size(); ++k) CHECK(mr.sup_trace[k] >= mr.sup_trace[k - 1]);
      for (std::size_t i = 0; i < sub.u.size(); ++i) CHECK(mr.solve.u[i] >= sub.u[i]);
      // restarting at the limit returns immediately
      const auto again = monotone_iterate(S.K, S.P, S.eig, {mr.solve.u, mr.solve.u});
      CHECK(again.solve.iterations <= 1);
    }
  }

  TEST_CASE("box minimization agrees with the monotone limit") {
    Setup S(0.4, 2.0, 64, 3.0);
    const auto plus = minimize_plus(S.K, S.P, S.eig, S.eig.phi1);
    const auto sub = build_subsolution(S.K, S.P, S.eig, plus.u);
    const OrderInterval iv{sub.u, plus.u};
    const auto ic = check_interval(S.K, S.P, iv);
    CHECK(ic.valid);
    const auto mr = monotone_iterate(S.K, S.P, S.eig, iv);
    CHECK(mr.max_upper_excess <= 1e-12);
    const auto box = box_minimize(S.K, S.P, S.eig, iv);
    for (std::size_t i = 0; i < box.u.size(); ++i) CHECK(std::abs(box.u[i] - mr.solve.u[i]) < 1e-4);
    CHECK(box.energy <= energy(S.K, S.P, sub.u));
    CHECK(box.energy <= energy(S.K, S.P, plus.u) + 1e-12);
    // one more projected gradient step barely moves it
    const auto g = energy_gradient(S.K, S.P, box.u);
    const double step = 1e-3 / apply_fplap(S.K, box.u).sup_norm();
    for (std::size_t i = 0; i < box.u.size(); ++i) {
      const double moved = std::clamp(box.u[i] - step * g[i], sub.u[i], plus.u[i]);
      CHECK(std::abs(moved - box.u[i]) < 1e-10);
    }
    CHECK_THROWS_AS(box_minimize(S.K, S.P, S.eig, {sub.u, std::nullopt}), Error);
    CHECK_THROWS_AS(monotone_iterate(S.K, S.P, S.eig, {plus.u, sub.u}), Error);
  }

  TEST_CASE("pure-singular mode") {
    Setup S(0.4, 2.0, 64, 1.0);
    S.P.mode = Mode::PureSingular;
    const auto a = minimize_pure_singular(S.K, S.P, S.eig);
    const auto b = minimize_pure_singular(S.K, S.P.with_lambda(2.0), S.eig);
    CHECK(a.residual < 1e-10);
    CHECK(b.energy < a.energy);
    const double c = std::pow(2.0, 1.0 / (1.0 + S.P.q));
    for (std::size_t i = 0; i < a.u.size(); ++i) CHECK(std::abs(b.u[i] - c * a.u[i]) <= 1e-8);
    CHECK(verify_solution(S.K, S.P, S.eig, a.u).residual < 1e-6);
    S.P.mode = Mode::Full;
    CHECK_THROWS_AS(minimize_pure_singular(S.K, S.P, S.eig), Error);
  }

  TEST_CASE("lambda sweep on a coarse mesh") {
    Setup S(0.4, 2.0, 32, 1.0);
    std::vector<double> grid;
    for (int k = 0; k < 8; ++k) grid.push_back(2.0 * std::pow(2.0, k));
    SweepOptions so;
    so.bisection_steps = 8;
    const auto sr = lambda_sweep(S.K, S.P, S.eig, grid, so);
    CHECK(sr.has_transition);
    CHECK(sr.down_set);
    CHECK(std::isfinite(sr.lambda_hat));
    CHECK(sr.bracket_lo < sr.bracket_hi);
    const double L1 = estimate_Lambda1(S.K, S.P, 20, 1).value;
    CHECK(sr.lambda_hat >= L1 * (1 - 1e-6));
    for (const auto& e : sr.entries)
      if (e.succeeded) CHECK(e.residual < 1e-6);
    CHECK_THROWS_AS(lambda_sweep(S.K, S.P, S.eig, {2.0, 1.0}), Error);
  }
}
