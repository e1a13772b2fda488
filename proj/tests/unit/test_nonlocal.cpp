#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "../common/oracles.hpp"
#include "fplap/linalg.hpp"
#include "fplap/nonlocal.hpp"
#include "fplap/simd.hpp"

using namespace fplap;

namespace {

DiscreteFunction positive(const Mesh& m, std::uint64_t seed) { return DiscreteFunction(m, oracle::random_positive(m.size(), seed)); }

DiscreteFunction with(const DiscreteFunction& u, std::size_t i, double dv) {
  DiscreteFunction v = u;
  v[i] += dv;
  return v;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("fplap_test_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST_SUITE("nonlocal") {
  TEST_CASE("standing assumptions") {
    ProblemParams P;
    CHECK_NOTHROW(P.validate());
    P.s = 0.6;
    try {
      P.validate();
      FAIL("expected InvalidParams");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidParams);
      CHECK(std::string(e.what()).find("requires n > sp") != std::string::npos);
    }
    P = ProblemParams{};
    P.alpha = 0.5;
    CHECK_THROWS_AS(P.validate(), Error);
    P.alpha = 20.0;  // p* - 1 = 9 for s = 0.4, p = 2
    CHECK_THROWS_AS(P.validate(), Error);
    P = ProblemParams{};
    P.mode = Mode::PureSingular;
    P.q = 1.0;
    CHECK_THROWS_AS(P.validate(), Error);
    CHECK(ProblemParams{}.p_star() == doctest::Approx(10.0));
    CHECK_THROWS_AS(build_kernel(build_mesh(0, 1, 16), 0.5, 2.0), Error);
  }

  TEST_CASE("weights are symmetric and ζ matches exterior quadrature") {
    const Mesh m = build_mesh(-0.5, 1.5, 24);
    const auto K = build_kernel(m, 0.35, 2.5);
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(K.weight(i, i) == 0.0);
      for (std::size_t j = 0; j < m.size(); ++j) CHECK(K.weight(i, j) == K.weight(j, i));
      const double zq = oracle::zeta_quadrature(m.a(), m.b(), m.node(i), 0.35 * 2.5);
      CHECK(K.zeta()[i] == doctest::Approx(zq).epsilon(1e-9));
    }
  }

  TEST_CASE("seminorm against the brute-force double sum") {
    for (double p : {2.0, 2.5, 3.0}) {
      const Mesh m = build_mesh(0.0, 1.0, 40);
      const double s = 0.3;
      const auto K = build_kernel(m, s, p);
      const auto u = positive(m, 5);
      CHECK(seminorm_p(K, u) == doctest::Approx(oracle::seminorm_p(0.0, 1.0, s, p, u.vec())).epsilon(1e-12));
      // p-homogeneity and convexity
      CHECK(seminorm_p(K, -2.0 * u) == doctest::Approx(std::pow(2.0, p) * seminorm_p(K, u)).epsilon(1e-12));
      const auto v = positive(m, 6) - u;
      const auto mid = 0.5 * (u + v);
      CHECK(seminorm_p(K, mid) <= 0.5 * (seminorm_p(K, u) + seminorm_p(K, v)));
    }
  }

  TEST_CASE("operator is the gradient of the seminorm") {
    for (double p : {2.0, 3.0}) {
      const Mesh m = build_mesh(0.0, 1.0, 20);
      const auto K = build_kernel(m, 0.3, p);
      const auto u = positive(m, 11);
      const auto Au = apply_fplap(K, u);
      for (std::size_t i = 0; i < m.size(); i += 3) {
        const double fd = oracle::central([&](double e) { return seminorm_p(K, with(u, i, e)) / p; }, 0.0, 1e-5);
        CHECK(m.h() * Au[i] == doctest::Approx(fd).epsilon(1e-7));
      }
    }
  }

  TEST_CASE("Jacobian against finite differences of the operator") {
    const Mesh m = build_mesh(0.0, 1.0, 16);
    const auto K = build_kernel(m, 0.3, 3.0);
    const auto u = positive(m, 12);
    const Eigen::MatrixXd J = fplap_jacobian(K, u);
    for (std::size_t j = 0; j < m.size(); j += 5)
      for (std::size_t i = 0; i < m.size(); ++i) {
        const double fd = oracle::central([&](double e) { return apply_fplap(K, with(u, j, e))[i]; }, 0.0, 1e-6);
        CHECK(J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == doctest::Approx(fd).epsilon(1e-6));
      }
  }

  TEST_CASE("p = 2 operator is a nonsingular M-matrix") {
    const Mesh m = build_mesh(0.0, 1.0, 30);
    const auto K = build_kernel(m, 0.4, 2.0);
    const Eigen::MatrixXd J = fplap_jacobian(K, DiscreteFunction(m, 1.0));
    CHECK((J - oracle::linear_matrix(0.0, 1.0, 0.4, 30)).cwiseAbs().maxCoeff() <= 1e-10 * J.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < J.rows(); ++i) {
      double off = 0.0;
      for (Eigen::Index j = 0; j < J.cols(); ++j)
        if (i != j) {
          CHECK(J(i, j) <= 0.0);
          off += std::abs(J(i, j));
        }
      CHECK(J(i, i) > off);
    }
    const Eigen::MatrixXd inv = J.inverse();
    CHECK(inv.minCoeff() > 0.0);
  }

  TEST_CASE("continuum limit for p = 2 on the barrier profile") {
    // On (-1, 1), 2∫(w(x) - w(y))|x-y|^{-1-2s} dy for w = (1-x^2)_+^s equals the
    // constant 2^{1+2s} Γ(1+s) Γ(1/2+s) / (Γ(1/2) C_{1,s}).
    const double s = 0.25;
    const double C = s * std::pow(2.0, 2 * s) * std::tgamma(0.5 + s) / (std::sqrt(M_PI) * std::tgamma(1.0 - s));
    const double exact = 2.0 * std::pow(2.0, 2 * s) * std::tgamma(1 + s) * std::tgamma(0.5 + s) / std::sqrt(M_PI) / C;
    const Mesh m = build_mesh(-1.0, 1.0, 401);
    const auto K = build_kernel(m, s, 2.0);
    const auto w = DiscreteFunction::from_function(m, [s](double x) { return std::pow(1 - x * x, s); });
    const auto Aw = apply_fplap(K, w);
    CHECK(Aw[200] == doctest::Approx(exact).epsilon(0.05));
  }

  TEST_CASE("energy, gradient and Hessian") {
    for (double p : {2.0, 3.0})
      for (double q : {0.5, 1.0}) {
        ProblemParams P;
        P.p = p;
        P.s = 0.3;
        P.q = q;
        P.alpha = p + 1.0;
        P.lambda = 0.7;
        const Mesh m = build_mesh(0.0, 1.0, 16);
        const auto K = build_kernel(m, P.s, p);
        const auto u = positive(m, 21);
        const auto g = energy_gradient(K, P, u);
        const Eigen::MatrixXd H = energy_hessian(K, P, u);
        for (std::size_t i = 0; i < m.size(); i += 3) {
          const double fd = oracle::central([&](double e) { return energy(K, P, with(u, i, e)); }, 0.0, 1e-5);
          CHECK(m.h() * g[i] == doctest::Approx(fd).epsilon(1e-6));
          for (std::size_t j = 0; j < m.size(); j += 4) {
            const double fdh = oracle::central([&](double e) { return energy_gradient(K, P, with(u, j, e))[i]; }, 0.0, 1e-6);
            CHECK(H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == doctest::Approx(fdh).epsilon(1e-5));
          }
        }
        const Eigen::MatrixXd Hc = energy_hessian(K, P, u, HessianPart::Convex);
        CHECK(Eigen::LLT<Eigen::MatrixXd>(Hc).info() == Eigen::Success);
      }
  }

  TEST_CASE("energy error cases") {
    ProblemParams P;
    P.q = 1.0;
    const Mesh m = build_mesh(0.0, 1.0, 10);
    const auto K = build_kernel(m, P.s, P.p);
    DiscreteFunction u(m, 1.0);
    u[3] = 0.0;
    CHECK_THROWS_AS(energy(K, P, u), Error);
    CHECK_THROWS_AS(energy_gradient(K, P, u), Error);
    P.p = 3.0;
    CHECK_THROWS_AS(energy(K, P, DiscreteFunction(m, 1.0)), Error);
    P = ProblemParams{};
    P.mode = Mode::PureSingular;
    const auto v = DiscreteFunction(m, 1.0);
    CHECK(energy(K, P, v) == doctest::Approx(seminorm_p(K, v) / 2 - P.lambda * 10 * m.h() / 0.5));
  }

  TEST_CASE("SIMD dispatch does not change results") {
    const Mesh m = build_mesh(0.0, 1.0, 64);
    const auto K = build_kernel(m, 0.3, 3.0);
    const auto u = positive(m, 31);
    const auto before = simd::active_level();
    simd::set_active_level(simd::Level::Scalar);
    const double e0 = seminorm_p(K, u);
    const auto a0 = apply_fplap(K, u);
    simd::set_active_level(simd::detected_level());
    CHECK(seminorm_p(K, u) == doctest::Approx(e0).epsilon(1e-12));
    const auto a1 = apply_fplap(K, u);
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(a1[i] == doctest::Approx(a0[i]).epsilon(1e-12));
    simd::set_active_level(before);
  }

  TEST_CASE("kernel cache round trip and corruption") {
    const auto dir = temp_dir("cache");
    const Mesh m = build_mesh(0.0, 2.0, 12);
    const auto K = build_kernel(m, 0.3, 2.5);
    const auto file = dir / "k.bin";
    save_kernel_cache(K, file);
    const auto L = load_kernel_cache(file, m, 0.3, 2.5);
    CHECK(std::equal(K.weights().begin(), K.weights().end(), L.weights().begin()));
    CHECK(std::equal(K.zeta().begin(), K.zeta().end(), L.zeta().begin()));
    CHECK(load_kernel_cache(file).mesh() == m);
    auto code_of = [](auto&& f) {
      try {
        f();
      } catch (const Error& e) {
        return e.code();
      }
      return ErrorCode::Io;
    };
    CHECK(code_of([&] { load_kernel_cache(file, m, 0.3, 2.0); }) == ErrorCode::CacheFormat);
    CHECK(code_of([&] { load_kernel_cache(file, build_mesh(0.0, 2.0, 13), 0.3, 2.5); }) == ErrorCode::CacheFormat);
    {
      std::filesystem::resize_file(file, std::filesystem::file_size(file) - 8);
      CHECK(code_of([&] { load_kernel_cache(file); }) == ErrorCode::CacheFormat);
    }
    {
      std::ofstream(file, std::ios::binary) << "NOTAKERNEL.....";
      CHECK(code_of([&] { load_kernel_cache(file); }) == ErrorCode::CacheFormat);
    }
    const auto C1 = cached_kernel(dir, m, 0.3, 2.5);
    const auto C2 = cached_kernel(dir, m, 0.3, 2.5);
    CHECK(std::equal(C1.weights().begin(), C1.weights().end(), C2.weights().begin()));
    std::filesystem::remove_all(dir);
  }
}
