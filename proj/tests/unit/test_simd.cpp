#include <stdexcept>
#include <random>
#include <vector>

#include "doctest.h"

#include "fplap/simd.hpp"
#include "simd/kernels_internal.hpp"

using namespace fplap::simd;

namespace {

struct Row {
  std::vector<double> w, u;
  double ui;
};

Row make_row(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 2.0);
  Row r;
  r.w.resize(n);
  r.u.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    r.w[j] = std::abs(d(rng)) + 0.01;
    r.u[j] = d(rng);
  }
  r.ui = r.u[n / 2];  // includes an exact zero difference
  return r;
}

void compare(const RowKernels& a, const RowKernels& b, double p, std::size_t n) {
  const Row r = make_row(n, 17 + n);
  CAPTURE(p);
  CAPTURE(n);
  const double fa = a.flux(r.w.data(), r.u.data(), r.ui, n, p);
  const double fb = b.flux(r.w.data(), r.u.data(), r.ui, n, p);
  CHECK(fb == doctest::Approx(fa).epsilon(1e-12));
  const double ea = a.energy(r.w.data(), r.u.data(), r.ui, n, p);
  const double eb = b.energy(r.w.data(), r.u.data(), r.ui, n, p);
  CHECK(eb == doctest::Approx(ea).epsilon(1e-12));
  std::vector<double> oa(n), ob(n);
  const double ja = a.jacobian(r.w.data(), r.u.data(), r.ui, n, p, oa.data());
  const double jb = b.jacobian(r.w.data(), r.u.data(), r.ui, n, p, ob.data());
  CHECK(jb == doctest::Approx(ja).epsilon(1e-12));
  for (std::size_t j = 0; j < n; ++j) CHECK(ob[j] == doctest::Approx(oa[j]).epsilon(1e-12));
}

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("scalar kernels match the defining sums") {
    const Row r = make_row(37, 3);
    const double p = 2.7;
    double flux = 0, energy = 0;
    for (std::size_t j = 0; j < r.w.size(); ++j) {
      const double d = r.ui - r.u[j];
      flux += r.w[j] * std::pow(std::abs(d), p - 2.0) * d;
      energy += r.w[j] * std::pow(std::abs(d), p);
    }
    const auto& k = kernels(Level::Scalar);
    CHECK(k.flux(r.w.data(), r.u.data(), r.ui, 37, p) == doctest::Approx(flux).epsilon(1e-14));
    CHECK(k.energy(r.w.data(), r.u.data(), r.ui, 37, p) == doctest::Approx(energy).epsilon(1e-14));
  }

  TEST_CASE("vector variants agree with the scalar reference") {
    const auto& ref = kernels(Level::Scalar);
    for (Level lv : {Level::Avx2, Level::Neon}) {
      if (!supported(lv)) continue;
      CAPTURE(to_string(lv));
      for (double p : {2.0, 2.5, 3.0, 4.0, 5.0})
        for (std::size_t n : {1u, 3u, 4u, 5u, 8u, 31u, 160u}) compare(ref, kernels(lv), p, n);
    }
  }

  TEST_CASE("dispatch") {
    CHECK(supported(Level::Scalar));
    CHECK(supported(detected_level()));
    const Level before = active_level();
    set_active_level(Level::Scalar);
    CHECK(active_level() == Level::Scalar);
    CHECK(&kernels() == &kernels(Level::Scalar));
    set_active_level(before);
    for (Level lv : {Level::Avx2, Level::Neon})
      if (!supported(lv)) CHECK_THROWS_AS(set_active_level(lv), std::invalid_argument);
  }

  TEST_CASE("integer exponent detection") {
    int k = 0;
    CHECK(detail::integer_exponent(3.0, k));
    CHECK(k == 3);
    CHECK_FALSE(detail::integer_exponent(2.5, k));
    CHECK_FALSE(detail::integer_exponent(17.0, k));
    CHECK(detail::ipow(-1.5, 3) == doctest::Approx(-3.375));
  }
}
