#include "doctest.h"

#include "valforge/errors.hpp"
#include "valforge/gw.hpp"

#include <cmath>
#include <numbers>

using namespace valforge;

namespace {

// 2 pi int_{-1}^{1} sqrt|t| psi(t) dt with t = s^2 and composite Simpson.
double zonal_ball_oracle() {
  const double top = std::sqrt(2.0 / 3.0);
  const int m = 20000;
  const double h = top / m;
  double sum = 0.0;
  for (int i = 0; i <= m; ++i) {
    const double s = i * h;
    const double g = 2.0 * s * s * cutoff_psi(s * s);
    sum += (i == 0 || i == m ? 1.0 : (i % 2 ? 4.0 : 2.0)) * g;
  }
  return 2.0 * std::numbers::pi * 2.0 * sum * h / 3.0;
}

Mat ellipsoid_matrix() {
  Mat a(3, 3);
  a << 2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.7;
  return a;
}

}  // namespace

TEST_CASE("cutoff and density") {
  CHECK(cutoff_psi(0.0) == 1.0);
  CHECK(cutoff_psi(0.3) == 1.0);
  CHECK(cutoff_psi(0.9) == 0.0);
  CHECK(cutoff_psi(-0.7) == 0.0);
  const double mid = cutoff_psi(0.5);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
  CHECK(cutoff_psi(-0.5) == mid);
  double prev = 1.0;
  for (int i = 0; i <= 100; ++i) {
    const double v = cutoff_psi(1.0 / 3.0 + i / 300.0);
    CHECK(v <= prev);
    prev = v;
  }
  CHECK_THROWS_AS(cutoff_psi(1.5), InvalidArgument);

  CHECK(counterexample_density(0.0, 3) == 0.0);
  CHECK(counterexample_density(0.7, 4) == 0.0);
  CHECK(counterexample_density(0.25, 3) == doctest::Approx(0.5));
  CHECK(counterexample_density(-0.25, 5) == doctest::Approx(0.5 / (1.0 - 0.0625)));
}

TEST_CASE("zonal test functions") {
  for (double eps : {1e-2, 1e-3, 0.06}) {
    const ZonalTestFunction phi = ZonalTestFunction::plateau(eps);
    CHECK(phi.support_begin() == doctest::Approx(eps / 2));
    CHECK(phi.support_end() <= 1.0 / 3.0);
    CHECK(phi(eps) == 1.0);
    CHECK(phi(2.5 * eps) == 1.0);
    CHECK(phi(4.0 * eps) == 1.0);
    CHECK(phi(0.4 * eps) == 0.0);
    CHECK(phi(0.34) == 0.0);
    const double lo = phi.support_begin(), hi = phi.support_end();
    for (int i = 1; i < 200; ++i) {
      const double t = lo + (hi - lo) * i / 200.0;
      const double v = phi(t);
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      // Finite differences in the natural scale of the transition.
      const double h = 1e-4 * eps;
      const double p1 = phi(t + h), m1 = phi(t - h), p2 = phi(t + 2 * h), m2 = phi(t - 2 * h);
      const double fd1 = (8 * (p1 - m1) - (p2 - m2)) / (12 * h);
      const double fd2 = (16 * (p1 + m1) - (p2 + m2) - 30 * v) / (12 * h * h);
      CHECK(std::abs(fd1 - phi.d1(t)) * eps < 1e-6);
      CHECK(std::abs(fd2 - phi.d2(t)) * eps * eps < 1e-6);
    }
  }
  CHECK_THROWS_AS(ZonalTestFunction::plateau(1.0 / 12.0), InvalidArgument);
  CHECK_THROWS_AS(ZonalTestFunction::plateau(0.0), InvalidArgument);
  CHECK_THROWS_AS(ZonalTestFunction(0.2, 0.1, 0.3, 0.4), InvalidArgument);
}

TEST_CASE("counterexample valuation") {
  const SphereGrid grid = counterexample_grid(3, 80);
  const ConvexBody ball = make_ball(3, 1.0);
  const double oracle = zonal_ball_oracle();
  CHECK(counterexample_valuation(ball, 1, 3, grid) == doctest::Approx(oracle).epsilon(1e-5));
  CHECK(counterexample_valuation(ball, 2, 3, grid) == doctest::Approx(oracle).epsilon(1e-5));

  const ConvexBody e = make_ellipsoid(ellipsoid_matrix());
  Vec shift(3);
  shift << 0.4, -1.0, 2.5;
  for (int k : {1, 2}) {
    const double base = counterexample_valuation(e, k, 3, grid);
    CHECK(std::abs(counterexample_valuation(translate(e, shift), k, 3, grid) - base) < 1e-7);
    for (double t : {0.5, 2.0})
      CHECK(counterexample_valuation(scaled(e, t), k, 3, grid) ==
            doctest::Approx(std::pow(t, k) * base).epsilon(1e-12));
  }
  CHECK_THROWS_AS(counterexample_valuation(ball, 3, 3, grid), InvalidArgument);
}

TEST_CASE("zonal Goodey-Weil evaluation") {
  CHECK(gw_zonal(ZonalTestFunction::zero(), 3) == 0.0);
  const ZonalTestFunction tests[] = {ZonalTestFunction::plateau(1e-2), ZonalTestFunction::plateau(0.05),
                                     ZonalTestFunction::plateau(3e-3), ZonalTestFunction(0.1, 0.15, 0.15, 0.3),
                                     ZonalTestFunction(0.02, 0.1, 0.2, 1.0 / 3.0)};
  for (const auto& phi : tests) {
    for (int n : {3, 4}) {
      const double gw = gw_zonal(phi, n);
      CHECK(std::abs(gw - gw_zonal_by_parts(phi, n)) <= 1e-7 * std::max(1.0, std::abs(gw)));
      const double sphere = gw_sphere_oracle(phi, n);
      CHECK(std::abs(gw - sphere) <= 1e-5 * std::max(1.0, std::abs(gw)));
    }
  }
  // The form with an unweighted (n-1) phi term is a different number.
  const ZonalTestFunction phi = ZonalTestFunction::plateau(1e-2);
  CHECK(std::abs(gw_zonal(phi, 3) - gw_zonal_by_parts_unweighted(phi, 3)) > 1e-3);

  CHECK_THROWS_AS(gw_zonal(ZonalTestFunction(0.1, 0.2, 0.3, 0.5), 3), InvalidArgument);
  CHECK_THROWS_AS(gw_zonal(ZonalTestFunction(-0.1, 0.0, 0.1, 0.2), 3), InvalidArgument);
  CHECK_THROWS_AS(gw_zonal(phi, 2), InvalidArgument);
}

TEST_CASE("singular moment diverges like eps^-1/2") {
  const DivergencePoint a = divergence_probe(1e-4, 3);
  CHECK(a.t_value >= 100.0);
  CHECK(a.pass);
  const DivergencePoint b = divergence_probe(1e-2, 3);
  CHECK(b.t_value >= 10.0);
  CHECK(b.pass);
  // phi_eps(t) = Phi(t / eps) below 1/24, so T sqrt(eps) is constant there.
  CHECK(a.t_value * 1e-2 == doctest::Approx(b.t_value * 1e-1).epsilon(1e-10));
  CHECK(a.gw < b.gw);

  const auto sweep = divergence_sweep(1e-2, 1e-5, 7, 3);
  REQUIRE(sweep.size() == 7);
  CHECK(sweep[1].eps == doctest::Approx(std::pow(10.0, -2.5)));
  for (const auto& p : sweep) CHECK(p.pass);
  CHECK(divergence_slope(sweep) == doctest::Approx(-0.5).epsilon(1e-8));
}

TEST_CASE("derivative along the ball direction") {
  const SphereGrid grid = counterexample_grid(3, 40);
  const ConvexBody ball = make_ball(3, 1.0);
  const ConvexBody e = make_ellipsoid(ellipsoid_matrix());
  for (const ConvexBody* body : {&ball, &e}) {
    const DerivativeReduction r = derivative_reduction(*body, 2, 3, grid);
    CHECK(r.residual_ok);
    // mu_2(K + tB) = mu_2(K) + 2 t mu_1(K) + t^2 mu_1(B), so the first derivative is 2 mu_1(K).
    CHECK(r.derivative == doctest::Approx(r.polarized).epsilon(1e-9));
    CHECK(r.derivative == doctest::Approx(2.0 * r.stated).epsilon(1e-9));
    CHECK(r.coefficients[2] == doctest::Approx(counterexample_valuation(ball, 1, 3, grid)).epsilon(1e-9));
  }
  const DerivativeReduction one = derivative_reduction(e, 1, 3, grid);
  CHECK(one.derivative == doctest::Approx(counterexample_valuation(e, 1, 3, grid)).epsilon(1e-12));
  CHECK(one.relative_error < 1e-12);
}
