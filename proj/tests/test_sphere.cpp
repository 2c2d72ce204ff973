#include "doctest.h"

#include "valforge/errors.hpp"
#include "valforge/harmonics.hpp"
#include "valforge/sphere.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace valforge;

namespace {

// Closed-form integral of x^a over S^{n-1}: zero unless every exponent is
// even, else 2 prod Gamma((a_i+1)/2) / Gamma((|a|+n)/2).
double monomial_integral(const std::vector<int>& a) {
  double num = 2.0;
  int total = 0;
  for (int e : a) {
    if (e % 2) return 0.0;
    num *= std::tgamma(0.5 * (e + 1));
    total += e;
  }
  return num / std::tgamma(0.5 * (total + static_cast<int>(a.size())));
}

Vec random_unit(std::mt19937& rng, int n) {
  std::normal_distribution<double> g;
  Vec x(n);
  for (int i = 0; i < n; ++i) x(i) = g(rng);
  return x.normalized();
}

Mat random_symmetric(std::mt19937& rng, int m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Mat a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = u(rng);
  return a;
}

SphericalFunction ellipsoid_support(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  return SphericalFunction(
      n, [a](const Vec& x) { return std::sqrt(x.dot(a * x)); },
      [a](const Vec& x) {
        const Vec ax = a * x;
        const double q = x.dot(ax);
        const double h = std::sqrt(q);
        return Jet{h, ax / h, (q * a - ax * ax.transpose()) / (q * h)};
      },
      Smoothness::closed_form);
}

}  // namespace

TEST_CASE("grid weights sum to the sphere area") {
  const SphereGrid g = build_grid(3, 20);
  double sum = 0.0;
  for (double w : g.weights) sum += w;
  CHECK(sum == doctest::Approx(4.0 * std::numbers::pi).epsilon(1e-12));
  CHECK(g.size() >= 800);
  for (const auto& x : g.nodes) CHECK(std::abs(x.norm() - 1.0) < 1e-12);
}

TEST_CASE("circle grid is equally spaced") {
  const SphereGrid g = build_grid(2, 10);
  double sum = 0.0;
  for (double w : g.weights) sum += w;
  CHECK(sum == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-12));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec& a = g.nodes[i];
    const Vec& b = g.nodes[(i + 1) % g.size()];
    CHECK(std::acos(std::clamp(a.dot(b), -1.0, 1.0)) ==
          doctest::Approx(2.0 * std::numbers::pi / g.size()).epsilon(1e-10));
  }
}

TEST_CASE("quadrature of x3^2 over S^2") {
  const SphereGrid g = build_grid(3, 20);
  const double q = g.integrate([](const Vec& x) { return x(2) * x(2); });
  CHECK(q == doctest::Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-12));
}

TEST_CASE("quadrature is exact up to the declared degree") {
  std::mt19937 rng(7);
  for (int n = 2; n <= 5; ++n) {
    const int degree = n <= 3 ? 12 : 8;
    const SphereGrid g = build_grid(n, degree);
    double area = 0.0;
    for (double w : g.weights) area += w;
    CHECK(area == doctest::Approx(sphere_area(n)).epsilon(1e-10));
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<int> a(n, 0);
      std::uniform_int_distribution<int> pick(0, n - 1);
      std::uniform_int_distribution<int> deg(0, degree);
      const int d = deg(rng);
      for (int k = 0; k < d; ++k) ++a[pick(rng)];
      const double q = g.integrate([&](const Vec& x) {
        double p = 1.0;
        for (int i = 0; i < n; ++i) p *= std::pow(x(i), a[i]);
        return p;
      });
      const double exact = monomial_integral(a);
      CHECK(std::abs(q - exact) <= 1e-10 * std::max(1.0, std::abs(exact)));
    }
  }
}

TEST_CASE("build_grid rejects bad arguments") {
  CHECK_THROWS_AS(build_grid(1, 10), InvalidArgument);
  CHECK_THROWS_AS(build_grid(3, 1), InvalidArgument);
}

TEST_CASE("tangent bases") {
  SUBCASE("x = e3") {
    const Mat v = tangent_basis(Vec::Unit(3, 2));
    CHECK((v.transpose() * v - Mat::Identity(2, 2)).norm() < 1e-15);
    CHECK(std::abs(std::abs(v(0, 0)) - 1.0) < 1e-15);
    CHECK(std::abs(std::abs(v(1, 1)) - 1.0) < 1e-15);
  }
  SUBCASE("x = e1") {
    const Vec x = Vec::Unit(3, 0);
    const Mat v = tangent_basis(x);
    CHECK((v.transpose() * v - Mat::Identity(2, 2)).norm() < 1e-12);
    CHECK((v.transpose() * x).norm() < 1e-12);
  }
  SUBCASE("random x, deterministic") {
    std::mt19937 rng(3);
    for (int n = 2; n <= 5; ++n) {
      for (int t = 0; t < 50; ++t) {
        const Vec x = random_unit(rng, n);
        const Mat v = tangent_basis(x);
        CHECK((v.transpose() * v - Mat::Identity(n - 1, n - 1)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((v.transpose() * x).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((tangent_basis(x) - v).norm() == 0.0);
      }
    }
  }
}

TEST_CASE("restricted Hessian of the unit ball is the identity") {
  std::mt19937 rng(11);
  const auto one = SphericalFunction::constant(3, 1.0);
  const auto fd_one = SphericalFunction::from_values(3, [](const Vec&) { return 1.0; });
  for (int t = 0; t < 20; ++t) {
    const Vec x = random_unit(rng, 3);
    CHECK((restricted_hessian(one, x).matrix - Mat::Identity(2, 2)).norm() < 1e-14);
    CHECK((restricted_hessian(fd_one, x).matrix - Mat::Identity(2, 2)).norm() < 1e-7);
  }
}

TEST_CASE("restricted Hessian of an ellipsoid at a vertex") {
  Mat a = Mat::Zero(3, 3);
  a.diagonal() << 4.0, 1.0, 1.0;
  const auto h = ellipsoid_support(a);
  const Vec x = Vec::Unit(3, 0);
  const SymForm f = restricted_hessian(h, x);
  CHECK((f.matrix - 0.5 * Mat::Identity(2, 2)).norm() < 1e-14);
  // The tangent basis spans {e2, e3}.
  CHECK((f.basis.transpose() * x).norm() < 1e-14);
}

TEST_CASE("closed-form and finite-difference Hessians agree") {
  std::mt19937 rng(5);
  auto dict = HarmonicDictionary::get(3, 2);
  const auto y2 = dict->member(dict->index_of("2:1"));
  const auto fd = SphericalFunction::from_values(3, [y2](const Vec& x) { return y2(x); });
  Mat a(3, 3);
  a << 3.0, 0.4, -0.2, 0.4, 1.5, 0.3, -0.2, 0.3, 0.8;
  const auto e = ellipsoid_support(a);
  const auto efd = SphericalFunction::from_values(3, [e](const Vec& x) { return e(x); });
  for (int t = 0; t < 100; ++t) {
    const Vec x = random_unit(rng, 3);
    const Mat basis = tangent_basis(x);
    CHECK((restricted_hessian(y2, x, basis).matrix - restricted_hessian(fd, x, basis).matrix)
              .cwiseAbs()
              .maxCoeff() < 1e-6);
    CHECK((restricted_hessian(e, x, basis).matrix - restricted_hessian(efd, x, basis).matrix)
              .cwiseAbs()
              .maxCoeff() < 1e-6);
  }
}

TEST_CASE("finite-difference extension Hessian annihilates x") {
  std::mt19937 rng(9);
  auto dict = HarmonicDictionary::get(3, 3);
  const auto f = add_constant(dict->member(dict->index_of("3:2")), 2.0);
  for (int t = 0; t < 20; ++t) {
    const Vec x = random_unit(rng, 3);
    const Mat h = extension_hessian_fd(f, x);
    CHECK((h * x).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("asymmetric jets are reported") {
  const SphericalFunction bad(
      3, [](const Vec&) { return 1.0; },
      [](const Vec&) {
        Mat h = Mat::Zero(3, 3);
        h(0, 1) = 1.0;
        return Jet{1.0, Vec::Zero(3), h};
      },
      Smoothness::closed_form);
  CHECK_THROWS_AS(restricted_hessian(bad, Vec::Unit(3, 2)), NumericalFailure);
}

TEST_CASE("mixed discriminant examples") {
  const Mat id = Mat::Identity(2, 2);
  const Mat pair[] = {id, id};
  CHECK(mixed_discriminant(pair) == doctest::Approx(1.0));

  Mat a = Mat::Zero(2, 2), b = Mat::Zero(2, 2);
  a.diagonal() << 1.0, 2.0;
  b.diagonal() << 3.0, 4.0;
  // Polarization oracle: (det(A+B) - det A - det B) / 2.
  const double oracle = ((a + b).determinant() - a.determinant() - b.determinant()) / 2.0;
  CHECK(oracle == doctest::Approx(5.0));
  const Mat ab[] = {a, b};
  const Mat ba[] = {b, a};
  CHECK(mixed_discriminant(ab) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(mixed_discriminant(ab) == mixed_discriminant(ba));

  const Mat wrong[] = {a, Mat::Identity(3, 3)};
  CHECK_THROWS_AS(mixed_discriminant(wrong), InvalidArgument);
}

TEST_CASE("mixed discriminant is symmetric, multilinear and diagonal") {
  std::mt19937 rng(21);
  for (int m = 1; m <= 4; ++m) {
    for (int t = 0; t < 20; ++t) {
      std::vector<Mat> forms;
      for (int i = 0; i < m; ++i) forms.push_back(random_symmetric(rng, m));
      const double base = mixed_discriminant(forms);

      std::vector<Mat> perm = forms;
      std::shuffle(perm.begin(), perm.end(), rng);
      CHECK(mixed_discriminant(perm) == base);

      const Mat extra = random_symmetric(rng, m);
      std::vector<Mat> summed = forms, other = forms;
      summed[0] += extra;
      other[0] = extra;
      CHECK(std::abs(mixed_discriminant(summed) - base - mixed_discriminant(other)) < 1e-10);

      const Mat a = random_symmetric(rng, m);
      std::vector<Mat> diag(m, a);
      CHECK(std::abs(mixed_discriminant(diag) - a.determinant()) < 1e-10);
    }
  }
}

TEST_CASE("linear functions have zero restricted Hessian") {
  Vec v(3);
  v << 0.3, -1.2, 0.7;
  const auto f = SphericalFunction::linear(v);
  std::mt19937 rng(2);
  for (int t = 0; t < 10; ++t) {
    const Vec x = random_unit(rng, 3);
    CHECK(restricted_hessian(f, x).matrix.norm() < 1e-15);
  }
}
