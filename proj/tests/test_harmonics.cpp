#include "doctest.h"

#include "valforge/errors.hpp"
#include "valforge/harmonics.hpp"

#include <cmath>
#include <random>

using namespace valforge;

TEST_CASE("dictionary sizes match harmonic dimensions") {
  CHECK(harmonic_space_dimension(3, 0) == 1);
  CHECK(harmonic_space_dimension(3, 4) == 9);
  CHECK(harmonic_space_dimension(2, 5) == 2);
  CHECK(harmonic_space_dimension(4, 2) == 9);
  auto d3 = HarmonicDictionary::get(3, 5);
  CHECK(d3->count_up_to(5) == 36);
  auto d2 = HarmonicDictionary::get(2, 4);
  CHECK(d2->count_up_to(4) == 9);
}

TEST_CASE("dictionary is orthonormal") {
  for (int n = 2; n <= 4; ++n) {
    const int l = n == 4 ? 3 : 5;
    auto d = HarmonicDictionary::get(n, l);
    const std::size_t count = d->count_up_to(l);
    const SphereGrid g = build_grid(n, 2 * l + 4);
    Mat gram = Mat::Zero(count, count);
    for (std::size_t q = 0; q < g.size(); ++q) {
      const Vec y = d->values(g.nodes[q], count);
      gram += g.weights[q] * y * y.transpose();
    }
    CHECK((gram - Mat::Identity(count, count)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("members are Laplace eigenfunctions with the right parity") {
  // tr D^2 Y = Delta_S Y + (n-1) Y = (n-1 - l(l+n-2)) Y.
  std::mt19937 rng(4);
  std::normal_distribution<double> gauss;
  for (int n = 2; n <= 4; ++n) {
    auto d = HarmonicDictionary::get(n, 4);
    for (std::size_t i = 0; i < d->count_up_to(4); ++i) {
      const auto y = d->member(i);
      const int l = d->degree_of(i);
      Vec x(n);
      for (int k = 0; k < n; ++k) x(k) = gauss(rng);
      x.normalize();
      const double trace = restricted_hessian(y, x).matrix.trace();
      CHECK(std::abs(trace - (n - 1 - l * (l + n - 2)) * y(x)) < 1e-9);
      CHECK(std::abs(y(-x) - ((l % 2) ? -1.0 : 1.0) * y(x)) < 1e-12);
    }
  }
}

TEST_CASE("keys round-trip and reject garbage") {
  auto d = HarmonicDictionary::get(3, 3);
  for (std::size_t i = 0; i < d->count_up_to(3); ++i) CHECK(d->index_of(d->key(i)) == i);
  CHECK(d->key(0) == "0:0");
  CHECK(d->key(1) == "1:0");
  CHECK_THROWS_AS(d->index_of("1:3"), InvalidArgument);
  CHECK_THROWS_AS(d->index_of("banana"), InvalidArgument);
}

TEST_CASE("projection reproduces band-limited functions") {
  auto d = HarmonicDictionary::get(3, 4);
  const SphereGrid g = build_grid(3, 12);
  auto f = [](const Vec& x) { return 1.0 + x(0) * x(1) - 0.3 * x(2) * x(2) * x(2) + 0.1 * x(0); };
  const Vec beta = d->project(f, 4, g);
  const auto rec = d->function(beta);
  std::mt19937 rng(8);
  std::normal_distribution<double> gauss;
  for (int t = 0; t < 50; ++t) {
    Vec x(3);
    for (int k = 0; k < 3; ++k) x(k) = gauss(rng);
    x.normalize();
    CHECK(std::abs(rec(x) - f(x)) < 1e-12);
  }
}

TEST_CASE("larger dictionaries extend smaller ones") {
  auto small = HarmonicDictionary::get(3, 2);
  auto large = HarmonicDictionary::get(3, small->max_degree() + 3);
  Vec x(3);
  x << 0.2, -0.5, 0.7;
  x.normalize();
  const std::size_t count = small->count_up_to(2);
  CHECK((small->values(x, count) - large->values(x, count)).norm() == 0.0);
}

TEST_CASE("polynomial jet matches its value") {
  auto d = HarmonicDictionary::get(3, 3);
  Vec beta(d->count_up_to(3));
  for (Eigen::Index i = 0; i < beta.size(); ++i) beta(i) = std::sin(1.0 + i);
  const auto p = d->polynomial(beta);
  Vec x(3);
  x << 0.3, 0.1, -0.4;  // off-sphere: the polynomial is an ambient function
  const Jet j = p.jet(x);
  CHECK(j.value == doctest::Approx(p(x)).epsilon(1e-14));
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    const Vec e = Vec::Unit(3, i);
    CHECK(std::abs((p(x + h * e) - p(x - h * e)) / (2 * h) - j.gradient(i)) < 1e-7);
    const Jet jp = p.jet(x + h * e), jm = p.jet(x - h * e);
    CHECK(((jp.gradient - jm.gradient) / (2 * h) - j.hessian.col(i)).cwiseAbs().maxCoeff() < 1e-6);
  }
}
