#include "doctest.h"

#include "valforge/errors.hpp"
#include "valforge/kernels.hpp"

#include <cmath>
#include <random>

using namespace valforge;

namespace {

Vec random_unit(std::mt19937& rng, int n) {
  std::normal_distribution<double> gauss;
  Vec x(n);
  for (int k = 0; k < n; ++k) x(k) = gauss(rng);
  return x.normalized();
}

Kernel inner_product_kernel() {
  return {3, 2, [](std::span<const Vec> x) { return x[0].dot(x[1]); }, 1};
}

// A band-limited kernel of degree 3 in each variable that is not separable.
Kernel mixed_kernel() {
  return {3, 2,
          [](std::span<const Vec> x) {
            const double d = x[0].dot(x[1]);
            return 0.5 + d * d * d - 0.3 * x[0](2) * x[1](0) * x[1](1) + 0.2 * x[0](0) * x[0](0);
          },
          3};
}

}  // namespace

TEST_CASE("inner product kernel has three terms") {
  const TensorDecomposition d = decompose_kernel(inner_product_kernel(), 2);
  REQUIRE(d.terms.size() == 3);
  for (const auto& t : d.terms) {
    CHECK(t.coefficient == doctest::Approx(4.0 * M_PI / 3.0));
    CHECK(t.members[0] == t.members[1]);
  }
  CHECK(d.residual < 1e-12);

  const int l[] = {0, 0};
  const NormLedger ledger = norm_bound_report(d, l);
  CHECK(ledger.partial_sums.size() == 3);
  CHECK(ledger.monotone);
  CHECK(ledger.partial_sums.back() <= 3.0 + 1e-9);
  // Each term is (4 pi / 3) Y(x) Y(y) = u.x u.y for a unit u: grid max is ~1.
  CHECK(ledger.partial_sums.back() > 2.9);
}

TEST_CASE("band-limited kernels are reproduced") {
  const Kernel k = mixed_kernel();
  const TensorDecomposition d = decompose_kernel(k, 3);
  std::mt19937 rng(1);
  double err = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Vec x[] = {random_unit(rng, 3), random_unit(rng, 3)};
    err = std::max(err, std::abs(reconstruct(d, x) - k(x)));
  }
  CHECK(err < 1e-9);
  CHECK(d.terms.size() <= 16 * 16);
  for (std::size_t i = 1; i < d.terms.size(); ++i)
    CHECK(std::abs(d.terms[i - 1].coefficient) >= std::abs(d.terms[i].coefficient));

  const int l[] = {2, 1};
  const NormLedger ledger = norm_bound_report(d, l);
  CHECK(ledger.monotone);
  CHECK(ledger.tail_ratio < 1e-3);

  // Too small a degree cannot reproduce it.
  CHECK_THROWS_AS(decompose_kernel(k, 2), ReconstructionFailure);
  DecomposeOptions loose;
  loose.strict = false;
  CHECK(decompose_kernel(k, 2, loose).residual > 1e-3);
}

TEST_CASE("separable and zero kernels") {
  const auto dict = HarmonicDictionary::get(3, 2);
  const SphericalFunction f = add_constant(dict->member(4), 1.0);
  const SphericalFunction g = add_constant(dict->member(2), 2.0);
  const Kernel k{3, 2, [&](std::span<const Vec> x) { return f(x[0]) * g(x[1]); }, 2};
  const TensorDecomposition d = decompose_kernel(k, 2);
  const TensorDecomposition s = separable_decomposition({f, g});
  CHECK(s.terms.size() == 1);
  std::mt19937 rng(2);
  for (int t = 0; t < 100; ++t) {
    const Vec x[] = {random_unit(rng, 3), random_unit(rng, 3)};
    CHECK(std::abs(reconstruct(d, x) - k(x)) < 1e-10);
    CHECK(std::abs(reconstruct(s, x) - k(x)) < 1e-14);
  }
  const int l[] = {1, 1};
  const NormLedger one = norm_bound_report(s, l);
  REQUIRE(one.partial_sums.size() == 1);
  CHECK(one.partial_sums[0] == doctest::Approx(grid_c_norm(f, 1) * grid_c_norm(g, 1)));

  const Kernel zero{3, 2, [](std::span<const Vec>) { return 0.0; }, 0};
  const TensorDecomposition z = decompose_kernel(zero, 3);
  CHECK(z.terms.empty());
  const Vec x[] = {Vec::Unit(3, 0), Vec::Unit(3, 1)};
  CHECK(reconstruct(z, x) == 0.0);
  CHECK_THROWS_AS(reconstruct(z, std::span(x, 1)), InvalidArgument);
}

TEST_CASE("decomposition is linear and order independent") {
  const TensorDecomposition a = decompose_kernel(inner_product_kernel(), 3);
  const TensorDecomposition b = decompose_kernel(mixed_kernel(), 3);
  const TensorDecomposition parts[] = {a, b};
  const double w[] = {2.0, -0.5};
  const TensorDecomposition c = combine(parts, w);
  const Kernel lin{3, 2,
                   [&](std::span<const Vec> x) { return 2.0 * inner_product_kernel()(x) - 0.5 * mixed_kernel()(x); },
                   3};
  const TensorDecomposition direct = decompose_kernel(lin, 3);
  TensorDecomposition reversed = b;
  std::reverse(reversed.terms.begin(), reversed.terms.end());
  std::mt19937 rng(3);
  for (int t = 0; t < 100; ++t) {
    const Vec x[] = {random_unit(rng, 3), random_unit(rng, 3)};
    CHECK(std::abs(reconstruct(c, x) - lin(x)) < 1e-9);
    CHECK(std::abs(reconstruct(direct, x) - reconstruct(c, x)) < 1e-9);
    CHECK(std::abs(reconstruct(reversed, x) - reconstruct(b, x)) < 1e-12);
  }
  const Kernel view = as_kernel(c);
  CHECK(view.band_limit == 3);
}

TEST_CASE("harmonic tables") {
  const TensorDecomposition t = decomposition_from_table(3, 2, {{{"1:0", "1:0"}, 2.0}, {{"0:0", "2:1"}, -1.0}});
  CHECK(t.terms.size() == 2);
  CHECK(t.terms[0].coefficient == 2.0);
  const auto dict = HarmonicDictionary::get(3, 2);
  const Vec x[] = {Vec::Unit(3, 0), Vec::Unit(3, 2)};
  const double expect = 2.0 * dict->member(1)(x[0]) * dict->member(1)(x[1]) -
                        dict->member(0)(x[0]) * dict->member(dict->index_of("2:1"))(x[1]);
  CHECK(reconstruct(t, x) == doctest::Approx(expect));
  CHECK_THROWS_AS(decomposition_from_table(3, 2, {{{"1:0"}, 1.0}}), InvalidArgument);
}

TEST_CASE("three-factor kernels on S^1") {
  const Kernel k{2, 3,
                 [](std::span<const Vec> x) { return x[0](0) * x[1](1) * x[2](0) + x[0].dot(x[2]) * x[1](0); },
                 1};
  const TensorDecomposition d = decompose_kernel(k, 2);
  CHECK(d.terms.size() <= 27);
  std::mt19937 rng(4);
  for (int t = 0; t < 50; ++t) {
    const Vec x[] = {random_unit(rng, 2), random_unit(rng, 2), random_unit(rng, 2)};
    CHECK(std::abs(reconstruct(d, x) - k(x)) < 1e-10);
  }
}
