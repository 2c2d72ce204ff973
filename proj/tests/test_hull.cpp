#include "doctest.h"

#include "valforge/hull.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace valforge;

namespace {

std::vector<Vec> cube_vertices(int n, double side) {
  std::vector<Vec> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = (mask >> i) & 1 ? side : 0.0;
    out.push_back(v);
  }
  return out;
}

}  // namespace

TEST_CASE("cube and simplex volumes") {
  CHECK(convex_hull(cube_vertices(3, 1.0)).volume == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(convex_hull(cube_vertices(3, 2.0)).volume == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(convex_hull(cube_vertices(4, 1.0)).volume == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(convex_hull(cube_vertices(2, 3.0)).volume == doctest::Approx(9.0).epsilon(1e-14));
  std::vector<Vec> simplex{Vec::Zero(3), Vec::Unit(3, 0), Vec::Unit(3, 1), Vec::Unit(3, 2)};
  CHECK(convex_hull(simplex).volume == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("degenerate point clouds: lattice points of a box") {
  // Many coplanar and collinear points; only the 8 corners are extreme.
  std::vector<Vec> pts;
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; j <= 3; ++j)
      for (int k = 0; k <= 2; ++k) {
        Vec v(3);
        v << i * 0.5, j * 1.0, k * 0.25;
        pts.push_back(v);
        pts.push_back(v);  // duplicates
      }
  const HullResult h = convex_hull(pts);
  CHECK(h.volume == doctest::Approx(2.0 * 3.0 * 0.5).epsilon(1e-13));
  CHECK(h.vertices.size() == 8);
}

TEST_CASE("hull of points on a sphere approaches the ball volume") {
  std::mt19937 rng(1);
  std::normal_distribution<double> g;
  std::vector<Vec> pts;
  for (int i = 0; i < 20000; ++i) {
    Vec v(3);
    for (int k = 0; k < 3; ++k) v(k) = g(rng);
    pts.push_back(v.normalized());
  }
  const HullResult h = convex_hull(pts);
  CHECK(h.volume < 4.0 * std::numbers::pi / 3.0);
  CHECK(h.volume > 0.995 * 4.0 * std::numbers::pi / 3.0);
  CHECK(h.vertices.size() == pts.size());
  // Euler: a simplicial sphere with V vertices has 2V - 4 triangles.
  CHECK(h.facets.size() == 2 * pts.size() - 4);
}

TEST_CASE("lower-dimensional sets are flagged") {
  std::vector<Vec> seg{Vec::Zero(3), Vec::Unit(3, 0), 0.5 * Vec::Unit(3, 0)};
  const HullResult h = convex_hull(seg);
  CHECK_FALSE(h.full_dimensional);
  CHECK(h.volume == 0.0);
  CHECK(h.vertices.size() == 2);
  CHECK(affine_dimension(seg) == 1);
  std::vector<Vec> square = cube_vertices(2, 1.0);
  for (auto& v : square) v.conservativeResize(3), v(2) = 0.0;
  CHECK(affine_dimension(square) == 2);
}

TEST_CASE("Minkowski sums of boxes") {
  const auto c = cube_vertices(3, 1.0);
  const auto s = minkowski_sum_vertices(c, c);
  CHECK(s.size() == 8);
  CHECK(convex_hull(s).volume == doctest::Approx(8.0));
  // Sum of two orthogonal segments is a square (lower-dimensional).
  std::vector<Vec> a{Vec::Zero(3), Vec::Unit(3, 0)}, b{Vec::Zero(3), Vec::Unit(3, 1)};
  CHECK(minkowski_sum_vertices(a, b).size() == 4);
}

TEST_CASE("valuation property on boxes with convex union") {
  // P = [0,2]x[0,1]x[0,1], Q = [1,3]x[0,1]x[0,1]
  auto box = [](double x0, double x1) {
    std::vector<Vec> v;
    for (int mask = 0; mask < 8; ++mask) {
      Vec p(3);
      p << ((mask & 1) ? x1 : x0), ((mask & 2) ? 1.0 : 0.0), ((mask & 4) ? 1.0 : 0.0);
      v.push_back(p);
    }
    return v;
  };
  const double vp = convex_hull(box(0, 2)).volume, vq = convex_hull(box(1, 3)).volume;
  const double vu = convex_hull(box(0, 3)).volume, vi = convex_hull(box(1, 2)).volume;
  CHECK(std::abs(vu + vi - vp - vq) < 1e-10);
}
