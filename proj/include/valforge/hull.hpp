#pragma once

// Convex hulls in R^n (n >= 2) by quickhull with simplicial facets.

#include "valforge/sphere.hpp"

#include <span>
#include <vector>

namespace valforge {

struct HullResult {
  int dimension = 0;
  bool full_dimensional = false;
  double volume = 0.0;
  std::vector<std::size_t> vertices;                // indices into the input
  std::vector<std::vector<std::size_t>> facets;     // simplicial, outward oriented
};

HullResult convex_hull(std::span<const Vec> points);

/// Affine dimension of a point set (relative tolerance 1e-10).
int affine_dimension(std::span<const Vec> points);

/// Hull vertices of {a + b : a in A, b in B}.
std::vector<Vec> minkowski_sum_vertices(std::span<const Vec> a, std::span<const Vec> b);

}  // namespace valforge
