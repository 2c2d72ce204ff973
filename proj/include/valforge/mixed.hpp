#pragma once

// Mixed area densities, mixed volumes and Steiner polynomials.

#include "valforge/bodies.hpp"

#include <string>
#include <vector>

namespace valforge {

struct MixedAreaDensity {
  SphereGrid grid;
  std::vector<double> values;
  int k = 0;
  std::vector<std::string> signature;  // K, then the other bodies, as kind names

  double mass() const { return grid.integrate(values); }
};

/// Node-wise D_{n-1}(D^2 h_K [k], D^2 h_{L_2}, ...). `others` holds n-k-1 smooth bodies.
MixedAreaDensity mixed_area_density(const ConvexBody& k_body, int k,
                                    std::span<const ConvexBody> others, const SphereGrid& grid);

/// V(K[k], L1, others...) = (1/n) int h_{L1} dS(K[k], others...).
double mixed_volume_smooth(const ConvexBody& l1, const ConvexBody& k_body, int k,
                           std::span<const ConvexBody> others, const SphereGrid& grid);

/// Volume of the hull of the vertices; 0 (and the flag set) if lower dimensional.
double polytope_volume(const ConvexBody& p, bool* lower_dimensional = nullptr);

struct PolynomialRouteOptions {
  int level = 5;            // direction mesh refinement for non-polytope bodies
  bool extrapolate = true;  // Richardson step between level-1 and level
};

/// Unit directions used to sample support points: geodesic sphere for n = 3,
/// equispaced circle for n = 2, product grid nodes otherwise.
std::vector<Vec> direction_mesh(int n, int level);

/// Mixed volume from the volume polynomial of sum lambda_i K_i on {0..n}^n.
/// All-polytope input uses hulls of vertex sums; anything else uses hulls of
/// summed support points on a direction mesh.
double polytope_mixed_volume(std::span<const ConvexBody> bodies,
                             const PolynomialRouteOptions& opts = {});

struct SteinerPolynomial {
  std::vector<double> coefficients;  // t^0 .. t^n of vol(K + tB)
  double residual = 0.0;
  bool residual_ok = true;
};

/// Smooth bodies: assembled from mixed_volume_smooth; polytopes: hull volumes
/// of K + t B_approx at t = 0..n+1 and a least-squares fit.
SteinerPolynomial steiner_coefficients(const ConvexBody& k_body, const SphereGrid& grid,
                                       const PolynomialRouteOptions& opts = {});

struct SteinerRow {
  std::string body_id;
  std::vector<double> coefficients;
};

/// Columns: body-id, j, coefficient.
std::string steiner_csv(std::span<const SteinerRow> rows);

}  // namespace valforge
