#pragma once

// Convex bodies represented by their support functions.

#include "valforge/sphere.hpp"

#include "json.hpp"

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace valforge {

enum class BodyKind { ellipsoid, ball, perturbed_ball, polytope, minkowski_combination };

std::string to_string(BodyKind kind);

/// Smallest admissible eigenvalue of D^2 h for a smooth body.
inline constexpr double kConvexityThreshold = 1e-6;

class ConvexBody {
 public:
  BodyKind kind() const { return kind_; }
  int dimension() const { return n_; }
  const SphericalFunction& support() const { return support_; }
  double h(const Vec& x) const { return support_(x); }

  /// True when D^2 h exists everywhere (every kind except polytopes and
  /// Minkowski combinations involving one).
  bool is_smooth() const { return smooth_; }
  /// Polytopes whose vertices span less than R^n.
  bool lower_dimensional() const { return lower_dimensional_; }

  const Vec& center() const { return center_; }
  const Mat& matrix() const { return matrix_; }
  double radius() const { return radius_; }
  const std::map<std::string, double>& coeffs() const { return coeffs_; }
  const std::vector<Vec>& vertices() const { return vertices_; }
  const std::vector<std::pair<double, ConvexBody>>& terms() const { return terms_; }

  /// Boundary point with outer normal x: h(x) x + grad_S h(x).
  Vec support_point(const Vec& x) const;

 private:
  friend ConvexBody make_ellipsoid(const Mat&, const Vec&);
  friend ConvexBody make_ball(int, double, const Vec&);
  friend ConvexBody make_perturbed_ball(double, const std::map<std::string, double>&,
                                        const SphereGrid&, int, const Vec&);
  friend ConvexBody make_polytope(std::vector<Vec>);
  friend ConvexBody minkowski_support(std::span<const ConvexBody>, std::span<const double>);
  friend ConvexBody translate(const ConvexBody&, const Vec&);

  BodyKind kind_ = BodyKind::ball;
  int n_ = 0;
  SphericalFunction support_;
  bool smooth_ = true;
  bool lower_dimensional_ = false;
  Vec center_;
  Mat matrix_;
  double radius_ = 0.0;
  std::map<std::string, double> coeffs_;
  std::vector<Vec> vertices_;
  std::vector<std::pair<double, ConvexBody>> terms_;
};

/// Support function sqrt(<x, A x>) (+ <x, center>).
SphericalFunction ellipsoid_support(const Mat& a);

ConvexBody make_ellipsoid(const Mat& a, const Vec& center = Vec());
ConvexBody make_ball(int n, double radius, const Vec& center = Vec());

/// h = R + sum_key c_key Y_key with Y from the harmonic dictionary; keys are
/// "l:i". Throws ConvexityViolation unless min D^2 h >= kConvexityThreshold
/// on `grid`. `n` is only needed when `coeffs` is empty and the grid is
/// unrelated; by default it is taken from the grid.
ConvexBody make_perturbed_ball(double radius, const std::map<std::string, double>& coeffs,
                               const SphereGrid& grid, int n = 0, const Vec& center = Vec());

ConvexBody make_polytope(std::vector<Vec> vertices);

/// Body with support sum_i lambda_i h_i. Polytope inputs only yield a
/// polytope when every input is one.
ConvexBody minkowski_support(std::span<const ConvexBody> bodies, std::span<const double> lambdas);
ConvexBody scaled(const ConvexBody& body, double t);
ConvexBody translate(const ConvexBody& body, const Vec& v);

struct CurvatureSweep {
  double min_eigenvalue = 0.0;
  std::size_t node = 0;
};

/// Minimum eigenvalue of D^2 h over the grid nodes.
CurvatureSweep curvature_sweep(const SphericalFunction& h, const SphereGrid& grid);
double convexity_certificate(const ConvexBody& body, const SphereGrid& grid);

/// Vertices of the octahedron subdivided `level` times and pushed to S^2.
std::vector<Vec> geodesic_sphere(int level);
/// Polytope inscribed in the ball of the given radius (n = 3).
ConvexBody make_ball_polytope(int level, double radius = 1.0);

nlohmann::json body_to_json(const ConvexBody& body);
/// Parses the body schema; `n` is needed for kinds that do not carry it.
ConvexBody body_from_json(const nlohmann::json& j, int n);

}  // namespace valforge
