#pragma once

// Quadrature on S^{n-1}, tangent frames, restricted Hessians of 1-homogeneous
// extensions, and mixed discriminants of symmetric forms.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace valforge {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Surface area of the unit sphere S^{n-1} in R^n.
double sphere_area(int n);

/// Product quadrature rule on S^{n-1}.
///
/// Built recursively: the last coordinate t is sampled with a Gauss rule for
/// the slice weight (1 - t^2)^{(n-3)/2} (plain Gauss-Legendre for n = 3) and
/// each slice carries a rule on S^{n-2}; the circle uses equally spaced
/// angles. Exact for polynomials of total degree <= `degree`.
struct SphereGrid {
  int n = 0;
  int degree = 0;
  std::vector<Vec> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  /// Quadrature of node-sampled values.
  double integrate(std::span<const double> values) const;
  double integrate(const std::function<double(const Vec&)>& f) const;
};

SphereGrid build_grid(int n, int degree);

/// Gauss nodes/weights on [-1, 1] for the weight (1 - t^2)^a, a >= 0.
void gauss_gegenbauer(int count, double a, std::vector<double>& nodes, std::vector<double>& weights);

/// Orthonormal basis of x^perp as the columns of an n x (n-1) matrix.
/// Deterministic: the first n-1 columns of the Householder reflection that
/// maps e_n to x.
Mat tangent_basis(const Vec& x);

/// Value, gradient and Hessian of some smooth extension P of a spherical
/// function to a neighbourhood of the sphere. Any extension works: the
/// restricted Hessian only depends on P through P|_S.
struct Jet {
  double value = 0.0;
  Vec gradient;
  Mat hessian;
};

enum class Smoothness { closed_form, spectral, finite_difference };

/// Scalar field on S^{n-1}. Carries an evaluator and, unless it is a
/// finite-difference function, an ambient jet evaluator from which the
/// restricted Hessian D^2 f of the 1-homogeneous extension is derived.
class SphericalFunction {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using JetFn = std::function<Jet(const Vec&)>;

  SphericalFunction() = default;
  SphericalFunction(int n, ValueFn value, JetFn jet, Smoothness tag);

  static SphericalFunction from_values(int n, ValueFn value);
  static SphericalFunction constant(int n, double c);
  /// x -> <x, v>; the support function of the point v.
  static SphericalFunction linear(const Vec& v);

  int dimension() const { return n_; }
  Smoothness smoothness() const { return tag_; }
  bool has_jet() const { return static_cast<bool>(jet_); }

  double operator()(const Vec& x) const { return value_(x); }
  Jet jet(const Vec& x) const;

 private:
  int n_ = 0;
  ValueFn value_;
  JetFn jet_;
  Smoothness tag_ = Smoothness::finite_difference;
};

/// sum_i coeffs[i] * fs[i]; keeps closed-form jets when every input has one.
SphericalFunction linear_combination(std::span<const double> coeffs,
                                     std::span<const SphericalFunction> fs);
SphericalFunction add(const SphericalFunction& f, const SphericalFunction& g);
SphericalFunction scale(const SphericalFunction& f, double s);
SphericalFunction add_constant(const SphericalFunction& f, double c);
/// x -> (f(x) + sign * f(-x)) / 2
SphericalFunction antipodal_average(const SphericalFunction& f, double sign);

/// Bilinear form on T_x S^{n-1} written in an orthonormal tangent basis.
struct SymForm {
  Mat basis;   // n x (n-1), columns orthonormal and orthogonal to x
  Mat matrix;  // (n-1) x (n-1), symmetric
};

/// Step used by the finite-difference Hessian path.
inline constexpr double kHessianStep = 1e-3;

/// D^2 f(x) in the given tangent basis. Closed form from the jet when the
/// function has one, otherwise central differences of the 1-homogeneous
/// extension with one Richardson level.
SymForm restricted_hessian(const SphericalFunction& f, const Vec& x, const Mat& basis);
SymForm restricted_hessian(const SphericalFunction& f, const Vec& x);

/// Finite-difference restricted Hessian regardless of jet availability.
Mat restricted_hessian_fd(const SphericalFunction& f, const Vec& x, const Mat& basis,
                          double step = kHessianStep);

/// Full n x n finite-difference Hessian of y -> |y| f(y/|y|) at x.
Mat extension_hessian_fd(const SphericalFunction& f, const Vec& x, double step = kHessianStep);

/// Tangential gradient of f at x (closed form or central differences).
Vec spherical_gradient(const SphericalFunction& f, const Vec& x);

/// Polarized determinant D(A_1, ..., A_m) of m symmetric m x m matrices,
/// by inclusion-exclusion over subsets. Arguments are put in a canonical
/// order first, so any permutation gives a bitwise identical result.
double mixed_discriminant(std::span<const Mat> forms);
double mixed_discriminant(std::span<const SymForm> forms);

}  // namespace valforge
