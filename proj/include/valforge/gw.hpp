#pragma once

// The valuation mu_k(K) = int f(x_n) dS_k(K, x) with f(t) = sqrt|t| (1-t^2)^{-(n-3)/2} psi(t),
// its Goodey-Weil distribution on zonal test functions, and the eps^{-1/2}
// blow-up that rules out a finite mixed-volume representation.

#include "valforge/bodies.hpp"
#include "valforge/sphere.hpp"

#include <vector>

namespace valforge {

/// C-infinity step: 0 for u <= 0, 1 for u >= 1, built from exp(-1/u).
struct SmoothStep {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};
SmoothStep smooth_step(double u);

/// 1 on |t| <= 1/3, 0 on |t| >= 2/3.
double cutoff_psi(double t);

/// sqrt|t| (1-t^2)^{-(n-3)/2} psi(t).
double counterexample_density(double t, int n);

/// Nonnegative bump: rises on [a, b], equals 1 on [b, c], falls on [c, d].
class ZonalTestFunction {
 public:
  ZonalTestFunction(double a, double b, double c, double d);

  /// Plateau [eps, 4 eps], support [eps/2, min(8 eps, 1/3)]. Needs 0 < eps < 1/12.
  static ZonalTestFunction plateau(double eps);
  static ZonalTestFunction zero();

  double operator()(double t) const;
  double d1(double t) const;
  double d2(double t) const;

  double support_begin() const { return a_; }
  double support_end() const { return d_; }
  bool is_zero() const { return zero_; }
  /// Breakpoints a, b, c, d (empty when zero).
  std::vector<double> breakpoints() const;

 private:
  ZonalTestFunction() = default;
  SmoothStep eval(double t) const;

  double a_ = 0.0, b_ = 0.0, c_ = 0.0, d_ = 0.0;
  bool zero_ = true;
};

/// Product rule on S^{n-1} with the last coordinate split at 0 and t = +-s^2 on
/// each half, so sqrt|t| times a smooth function is integrated spectrally.
SphereGrid counterexample_grid(int n, int degree);

/// mu_k(K) by quadrature against the mixed area density S(K[k], B[n-k-1]).
double counterexample_valuation(const ConvexBody& body, int k, int n, const SphereGrid& grid);

/// omega_{n-2} int_0^1 sqrt(t) [(1-t^2) phi'' - (n-1) t phi' + (n-1) phi] dt.
double gw_zonal(const ZonalTestFunction& phi, int n);

/// Same value after moving all derivatives onto the weight.
double gw_zonal_by_parts(const ZonalTestFunction& phi, int n);

/// The by-parts display with (n-1) phi in place of (n-1) sqrt(t) phi.
double gw_zonal_by_parts_unweighted(const ZonalTestFunction& phi, int n);

/// Direct quadrature over S^{n-1} of f(x_n) (D^2 phi~ traced), phi~(x) = phi(x_n),
/// with the trace taken from restricted Hessians of the ambient jet.
double gw_sphere_oracle(const ZonalTestFunction& phi, int n, int panels = 48);

/// int_0^1 phi(t) t^{-3/2} dt.
double singular_moment(const ZonalTestFunction& phi);

struct DivergencePoint {
  double eps = 0.0;
  double t_value = 0.0;
  double bound = 0.0;  // eps^{-1/2}
  double gw = 0.0;
  bool pass = false;
};

DivergencePoint divergence_probe(double eps, int n);

/// Log-spaced sweep from `start` to `stop` with `count` points.
std::vector<DivergencePoint> divergence_sweep(double start, double stop, int count, int n);

/// Least-squares slope of log T against log eps.
double divergence_slope(const std::vector<DivergencePoint>& sweep);

struct DerivativeReduction {
  double derivative = 0.0;   // (k-1)-th derivative of t -> mu_k(K + tB) at 0
  double mu1 = 0.0;          // mu_1(K)
  double stated = 0.0;       // (k-1)! mu_1(K)
  double polarized = 0.0;    // k! mu_1(K)
  double relative_error = 0.0;  // |derivative - stated| / |stated|
  double residual = 0.0;     // polynomial fit residual
  bool residual_ok = true;   // residual <= 1e-8
  std::vector<double> coefficients;
};

/// Fits t -> mu_k(K + tB) at t = 0, h, ..., (k+1)h by a degree-k polynomial.
DerivativeReduction derivative_reduction(const ConvexBody& body, int k, int n, const SphereGrid& grid,
                                         double h = 1e-2);

}  // namespace valforge
