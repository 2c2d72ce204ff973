#include "valforge/gw.hpp"

#include "valforge/errors.hpp"
#include "valforge/mixed.hpp"
#include "valforge/parallel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace valforge {

namespace {

double factorial(int m) {
  double r = 1.0;
  for (int i = 2; i <= m; ++i) r *= i;
  return r;
}

// Adaptive Gauss-Kronrod over [lo, hi], accepted when halving the interval
// reproduces the value; one extra halving before giving up.
double adaptive(const std::function<double(double)>& g, double lo, double hi) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  if (!(hi > lo)) return 0.0;
  auto piece = [&](double a, double b, double* l1) { return GK::integrate(g, a, b, 8, 1e-13, nullptr, l1); };
  double l1 = 0.0, dummy = 0.0;
  double whole = piece(lo, hi, &l1);
  for (int split = 2; split <= 4; split *= 2) {
    double parts = 0.0;
    for (int i = 0; i < split; ++i)
      parts += piece(lo + (hi - lo) * i / split, lo + (hi - lo) * (i + 1) / split, &dummy);
    if (std::abs(parts - whole) <= 1e-12 * std::max(1.0, l1)) return parts;
    whole = parts;
  }
  throw NumericalFailure("adaptive quadrature did not converge on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
}

double over_support(const ZonalTestFunction& phi, const std::function<double(double)>& g) {
  const std::vector<double> br = phi.breakpoints();
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) sum += adaptive(g, br[i], br[i + 1]);
  return sum;
}

void require_cancellable(const ZonalTestFunction& phi, int n, const char* who) {
  if (n < 3) throw InvalidArgument(std::string(who) + ": n must be >= 3");
  if (phi.is_zero()) return;
  if (phi.support_begin() <= 0.0 || phi.support_end() > 1.0 / 3.0 + 1e-15)
    throw InvalidArgument(std::string(who) + ": support must lie in (0, 1/3]");
}

}  // namespace

SmoothStep smooth_step(double u) {
  if (u <= 0.0) return {0.0, 0.0, 0.0};
  if (u >= 1.0) return {1.0, 0.0, 0.0};
  const double v = 1.0 - u;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / v);
  const double a1 = a / (u * u);
  const double b1 = -b / (v * v);
  const double a2 = a * (1.0 / (u * u * u * u) - 2.0 / (u * u * u));
  const double b2 = b * (1.0 / (v * v * v * v) - 2.0 / (v * v * v));
  const double s = a + b;
  const double num = a1 * b - a * b1;
  SmoothStep r;
  r.value = a / s;
  r.d1 = num / (s * s);
  r.d2 = ((a2 * b - a * b2) * s - 2.0 * num * (a1 + b1)) / (s * s * s);
  return r;
}

double cutoff_psi(double t) {
  if (t < -1.0 || t > 1.0) throw InvalidArgument("cutoff_psi: t must lie in [-1, 1]");
  return 1.0 - smooth_step(3.0 * std::abs(t) - 1.0).value;
}

double counterexample_density(double t, int n) {
  const double psi = cutoff_psi(t);
  if (psi == 0.0) return 0.0;
  return std::sqrt(std::abs(t)) * std::pow(1.0 - t * t, -0.5 * (n - 3)) * psi;
}

ZonalTestFunction::ZonalTestFunction(double a, double b, double c, double d)
    : a_(a), b_(b), c_(c), d_(d), zero_(false) {
  if (!(a < b && b <= c && c < d))
    throw InvalidArgument("ZonalTestFunction: need a < b <= c < d");
}

ZonalTestFunction ZonalTestFunction::plateau(double eps) {
  if (!(eps > 0.0 && eps < 1.0 / 12.0))
    throw InvalidArgument("ZonalTestFunction::plateau: eps must lie in (0, 1/12)");
  return {0.5 * eps, eps, 4.0 * eps, std::min(8.0 * eps, 1.0 / 3.0)};
}

ZonalTestFunction ZonalTestFunction::zero() { return ZonalTestFunction(); }

std::vector<double> ZonalTestFunction::breakpoints() const {
  if (zero_) return {};
  if (b_ == c_) return {a_, b_, d_};
  return {a_, b_, c_, d_};
}

SmoothStep ZonalTestFunction::eval(double t) const {
  if (zero_ || t <= a_ || t >= d_) return {};
  if (t < b_) {
    const double w = b_ - a_;
    const SmoothStep s = smooth_step((t - a_) / w);
    return {s.value, s.d1 / w, s.d2 / (w * w)};
  }
  if (t <= c_) return {1.0, 0.0, 0.0};
  const double w = d_ - c_;
  const SmoothStep s = smooth_step((t - c_) / w);
  return {1.0 - s.value, -s.d1 / w, -s.d2 / (w * w)};
}

double ZonalTestFunction::operator()(double t) const { return eval(t).value; }
double ZonalTestFunction::d1(double t) const { return eval(t).d1; }
double ZonalTestFunction::d2(double t) const { return eval(t).d2; }

SphereGrid counterexample_grid(int n, int degree) {
  if (n < 3) throw InvalidArgument("counterexample_grid: n must be >= 3");
  const SphereGrid slice = build_grid(n - 1, degree);
  std::vector<double> x, w;
  gauss_gegenbauer(degree + 2, 0.0, x, w);
  SphereGrid g;
  g.n = n;
  g.degree = degree;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double s = 0.5 * (x[j] + 1.0);
    const double t = s * s;
    const double tw = 0.5 * w[j] * 2.0 * s * std::pow(1.0 - t * t, 0.5 * (n - 3));
    const double r = std::sqrt(1.0 - t * t);
    for (double sign : {-1.0, 1.0}) {
      for (std::size_t i = 0; i < slice.size(); ++i) {
        Vec node(n);
        node.head(n - 1) = r * slice.nodes[i];
        node(n - 1) = sign * t;
        g.nodes.push_back(std::move(node));
        g.weights.push_back(tw * slice.weights[i]);
      }
    }
  }
  return g;
}

double counterexample_valuation(const ConvexBody& body, int k, int n, const SphereGrid& grid) {
  if (body.dimension() != n || grid.n != n)
    throw InvalidArgument("counterexample_valuation: dimension mismatch");
  if (k < 1 || k > n - 1) throw InvalidArgument("counterexample_valuation: k must lie in 1..n-1");
  const std::vector<ConvexBody> balls(n - k - 1, make_ball(n, 1.0));
  const MixedAreaDensity dens = mixed_area_density(body, k, balls, grid);
  double sum = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    sum += grid.weights[i] * counterexample_density(grid.nodes[i](n - 1), n) * dens.values[i];
  return sum;
}

double gw_zonal(const ZonalTestFunction& phi, int n) {
  require_cancellable(phi, n, "gw_zonal");
  if (phi.is_zero()) return 0.0;
  const double m = n - 1;
  const double v = over_support(phi, [&](double t) {
    return std::sqrt(t) * ((1.0 - t * t) * phi.d2(t) - m * t * phi.d1(t) + m * phi(t));
  });
  return sphere_area(n - 1) * v;
}

double gw_zonal_by_parts(const ZonalTestFunction& phi, int n) {
  require_cancellable(phi, n, "gw_zonal_by_parts");
  if (phi.is_zero()) return 0.0;
  const double m = n - 1;
  const double v = over_support(phi, [&](double t) {
    const double r = std::sqrt(t);
    return phi(t) * (-0.25 / (t * r) - 3.75 * r + 1.5 * m * r + m * r);
  });
  return sphere_area(n - 1) * v;
}

double gw_zonal_by_parts_unweighted(const ZonalTestFunction& phi, int n) {
  require_cancellable(phi, n, "gw_zonal_by_parts_unweighted");
  if (phi.is_zero()) return 0.0;
  const double m = n - 1;
  const double v = over_support(phi, [&](double t) {
    const double r = std::sqrt(t);
    return phi(t) * (-0.25 / (t * r) - 3.75 * r + 1.5 * m * r + m);
  });
  return sphere_area(n - 1) * v;
}

double gw_sphere_oracle(const ZonalTestFunction& phi, int n, int panels) {
  if (n < 3) throw InvalidArgument("gw_sphere_oracle: n must be >= 3");
  if (phi.is_zero()) return 0.0;
  const SphericalFunction lifted(
      n, [&](const Vec& x) { return phi(x(n - 1)); },
      [&, n](const Vec& y) {
        const double t = y(n - 1);
        Jet j;
        j.value = phi(t);
        j.gradient = Vec::Zero(n);
        j.gradient(n - 1) = phi.d1(t);
        j.hessian = Mat::Zero(n, n);
        j.hessian(n - 1, n - 1) = phi.d2(t);
        return j;
      },
      Smoothness::closed_form);

  const SphereGrid slice = build_grid(n - 1, 8);
  std::vector<double> gn, gw;
  gauss_gegenbauer(20, 0.0, gn, gw);
  const std::vector<double> br = phi.breakpoints();
  const int per_piece = std::max(1, panels / static_cast<int>(br.size() - 1));

  double sum = 0.0;
  for (std::size_t p = 0; p + 1 < br.size(); ++p) {
    const double w = (br[p + 1] - br[p]) / per_piece;
    for (int q = 0; q < per_piece; ++q) {
      const double lo = br[p] + q * w;
      for (std::size_t g = 0; g < gn.size(); ++g) {
        const double t = lo + 0.5 * w * (gn[g] + 1.0);
        const double r = std::sqrt(1.0 - t * t);
        const double slice_weight = 0.5 * w * gw[g] * std::pow(1.0 - t * t, 0.5 * (n - 3));
        const double f = counterexample_density(t, n);
        for (std::size_t s = 0; s < slice.size(); ++s) {
          Vec x(n);
          x.head(n - 1) = r * slice.nodes[s];
          x(n - 1) = t;
          const double trace = restricted_hessian(lifted, x).matrix.trace();
          sum += slice_weight * slice.weights[s] * f * trace;
        }
      }
    }
  }
  return sum;
}

double singular_moment(const ZonalTestFunction& phi) {
  if (phi.is_zero()) return 0.0;
  if (phi.support_begin() <= 0.0) throw InvalidArgument("singular_moment: support must avoid 0");
  return over_support(phi, [&](double t) { return phi(t) / (t * std::sqrt(t)); });
}

DivergencePoint divergence_probe(double eps, int n) {
  const ZonalTestFunction phi = ZonalTestFunction::plateau(eps);
  DivergencePoint p;
  p.eps = eps;
  p.t_value = singular_moment(phi);
  p.bound = 1.0 / std::sqrt(eps);
  p.gw = gw_zonal(phi, n);
  p.pass = p.t_value >= p.bound;
  return p;
}

std::vector<DivergencePoint> divergence_sweep(double start, double stop, int count, int n) {
  if (count < 1 || !(start > 0.0) || !(stop > 0.0))
    throw InvalidArgument("divergence_sweep: need count >= 1 and positive endpoints");
  std::vector<DivergencePoint> out(count);
  parallel_for(count, [&](std::size_t i) {
    const double s = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out[i] = divergence_probe(std::pow(10.0, (1.0 - s) * std::log10(start) + s * std::log10(stop)), n);
  });
  return out;
}

double divergence_slope(const std::vector<DivergencePoint>& sweep) {
  if (sweep.size() < 2) throw InvalidArgument("divergence_slope: need at least two points");
  Mat a(sweep.size(), 2);
  Vec b(sweep.size());
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::log(sweep[i].eps);
    b(i) = std::log(sweep[i].t_value);
  }
  return a.colPivHouseholderQr().solve(b)(1);
}

DerivativeReduction derivative_reduction(const ConvexBody& body, int k, int n, const SphereGrid& grid,
                                         double h) {
  if (k < 1 || k > n - 1) throw InvalidArgument("derivative_reduction: k must lie in 1..n-1");
  if (!body.is_smooth()) throw InvalidArgument("derivative_reduction: body must be smooth");
  const ConvexBody ball = make_ball(n, 1.0);
  const int m = k + 2;
  Mat v(m, k + 1);
  Vec y(m);
  for (int i = 0; i < m; ++i) {
    const double t = i * h;
    const ConvexBody parts[] = {body, ball};
    const double lambdas[] = {1.0, t};
    y(i) = counterexample_valuation(i == 0 ? body : minkowski_support(parts, lambdas), k, n, grid);
    for (int j = 0; j <= k; ++j) v(i, j) = std::pow(t, j);
  }
  const Vec c = v.colPivHouseholderQr().solve(y);

  DerivativeReduction r;
  r.coefficients.assign(c.data(), c.data() + c.size());
  r.residual = (v * c - y).cwiseAbs().maxCoeff() / std::max(1.0, y.cwiseAbs().maxCoeff());
  r.residual_ok = r.residual <= 1e-8;
  r.derivative = factorial(k - 1) * c(k - 1);
  r.mu1 = counterexample_valuation(body, 1, n, grid);
  r.stated = factorial(k - 1) * r.mu1;
  r.polarized = factorial(k) * r.mu1;
  r.relative_error = std::abs(r.derivative - r.stated) / std::max(std::abs(r.stated), 1e-300);
  return r;
}

}  // namespace valforge
