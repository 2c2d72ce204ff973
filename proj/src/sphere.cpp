#include "valforge/sphere.hpp"

#include "valforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace valforge {

double sphere_area(int n) {
  if (n < 1) throw InvalidArgument("sphere_area: n must be >= 1");
  const double half = 0.5 * n;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double SphereGrid::integrate(std::span<const double> values) const {
  if (values.size() != weights.size())
    throw InvalidArgument("SphereGrid::integrate: value count does not match node count");
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += weights[i] * values[i];
  return sum;
}

double SphereGrid::integrate(const std::function<double(const Vec&)>& f) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
  return sum;
}

void gauss_gegenbauer(int count, double a, std::vector<double>& nodes,
                      std::vector<double>& weights) {
  if (count < 1) throw InvalidArgument("gauss_gegenbauer: count must be >= 1");
  // Golub-Welsch on the Jacobi matrix of the Jacobi polynomials P^{(a,a)}.
  Mat jacobi = Mat::Zero(count, count);
  const double ab = 2.0 * a;
  for (int k = 1; k < count; ++k) {
    const double kk = k;
    const double s = 2.0 * kk + ab;
    const double beta = 4.0 * kk * (kk + a) * (kk + a) * (kk + ab) / (s * s * (s + 1.0) * (s - 1.0));
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(beta);
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(jacobi);
  const double mass = std::sqrt(std::numbers::pi) * std::tgamma(a + 1.0) / std::tgamma(a + 1.5);
  nodes.resize(count);
  weights.resize(count);
  for (int i = 0; i < count; ++i) {
    nodes[i] = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    weights[i] = mass * v0 * v0;
  }
  // Symmetrize: the rule is exactly symmetric about 0.
  for (int i = 0; i < count / 2; ++i) {
    const int j = count - 1 - i;
    const double t = 0.5 * (nodes[j] - nodes[i]);
    const double w = 0.5 * (weights[i] + weights[j]);
    nodes[i] = -t;
    nodes[j] = t;
    weights[i] = weights[j] = w;
  }
  if (count % 2 == 1) nodes[count / 2] = 0.0;
}

SphereGrid build_grid(int n, int degree) {
  if (n < 2) throw InvalidArgument("build_grid: n must be >= 2, got " + std::to_string(n));
  if (degree < 2)
    throw InvalidArgument("build_grid: degree must be >= 2, got " + std::to_string(degree));

  SphereGrid grid;
  grid.n = n;
  grid.degree = degree;

  if (n == 2) {
    const int count = 2 * (degree + 1);
    const double w = 2.0 * std::numbers::pi / count;
    for (int j = 0; j < count; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / count;
      Vec x(2);
      x << std::cos(theta), std::sin(theta);
      grid.nodes.push_back(std::move(x));
      grid.weights.push_back(w);
    }
    return grid;
  }

  std::vector<double> ts;
  std::vector<double> tw;
  gauss_gegenbauer(degree + 1, 0.5 * (n - 3), ts, tw);
  const SphereGrid slice = build_grid(n - 1, degree);
  grid.nodes.reserve(ts.size() * slice.size());
  grid.weights.reserve(ts.size() * slice.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = std::sqrt(std::max(0.0, 1.0 - ts[i] * ts[i]));
    for (std::size_t j = 0; j < slice.size(); ++j) {
      Vec x(n);
      x.head(n - 1) = r * slice.nodes[j];
      x(n - 1) = ts[i];
      x.normalize();
      grid.nodes.push_back(std::move(x));
      grid.weights.push_back(tw[i] * slice.weights[j]);
    }
  }
  return grid;
}

Mat tangent_basis(const Vec& x) {
  const Eigen::Index n = x.size();
  Vec u = -x;
  u(n - 1) += 1.0;
  Mat h = Mat::Identity(n, n);
  const double uu = u.squaredNorm();
  if (uu > 0.0) h -= (2.0 / uu) * u * u.transpose();
  return h.leftCols(n - 1);
}

// ---------------------------------------------------------------------------

SphericalFunction::SphericalFunction(int n, ValueFn value, JetFn jet, Smoothness tag)
    : n_(n), value_(std::move(value)), jet_(std::move(jet)), tag_(tag) {
  if (!value_) throw InvalidArgument("SphericalFunction: missing value evaluator");
  if (!jet_ && tag_ != Smoothness::finite_difference)
    throw InvalidArgument("SphericalFunction: closed-form tag requires a jet evaluator");
}

SphericalFunction SphericalFunction::from_values(int n, ValueFn value) {
  return SphericalFunction(n, std::move(value), nullptr, Smoothness::finite_difference);
}

SphericalFunction SphericalFunction::constant(int n, double c) {
  return SphericalFunction(
      n, [c](const Vec&) { return c; },
      [c, n](const Vec&) { return Jet{c, Vec::Zero(n), Mat::Zero(n, n)}; },
      Smoothness::closed_form);
}

SphericalFunction SphericalFunction::linear(const Vec& v) {
  const int n = static_cast<int>(v.size());
  return SphericalFunction(
      n, [v](const Vec& x) { return v.dot(x); },
      [v, n](const Vec& x) { return Jet{v.dot(x), v, Mat::Zero(n, n)}; },
      Smoothness::closed_form);
}

Jet SphericalFunction::jet(const Vec& x) const {
  if (!jet_) throw InvalidArgument("SphericalFunction::jet: function has no closed-form jet");
  return jet_(x);
}

namespace {

Smoothness weakest(Smoothness a, Smoothness b) {
  return static_cast<int>(a) > static_cast<int>(b) ? a : b;
}

}  // namespace

SphericalFunction linear_combination(std::span<const double> coeffs,
                                     std::span<const SphericalFunction> fs) {
  if (coeffs.size() != fs.size() || fs.empty())
    throw InvalidArgument("linear_combination: need matching non-empty coefficient and function lists");
  const int n = fs.front().dimension();
  bool all_jets = true;
  Smoothness tag = Smoothness::closed_form;
  for (const auto& f : fs) {
    if (f.dimension() != n) throw InvalidArgument("linear_combination: dimension mismatch");
    all_jets = all_jets && f.has_jet();
    tag = weakest(tag, f.smoothness());
  }
  std::vector<double> c(coeffs.begin(), coeffs.end());
  std::vector<SphericalFunction> g(fs.begin(), fs.end());
  auto value = [c, g](const Vec& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += c[i] * g[i](x);
    return s;
  };
  if (!all_jets) return SphericalFunction::from_values(n, value);
  auto jet = [c, g, n](const Vec& x) {
    Jet out{0.0, Vec::Zero(n), Mat::Zero(n, n)};
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Jet j = g[i].jet(x);
      out.value += c[i] * j.value;
      out.gradient += c[i] * j.gradient;
      out.hessian += c[i] * j.hessian;
    }
    return out;
  };
  return SphericalFunction(n, value, jet, tag);
}

SphericalFunction add(const SphericalFunction& f, const SphericalFunction& g) {
  const double c[] = {1.0, 1.0};
  const SphericalFunction fs[] = {f, g};
  return linear_combination(c, fs);
}

SphericalFunction scale(const SphericalFunction& f, double s) {
  const double c[] = {s};
  const SphericalFunction fs[] = {f};
  return linear_combination(c, fs);
}

SphericalFunction add_constant(const SphericalFunction& f, double c) {
  return add(f, SphericalFunction::constant(f.dimension(), c));
}

SphericalFunction antipodal_average(const SphericalFunction& f, double sign) {
  const int n = f.dimension();
  auto value = [f, sign](const Vec& x) {
    const Vec y = -x;
    return 0.5 * (f(x) + sign * f(y));
  };
  if (!f.has_jet()) return SphericalFunction::from_values(n, value);
  auto jet = [f, sign](const Vec& x) {
    const Jet a = f.jet(x);
    const Jet b = f.jet(-x);
    return Jet{0.5 * (a.value + sign * b.value), 0.5 * (a.gradient - sign * b.gradient),
               0.5 * (a.hessian + sign * b.hessian)};
  };
  return SphericalFunction(n, value, jet, f.smoothness());
}

// ---------------------------------------------------------------------------

namespace {

double homogeneous_extension(const SphericalFunction& f, const Vec& y) {
  const double r = y.norm();
  return r * f(y / r);
}

Mat fd_hessian_in_directions(const SphericalFunction& f, const Vec& x, const Mat& dirs,
                             double h) {
  const Eigen::Index m = dirs.cols();
  Mat out(m, m);
  const double center = homogeneous_extension(f, x);
  for (Eigen::Index a = 0; a < m; ++a) {
    const Vec va = dirs.col(a);
    out(a, a) = (homogeneous_extension(f, x + h * va) - 2.0 * center +
                 homogeneous_extension(f, x - h * va)) /
                (h * h);
    for (Eigen::Index b = a + 1; b < m; ++b) {
      const Vec vb = dirs.col(b);
      const double v = (homogeneous_extension(f, x + h * va + h * vb) -
                        homogeneous_extension(f, x + h * va - h * vb) -
                        homogeneous_extension(f, x - h * va + h * vb) +
                        homogeneous_extension(f, x - h * va - h * vb)) /
                       (4.0 * h * h);
      out(a, b) = out(b, a) = v;
    }
  }
  return out;
}

Mat richardson_hessian(const SphericalFunction& f, const Vec& x, const Mat& dirs, double step) {
  const Mat coarse = fd_hessian_in_directions(f, x, dirs, step);
  const Mat fine = fd_hessian_in_directions(f, x, dirs, 0.5 * step);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace

Mat restricted_hessian_fd(const SphericalFunction& f, const Vec& x, const Mat& basis,
                          double step) {
  return richardson_hessian(f, x, basis, step);
}

Mat extension_hessian_fd(const SphericalFunction& f, const Vec& x, double step) {
  return richardson_hessian(f, x, Mat::Identity(x.size(), x.size()), step);
}

SymForm restricted_hessian(const SphericalFunction& f, const Vec& x, const Mat& basis) {
  if (x.size() != f.dimension() || basis.rows() != x.size() || basis.cols() != x.size() - 1)
    throw InvalidArgument("restricted_hessian: dimension mismatch");
  if (!f.has_jet()) return SymForm{basis, restricted_hessian_fd(f, x, basis)};

  const Jet j = f.jet(x);
  const double asym = (j.hessian - j.hessian.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-6)
    throw NumericalFailure("restricted_hessian: ambient Hessian is not symmetric (defect " +
                           std::to_string(asym) + ")");
  // Tangential Hessian of P minus the normal derivative along the unit
  // sphere's second fundamental form, plus f * Id from the 1-homogeneous
  // extension.
  Mat b = basis.transpose() * j.hessian * basis;
  b.diagonal().array() += j.value - j.gradient.dot(x);
  return SymForm{basis, 0.5 * (b + b.transpose())};
}

SymForm restricted_hessian(const SphericalFunction& f, const Vec& x) {
  return restricted_hessian(f, x, tangent_basis(x));
}

Vec spherical_gradient(const SphericalFunction& f, const Vec& x) {
  if (f.has_jet()) {
    const Vec g = f.jet(x).gradient;
    return g - g.dot(x) * x;
  }
  const Mat basis = tangent_basis(x);
  Vec out = Vec::Zero(x.size());
  auto central = [&](const Vec& v, double h) {
    const Vec p = (x + h * v).normalized();
    const Vec q = (x - h * v).normalized();
    return (f(p) - f(q)) / (2.0 * h);
  };
  for (Eigen::Index a = 0; a < basis.cols(); ++a) {
    const Vec v = basis.col(a);
    const double d = (4.0 * central(v, 0.5 * kHessianStep) - central(v, kHessianStep)) / 3.0;
    out += d * v;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double small_det(const Mat& a) {
  switch (a.rows()) {
    case 1:
      return a(0, 0);
    case 2:
      return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    case 3:
      return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
             a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
             a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    default:
      return a.determinant();
  }
}

bool lexicographic_less(const Mat& a, const Mat& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

}  // namespace

double mixed_discriminant(std::span<const Mat> forms) {
  const std::size_t m = forms.size();
  if (m == 0) throw InvalidArgument("mixed_discriminant: need at least one form");
  for (const auto& a : forms) {
    if (a.rows() != static_cast<Eigen::Index>(m) || a.cols() != static_cast<Eigen::Index>(m))
      throw InvalidArgument("mixed_discriminant: expected " + std::to_string(m) + " forms of size " +
                            std::to_string(m) + "x" + std::to_string(m));
  }
  if (m == 1) return forms[0](0, 0);

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return lexicographic_less(forms[i], forms[j]);
  });

  double total = 0.0;
  Mat sum(m, m);
  for (std::size_t mask = 1; mask < (std::size_t{1} << m); ++mask) {
    sum.setZero();
    int bits = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (std::size_t{1} << i)) {
        sum += forms[order[i]];
        ++bits;
      }
    }
    const double sign = ((static_cast<int>(m) - bits) % 2 == 0) ? 1.0 : -1.0;
    total += sign * small_det(sum);
  }
  return total / std::tgamma(static_cast<double>(m) + 1.0);
}

double mixed_discriminant(std::span<const SymForm> forms) {
  std::vector<Mat> mats;
  mats.reserve(forms.size());
  for (const auto& f : forms) {
    if (!forms.empty() && (f.basis - forms.front().basis).cwiseAbs().maxCoeff() > 1e-12)
      throw InvalidArgument("mixed_discriminant: forms are expressed in different tangent bases");
    mats.push_back(f.matrix);
  }
  return mixed_discriminant(std::span<const Mat>(mats));
}

}  // namespace valforge
