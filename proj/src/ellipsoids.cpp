#include "valforge/ellipsoids.hpp"

#include "valforge/errors.hpp"
#include "valforge/parallel.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <random>

namespace valforge {

namespace {

constexpr double kSpanningFloor = 1e-10;

double operator_norm(const Mat& c) {
  return Eigen::SelfAdjointEigenSolver<Mat>(c, Eigen::EigenvaluesOnly).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

SymBasis standard_basis(int n) {
  if (n < 2) throw InvalidArgument("standard_basis: n must be >= 2");
  SymBasis b;
  b.n = n;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Mat e = Mat::Zero(n, n);
      e(i, j) = 1.0;
      e(j, i) = 1.0;
      b.matrices.push_back(e);
      b.index.emplace_back(i, j);
    }
  }
  return b;
}

double dual_norm(const Mat& c, const SymBasis& basis) {
  double m = 0.0;
  for (const auto& e : basis.matrices) m = std::max(m, std::abs((c * e).trace()));
  return m;
}

NormConstant norm_constant(int n, const SymBasis& basis, std::size_t samples, unsigned seed) {
  if (basis.n != n) throw InvalidArgument("norm_constant: basis dimension mismatch");
  NormConstant out;
  out.c = 1.0 / n;
  out.samples = samples;
  out.sampled = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (std::size_t s = 0; s < samples; ++s) {
    Mat c(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) c(i, j) = c(j, i) = gauss(rng);
    c /= operator_norm(c);
    out.sampled = std::min(out.sampled, dual_norm(c, basis));
  }
  return out;
}

EllipsoidFamily build_family(int n) {
  const SymBasis basis = standard_basis(n);
  EllipsoidFamily f;
  f.n = n;
  f.c = norm_constant(n, basis, 0).c;
  f.t = 1.0 + 2.0 / f.c;
  for (const auto& e : basis.matrices) f.matrices.push_back(f.t * Mat::Identity(n, n) + e);
  f.matrices.push_back(Mat::Identity(n, n));
  for (const auto& a : f.matrices) f.ellipsoids.push_back(make_ellipsoid(a));
  return f;
}

EllipsoidFamily degenerate_ball_family(int n) {
  EllipsoidFamily f;
  f.n = n;
  f.c = 1.0 / n;
  f.t = 1.0;
  const std::size_t count = static_cast<std::size_t>(n * (n + 1) / 2 + 1);
  for (std::size_t s = 0; s < count; ++s) {
    f.matrices.push_back(Mat::Identity(n, n));
    f.ellipsoids.push_back(make_ball(n, 1.0));
  }
  return f;
}

Vec sym_to_vec(const Mat& a) {
  const int m = static_cast<int>(a.rows());
  Vec v(m * (m + 1) / 2);
  int k = 0;
  for (int i = 0; i < m; ++i) v(k++) = a(i, i);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) v(k++) = std::sqrt(2.0) * 0.5 * (a(i, j) + a(j, i));
  return v;
}

Mat vec_to_sym(const Vec& v, int m) {
  Mat a(m, m);
  int k = 0;
  for (int i = 0; i < m; ++i) a(i, i) = v(k++);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) a(i, j) = a(j, i) = v(k++) / std::sqrt(2.0);
  return a;
}

Vec FrameAt::coefficients(const Mat& a) const { return dual * sym_to_vec(a); }

Mat FrameAt::combine(const Vec& coeffs) const {
  return vec_to_sym(span * coeffs, static_cast<int>(basis.cols()));
}

Mat FrameAt::ambient_dual() const {
  const auto n = basis.rows();
  Mat out(dual.rows(), n * n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      Mat c = Mat::Zero(n, n);
      c(a, b) = 1.0;
      out.col(a * n + b) = coefficients(basis.transpose() * c * basis);
    }
  }
  return out;
}

FrameAt frame_at(const EllipsoidFamily& family, const Vec& x) {
  if (x.size() != family.n) throw InvalidArgument("frame_at: dimension mismatch");
  FrameAt f;
  f.x = x;
  f.basis = tangent_basis(x);
  const int m = family.n - 1;
  f.span.resize(m * (m + 1) / 2, static_cast<Eigen::Index>(family.size()));
  for (std::size_t s = 0; s < family.size(); ++s)
    f.span.col(static_cast<Eigen::Index>(s)) =
        sym_to_vec(restricted_hessian(family.ellipsoids[s].support(), x, f.basis).matrix);
  Eigen::JacobiSVD<Mat> svd(f.span, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  f.sigma = sv(sv.size() - 1);
  Vec inv = Vec::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > kSpanningFloor) inv(i) = 1.0 / sv(i);
  f.dual = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  return f;
}

SpanningCertificate spanning_certificate(const EllipsoidFamily& family, const SphereGrid& grid) {
  if (grid.n != family.n) throw InvalidArgument("spanning_certificate: grid dimension mismatch");
  std::vector<double> sigma(grid.size());
  parallel_for(grid.size(), [&](std::size_t q) { sigma[q] = frame_at(family, grid.nodes[q]).sigma; });
  SpanningCertificate out{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t q = 0; q < sigma.size(); ++q)
    if (sigma[q] < out.min_sigma) out = {sigma[q], q};
  if (!(out.min_sigma > kSpanningFloor))
    throw SpanningFailure("ellipsoid family does not span at grid node " + std::to_string(out.argmin_node) +
                              " (smallest singular value " + std::to_string(out.min_sigma) + ")",
                          out.argmin_node, out.min_sigma);
  return out;
}

SpanningFrame dual_frame(const EllipsoidFamily& family, const SphereGrid& grid) {
  SpanningFrame out;
  out.family = family;
  out.grid = grid;
  out.nodes.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t q) { out.nodes[q] = frame_at(family, grid.nodes[q]); });
  out.certificate = {std::numeric_limits<double>::infinity(), 0};
  for (std::size_t q = 0; q < grid.size(); ++q)
    if (out.nodes[q].sigma < out.certificate.min_sigma) out.certificate = {out.nodes[q].sigma, q};
  if (!(out.certificate.min_sigma > kSpanningFloor))
    throw SpanningFailure("dual_frame: family does not span at grid node " +
                              std::to_string(out.certificate.argmin_node),
                          out.certificate.argmin_node, out.certificate.min_sigma);
  return out;
}

ContinuityProbe continuity_probe(const SpanningFrame& frame) {
  const auto& nodes = frame.grid.nodes;
  std::vector<Mat> amb(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t q) { amb[q] = frame.nodes[q].ambient_dual(); });
  ContinuityProbe out;
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    std::size_t best = q;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < nodes.size(); ++r) {
      const double d = (nodes[r] - nodes[q]).norm();
      if (r != q && d > 1e-12 && d < dist) {
        dist = d;
        best = r;
      }
    }
    if (best == q) continue;
    const double ratio = (amb[q] - amb[best]).norm() / dist;
    if (ratio > out.lipschitz) out = {ratio, q};
  }
  return out;
}

double contradiction_margin(const EllipsoidFamily& family, const SymBasis& basis, const Vec& x,
                            const Mat& c) {
  double m = 0.0;
  for (std::size_t s = 0; s < basis.matrices.size(); ++s) {
    const Mat& a = family.matrices[s];
    const Vec ax = a * x;
    const double q = x.dot(ax);
    const Mat b = q * basis.matrices[s] - ax * ax.transpose() + family.t * q * x * x.transpose();
    m = std::max(m, std::abs((c * b).trace()));
  }
  return m;
}

}  // namespace valforge
