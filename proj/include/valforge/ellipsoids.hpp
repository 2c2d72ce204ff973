#pragma once

// Ellipsoid families whose support-function Hessians span the tangent
// symmetric forms at every point of the sphere, and their dual frames.

#include "valforge/bodies.hpp"

#include <vector>

namespace valforge {

struct SymBasis {
  int n = 0;
  std::vector<Mat> matrices;             // E_ij, i <= j, row-major order
  std::vector<std::pair<int, int>> index;  // (i, j) of each matrix
};

/// E_ii = e_i e_i^T, E_ij = e_i e_j^T + e_j e_i^T.
SymBasis standard_basis(int n);

/// max_ij |tr(C E_ij)|
double dual_norm(const Mat& c, const SymBasis& basis);

struct NormConstant {
  double c = 0.0;        // certified: 1/n
  double sampled = 0.0;  // min of ||C||_* / ||C|| over random samples
  std::size_t samples = 0;
};

NormConstant norm_constant(int n, const SymBasis& basis, std::size_t samples = 100000,
                           unsigned seed = 1);

struct EllipsoidFamily {
  int n = 0;
  double t = 0.0;
  double c = 0.0;
  std::vector<Mat> matrices;  // t Id + E_ij, then Id
  std::vector<ConvexBody> ellipsoids;

  std::size_t size() const { return ellipsoids.size(); }
};

EllipsoidFamily build_family(int n);

/// Family of N unit balls (never spans for n >= 3); used as a negative control.
EllipsoidFamily degenerate_ball_family(int n);

/// Sym^2 of an (n-1)-space as a vector of length n(n-1)/2: diagonal, then
/// sqrt(2) times the upper off-diagonal entries (Frobenius isometry).
Vec sym_to_vec(const Mat& a);
Mat vec_to_sym(const Vec& v, int m);

/// Span matrix and min-norm dual frame at one point.
struct FrameAt {
  Vec x;
  Mat basis;    // n x (n-1)
  Mat span;     // d x N: vectorised restricted Hessians of the family
  Mat dual;     // N x d: pseudoinverse of span
  double sigma = 0.0;

  /// Coefficients Psi_s(A) for a tangent form A in this basis.
  Vec coefficients(const Mat& a) const;
  /// sum_s coeffs_s D^2 h_s(x), as a form in this basis.
  Mat combine(const Vec& coeffs) const;
  /// N x n^2 operator on ambient forms C (Cx = 0), independent of the basis.
  Mat ambient_dual() const;
};

FrameAt frame_at(const EllipsoidFamily& family, const Vec& x);

struct SpanningCertificate {
  double min_sigma = 0.0;
  std::size_t argmin_node = 0;
};

/// Throws SpanningFailure if the smallest singular value is <= 1e-10 at some node.
SpanningCertificate spanning_certificate(const EllipsoidFamily& family, const SphereGrid& grid);

struct SpanningFrame {
  EllipsoidFamily family;
  SphereGrid grid;
  std::vector<FrameAt> nodes;
  SpanningCertificate certificate;
};

SpanningFrame dual_frame(const EllipsoidFamily& family, const SphereGrid& grid);

struct ContinuityProbe {
  double lipschitz = 0.0;  // max ||Psi(x) - Psi(x')|| / |x - x'| over nearest neighbours
  std::size_t node = 0;
};

ContinuityProbe continuity_probe(const SpanningFrame& frame);

/// max_ij |tr(C B_ij(x))| with B_ij(x) = <x,A x> E_ij - (A x)(A x)^T + t <x,A x> x x^T.
double contradiction_margin(const EllipsoidFamily& family, const SymBasis& basis, const Vec& x,
                            const Mat& c);

}  // namespace valforge
