#pragma once

// Orthonormal spherical-harmonic dictionaries on S^{n-1} realized as
// polynomials, so every member has closed-form derivatives of an ambient
// extension (and hence an exact restricted Hessian).

#include "valforge/sphere.hpp"

#include <memory>
#include <string>
#include <vector>

namespace valforge {

/// dim of the space of degree-l spherical harmonics on S^{n-1}.
std::size_t harmonic_space_dimension(int n, int l);

/// Polynomial in tensor-product Chebyshev form, sum_m c_m prod_i T_{a_mi}(x_i).
class ChebyshevPolynomial {
 public:
  ChebyshevPolynomial(int n, std::shared_ptr<const std::vector<std::vector<int>>> exponents,
                      Vec coeffs);

  int dimension() const { return n_; }
  const Vec& coefficients() const { return coeffs_; }
  double operator()(const Vec& x) const;
  Jet jet(const Vec& x) const;

 private:
  int n_;
  int max_power_;
  std::shared_ptr<const std::vector<std::vector<int>>> exponents_;
  Vec coeffs_;
};

/// L^2(S^{n-1})-orthonormal basis of harmonics of degree <= max_degree.
///
/// Degree l members are obtained by orthogonalizing the tensor-Chebyshev
/// polynomials of total degree l against all lower-degree members; the
/// construction of degree l never depends on max_degree, so dictionaries
/// of different sizes agree on their common prefix.
class HarmonicDictionary {
 public:
  /// Cached, thread-safe access; the returned dictionary has at least
  /// `max_degree`.
  static std::shared_ptr<const HarmonicDictionary> get(int n, int max_degree);

  int dimension() const { return n_; }
  int max_degree() const { return max_degree_; }
  std::size_t size() const { return degrees_.size(); }
  /// Number of members with degree <= l.
  std::size_t count_up_to(int l) const;
  int degree_of(std::size_t i) const { return degrees_.at(i); }

  /// Stable key "l:i" (i-th member of degree l).
  std::string key(std::size_t i) const;
  std::size_t index_of(const std::string& key) const;

  /// Values of the first `count` members at x.
  Vec values(const Vec& x, std::size_t count) const;

  /// The polynomial sum_i beta_i Y_i (beta may be shorter than size()).
  ChebyshevPolynomial polynomial(const Vec& beta) const;
  SphericalFunction function(const Vec& beta) const;
  SphericalFunction member(std::size_t i) const;

  /// Quadrature projection of f onto members of degree <= l.
  Vec project(const std::function<double(const Vec&)>& f, int l, const SphereGrid& grid) const;
  Vec project(std::span<const double> node_values, int l, const SphereGrid& grid) const;

 private:
  HarmonicDictionary(int n, int max_degree);
  Vec candidate_values(const Vec& x, std::size_t count) const;

  int n_;
  int max_degree_;
  std::shared_ptr<std::vector<std::vector<int>>> exponents_;  // by total degree
  std::vector<std::size_t> candidates_up_to_;                  // prefix counts per degree
  std::vector<std::size_t> members_up_to_;
  std::vector<int> degrees_;
  Mat coef_;  // candidates x members
};

}  // namespace valforge
