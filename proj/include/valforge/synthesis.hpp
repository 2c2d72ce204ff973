#pragma once

// From a kernel-represented valuation to a finite combination of mixed
// volumes V(K[k], L+, E[alpha]) - V(K[k], L-, E[alpha]).

#include "valforge/ellipsoids.hpp"
#include "valforge/kernels.hpp"

#include <map>
#include <string>
#include <vector>

namespace valforge {

enum class Parity { none, even, odd };

std::string to_string(Parity p);
Parity parse_parity(const std::string& s);

/// mu(K) = sum_j int f_1^j D_{n-1}(D^2 h_K [k], D^2 f_2^j, ..., D^2 f_{n-k}^j).
struct KernelValuation {
  int n = 0;
  int k = 0;
  TensorDecomposition decomposition;
  Parity parity = Parity::none;
};

/// Checks n, k and the factor count n - k.
void validate(const KernelValuation& v);

double evaluate_kernel_valuation(const KernelValuation& v, const ConvexBody& body, const SphereGrid& grid);

/// Multiset of ellipsoid indices, stored as multiplicities (length N).
using MultiIndex = std::vector<int>;

struct AlphaFunction {
  MultiIndex alpha;
  std::vector<double> node_values;  // on the frame grid
  Vec coefficients;                 // harmonic projection, degree <= projection_degree
  SphericalFunction g;
};

/// Degree used to project g_alpha: kernel band limit + 4, or 12.
int default_projection_degree(const KernelValuation& v);

/// g_alpha with mu(K) = sum_alpha int g_alpha dS_{n-1}(K[k], E[alpha]).
std::vector<AlphaFunction> accumulate_g_alpha(const KernelValuation& v, const SpanningFrame& frame,
                                              int projection_degree);

/// (g(x) +- g(-x)) / 2; Parity::none returns g.
SphericalFunction parity_project(const SphericalFunction& g, Parity parity);
/// Same on harmonic coefficients: drops members of the wrong degree parity.
Vec parity_project(const Vec& coefficients, int n, Parity parity);

struct Convexified {
  ConvexBody plus;   // support R + g
  ConvexBody minus;  // ball of radius R
  double radius = 0.0;
  int doublings = 0;
};

/// `g` = sum_key c_key Y_key; L+ = perturbed ball (R, g), L- = ball(R).
Convexified convexify(const std::map<std::string, double>& g, int n, const SphereGrid& grid);

std::map<std::string, double> coefficient_map(const Vec& coefficients, int n);

struct CombinationTerm {
  MultiIndex alpha;
  std::map<std::string, double> g_coeffs;
  SphericalFunction g;
  ConvexBody plus;
  ConvexBody minus;
  double radius = 0.0;
};

struct FiniteCombination {
  int n = 0;
  int k = 0;
  Parity parity = Parity::none;
  int projection_degree = 0;
  EllipsoidFamily family;
  std::vector<CombinationTerm> terms;

  std::size_t mixed_volume_count() const { return 2 * terms.size(); }
  /// 2 C(C(n+1,2) + n-k-1, n-k-1)
  std::size_t mixed_volume_bound() const;
  /// Ellipsoids E[alpha] as a list with multiplicity.
  std::vector<ConvexBody> ellipsoids(const MultiIndex& alpha) const;
};

FiniteCombination synthesize(const KernelValuation& v, const EllipsoidFamily& family,
                             const SpanningFrame& frame, int projection_degree = -1);

struct CombinationValue {
  double value = 0.0;          // sum of mixed-volume differences
  double density_route = 0.0;  // sum (1/n) int g_alpha dS(K[k], E[alpha])
  double discrepancy = 0.0;    // relative
  bool consistent = true;      // discrepancy <= 1e-6
};

CombinationValue evaluate_combination(const FiniteCombination& comb, const ConvexBody& body,
                                      const SphereGrid& grid);

nlohmann::json combination_to_json(const FiniteCombination& comb);
FiniteCombination combination_from_json(const nlohmann::json& j);

}  // namespace valforge
