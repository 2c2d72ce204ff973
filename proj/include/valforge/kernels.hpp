#pragma once

// Separable decompositions of kernels on products of spheres.

#include "valforge/harmonics.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace valforge {

/// F(x_1, ..., x_m) on (S^{n-1})^m.
struct Kernel {
  int n = 0;
  int factors = 0;
  std::function<double(std::span<const Vec>)> eval;
  /// Degree in each variable if F is band-limited, otherwise empty.
  std::optional<int> band_limit;

  double operator()(std::span<const Vec> x) const { return eval(x); }
};

/// prod_i factors[i](x_i); the coefficient is already folded into
/// factors[0]. `members` holds dictionary indices when the term came from a
/// harmonic expansion (factors[0] = coefficient * Y_members[0]).
struct SeparableTerm {
  double coefficient = 1.0;
  std::vector<std::size_t> members;
  std::vector<SphericalFunction> factors;
};

struct TensorDecomposition {
  int n = 0;
  int factors = 0;
  int max_degree = 0;
  double tol = 0.0;
  double residual = 0.0;
  std::vector<SeparableTerm> terms;
  /// Coefficients that fell below tol (kept for the norm ledger tail).
  std::vector<std::pair<double, std::vector<std::size_t>>> discarded;
};

struct DecomposeOptions {
  double tol = 1e-10;
  bool strict = true;           // throw ReconstructionFailure if residual > 10 tol
  std::size_t test_tuples = 200;
  unsigned seed = 7;
};

TensorDecomposition decompose_kernel(const Kernel& f, int max_degree, const DecomposeOptions& opts = {});

/// Expansion with explicit coefficients: entries are (keys per factor, value).
TensorDecomposition decomposition_from_table(
    int n, int factors, const std::vector<std::pair<std::vector<std::string>, double>>& entries);

/// The single term f_1 (x) ... (x) f_m.
TensorDecomposition separable_decomposition(std::vector<SphericalFunction> factors);

/// sum_i weights[i] * parts[i], as concatenated (rescaled) terms.
TensorDecomposition combine(std::span<const TensorDecomposition> parts, std::span<const double> weights);

double reconstruct(const TensorDecomposition& d, std::span<const Vec> points);

/// Kernel view of a decomposition (band limit = max_degree if harmonic).
Kernel as_kernel(const TensorDecomposition& d);

struct NormLedger {
  std::vector<double> partial_sums;
  double total = 0.0;
  double tail = 0.0;        // norm products of discarded terms
  double tail_ratio = 0.0;  // tail / total
  bool monotone = true;
  bool summable = true;     // tail_ratio < 1e-3
};

/// C^l norm of f by maxima over a degree-40 grid of |f|, |grad_S f|, |Hess_S f|.
double grid_c_norm(const SphericalFunction& f, int l);

NormLedger norm_bound_report(const TensorDecomposition& d, std::span<const int> l);

}  // namespace valforge
