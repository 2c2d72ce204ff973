#include "valforge/harmonics.hpp"

#include "valforge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace valforge {

namespace {

double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void exponents_of_degree(int n, int l, std::vector<int>& prefix,
                         std::vector<std::vector<int>>& out) {
  if (static_cast<int>(prefix.size()) == n - 1) {
    prefix.push_back(l);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int a = l; a >= 0; --a) {
    prefix.push_back(a);
    exponents_of_degree(n, l - a, prefix, out);
    prefix.pop_back();
  }
}

// T_k, T_k', T_k'' for k = 0..max at t.
void chebyshev_table(double t, int max, std::vector<double>& v, std::vector<double>& d1,
                     std::vector<double>& d2) {
  v.assign(max + 1, 0.0);
  d1.assign(max + 1, 0.0);
  d2.assign(max + 1, 0.0);
  v[0] = 1.0;
  if (max == 0) return;
  v[1] = t;
  d1[1] = 1.0;
  for (int k = 1; k < max; ++k) {
    v[k + 1] = 2.0 * t * v[k] - v[k - 1];
    d1[k + 1] = 2.0 * v[k] + 2.0 * t * d1[k] - d1[k - 1];
    d2[k + 1] = 4.0 * d1[k] + 2.0 * t * d2[k] - d2[k - 1];
  }
}

}  // namespace

std::size_t harmonic_space_dimension(int n, int l) {
  if (l < 0) return 0;
  return static_cast<std::size_t>(binomial(l + n - 1, n - 1) - binomial(l + n - 3, n - 1) + 0.5);
}

// ---------------------------------------------------------------------------

ChebyshevPolynomial::ChebyshevPolynomial(
    int n, std::shared_ptr<const std::vector<std::vector<int>>> exponents, Vec coeffs)
    : n_(n), max_power_(0), exponents_(std::move(exponents)), coeffs_(std::move(coeffs)) {
  if (static_cast<std::size_t>(coeffs_.size()) > exponents_->size())
    throw InvalidArgument("ChebyshevPolynomial: more coefficients than exponent tuples");
  for (Eigen::Index m = 0; m < coeffs_.size(); ++m)
    for (int a : (*exponents_)[m]) max_power_ = std::max(max_power_, a);
}

double ChebyshevPolynomial::operator()(const Vec& x) const {
  std::vector<std::vector<double>> t(n_);
  std::vector<double> d1, d2;
  for (int i = 0; i < n_; ++i) chebyshev_table(x(i), max_power_, t[i], d1, d2);
  double sum = 0.0;
  for (Eigen::Index m = 0; m < coeffs_.size(); ++m) {
    if (coeffs_(m) == 0.0) continue;
    const auto& a = (*exponents_)[m];
    double p = coeffs_(m);
    for (int i = 0; i < n_; ++i) p *= t[i][a[i]];
    sum += p;
  }
  return sum;
}

Jet ChebyshevPolynomial::jet(const Vec& x) const {
  std::vector<std::vector<double>> t(n_), t1(n_), t2(n_);
  for (int i = 0; i < n_; ++i) chebyshev_table(x(i), max_power_, t[i], t1[i], t2[i]);
  Jet out{0.0, Vec::Zero(n_), Mat::Zero(n_, n_)};
  std::vector<double> f(n_), g(n_), h(n_);
  for (Eigen::Index m = 0; m < coeffs_.size(); ++m) {
    const double c = coeffs_(m);
    if (c == 0.0) continue;
    const auto& a = (*exponents_)[m];
    double prod = 1.0;
    for (int i = 0; i < n_; ++i) {
      f[i] = t[i][a[i]];
      g[i] = t1[i][a[i]];
      h[i] = t2[i][a[i]];
      prod *= f[i];
    }
    out.value += c * prod;
    for (int i = 0; i < n_; ++i) {
      double gi = c * g[i];
      for (int k = 0; k < n_; ++k)
        if (k != i) gi *= f[k];
      out.gradient(i) += gi;
      for (int j = i; j < n_; ++j) {
        double hij = c * (i == j ? h[i] : g[i] * g[j]);
        for (int k = 0; k < n_; ++k)
          if (k != i && k != j) hij *= f[k];
        out.hessian(i, j) += hij;
      }
    }
  }
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < i; ++j) out.hessian(i, j) = out.hessian(j, i);
  return out;
}

// ---------------------------------------------------------------------------

std::shared_ptr<const HarmonicDictionary> HarmonicDictionary::get(int n, int max_degree) {
  if (n < 2) throw InvalidArgument("HarmonicDictionary: n must be >= 2");
  if (max_degree < 0) throw InvalidArgument("HarmonicDictionary: negative degree");
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const HarmonicDictionary>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot || slot->max_degree() < max_degree)
    slot = std::shared_ptr<const HarmonicDictionary>(
        new HarmonicDictionary(n, std::max(max_degree, slot ? slot->max_degree() : 0)));
  return slot;
}

HarmonicDictionary::HarmonicDictionary(int n, int max_degree)
    : n_(n), max_degree_(max_degree), exponents_(std::make_shared<std::vector<std::vector<int>>>()) {
  std::vector<int> prefix;
  for (int l = 0; l <= max_degree; ++l) {
    exponents_of_degree(n, l, prefix, *exponents_);
    candidates_up_to_.push_back(exponents_->size());
  }
  coef_ = Mat::Zero(static_cast<Eigen::Index>(exponents_->size()), 0);

  for (int l = 0; l <= max_degree; ++l) {
    const std::size_t target = harmonic_space_dimension(n, l);
    const SphereGrid grid = build_grid(n, 2 * l + 2);
    const auto q = static_cast<Eigen::Index>(grid.size());
    const auto cands = static_cast<Eigen::Index>(candidates_up_to_[l]);
    const Eigen::Index first_new = l == 0 ? 0 : static_cast<Eigen::Index>(candidates_up_to_[l - 1]);

    Mat phi(q, cands);  // sqrt(weight) * candidate values
    for (Eigen::Index r = 0; r < q; ++r)
      phi.row(r) = std::sqrt(grid.weights[r]) * candidate_values(grid.nodes[r], cands).transpose();

    // Members accepted so far, as coefficient columns and as sampled values.
    Mat basis_coef = coef_.topRows(cands);
    Mat basis_vals = phi * basis_coef;
    const Eigen::Index old_members = basis_coef.cols();

    for (Eigen::Index c = first_new; c < cands; ++c) {
      Vec coef = Vec::Zero(cands);
      coef(c) = 1.0;
      Vec vals = phi.col(c);
      const double original = vals.norm();
      for (int pass = 0; pass < 2; ++pass) {
        const Vec proj = basis_vals.transpose() * vals;
        vals -= basis_vals * proj;
        coef -= basis_coef * proj;
      }
      const double norm = vals.norm();
      if (norm <= 1e-9 * original) continue;  // dependent on the sphere
      basis_coef.conservativeResize(Eigen::NoChange, basis_coef.cols() + 1);
      basis_vals.conservativeResize(Eigen::NoChange, basis_vals.cols() + 1);
      basis_coef.col(basis_coef.cols() - 1) = coef / norm;
      basis_vals.col(basis_vals.cols() - 1) = vals / norm;
    }

    const auto added = static_cast<std::size_t>(basis_coef.cols() - old_members);
    if (added != target)
      throw NumericalFailure("HarmonicDictionary: degree " + std::to_string(l) + " produced " +
                             std::to_string(added) + " members, expected " + std::to_string(target));

    Mat grown = Mat::Zero(coef_.rows(), basis_coef.cols());
    grown.leftCols(coef_.cols()) = coef_;
    grown.block(0, old_members, cands, basis_coef.cols() - old_members) =
        basis_coef.rightCols(basis_coef.cols() - old_members);
    coef_ = std::move(grown);
    for (std::size_t i = 0; i < added; ++i) degrees_.push_back(l);
    members_up_to_.push_back(degrees_.size());
  }
}

std::size_t HarmonicDictionary::count_up_to(int l) const {
  if (l < 0) return 0;
  if (l > max_degree_)
    throw InvalidArgument("HarmonicDictionary: degree " + std::to_string(l) + " exceeds built " +
                          std::to_string(max_degree_));
  return members_up_to_[l];
}

std::string HarmonicDictionary::key(std::size_t i) const {
  const int l = degrees_.at(i);
  const std::size_t start = l == 0 ? 0 : members_up_to_[l - 1];
  return std::to_string(l) + ":" + std::to_string(i - start);
}

std::size_t HarmonicDictionary::index_of(const std::string& key) const {
  const auto colon = key.find(':');
  if (colon == std::string::npos) throw InvalidArgument("harmonic key must look like \"l:i\": " + key);
  int l = 0;
  long i = 0;
  try {
    l = std::stoi(key.substr(0, colon));
    i = std::stol(key.substr(colon + 1));
  } catch (const std::exception&) {
    throw InvalidArgument("harmonic key must look like \"l:i\": " + key);
  }
  if (l < 0 || l > max_degree_) throw InvalidArgument("harmonic key degree out of range: " + key);
  const std::size_t start = l == 0 ? 0 : members_up_to_[l - 1];
  if (i < 0 || start + i >= members_up_to_[l])
    throw InvalidArgument("harmonic key index out of range: " + key);
  return start + static_cast<std::size_t>(i);
}

Vec HarmonicDictionary::candidate_values(const Vec& x, std::size_t count) const {
  int max_power = 0;
  for (std::size_t m = 0; m < count; ++m)
    for (int a : (*exponents_)[m]) max_power = std::max(max_power, a);
  std::vector<std::vector<double>> t(n_);
  std::vector<double> d1, d2;
  for (int i = 0; i < n_; ++i) chebyshev_table(x(i), max_power, t[i], d1, d2);
  Vec out(static_cast<Eigen::Index>(count));
  for (std::size_t m = 0; m < count; ++m) {
    double p = 1.0;
    for (int i = 0; i < n_; ++i) p *= t[i][(*exponents_)[m][i]];
    out(static_cast<Eigen::Index>(m)) = p;
  }
  return out;
}

Vec HarmonicDictionary::values(const Vec& x, std::size_t count) const {
  if (count > size()) throw InvalidArgument("HarmonicDictionary::values: count exceeds size");
  if (count == 0) return Vec();
  const int l = degrees_[count - 1];
  const std::size_t cands = candidates_up_to_[l];
  return coef_.topLeftCorner(static_cast<Eigen::Index>(cands), static_cast<Eigen::Index>(count))
             .transpose() *
         candidate_values(x, cands);
}

ChebyshevPolynomial HarmonicDictionary::polynomial(const Vec& beta) const {
  if (static_cast<std::size_t>(beta.size()) > size())
    throw InvalidArgument("HarmonicDictionary::polynomial: too many coefficients");
  if (beta.size() == 0) return ChebyshevPolynomial(n_, exponents_, Vec::Zero(1));
  const int l = degrees_[beta.size() - 1];
  const auto cands = static_cast<Eigen::Index>(candidates_up_to_[l]);
  Vec gamma = coef_.topLeftCorner(cands, beta.size()) * beta;
  return ChebyshevPolynomial(n_, exponents_, std::move(gamma));
}

SphericalFunction HarmonicDictionary::function(const Vec& beta) const {
  auto p = std::make_shared<ChebyshevPolynomial>(polynomial(beta));
  return SphericalFunction(
      n_, [p](const Vec& x) { return (*p)(x); }, [p](const Vec& x) { return p->jet(x); },
      Smoothness::spectral);
}

SphericalFunction HarmonicDictionary::member(std::size_t i) const {
  Vec beta = Vec::Zero(static_cast<Eigen::Index>(i + 1));
  beta(static_cast<Eigen::Index>(i)) = 1.0;
  return function(beta);
}

Vec HarmonicDictionary::project(std::span<const double> node_values, int l,
                                const SphereGrid& grid) const {
  if (grid.n != n_) throw InvalidArgument("HarmonicDictionary::project: grid dimension mismatch");
  if (node_values.size() != grid.size())
    throw InvalidArgument("HarmonicDictionary::project: value count mismatch");
  const std::size_t count = count_up_to(l);
  Vec beta = Vec::Zero(static_cast<Eigen::Index>(count));
  for (std::size_t q = 0; q < grid.size(); ++q)
    beta += (grid.weights[q] * node_values[q]) * values(grid.nodes[q], count);
  return beta;
}

Vec HarmonicDictionary::project(const std::function<double(const Vec&)>& f, int l,
                                const SphereGrid& grid) const {
  std::vector<double> v(grid.size());
  for (std::size_t q = 0; q < grid.size(); ++q) v[q] = f(grid.nodes[q]);
  return project(v, l, grid);
}

}  // namespace valforge
