#include "valforge/kernels.hpp"

#include "valforge/errors.hpp"
#include "valforge/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>

namespace valforge {

namespace {

constexpr int kNormGridDegree = 40;

const SphereGrid& norm_grid(int n) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const SphereGrid>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const SphereGrid>(build_grid(n, kNormGridDegree));
  return *slot;
}

double member_norm(int n, int max_degree, std::size_t member, int l) {
  static std::mutex mu;
  static std::map<std::tuple<int, std::size_t, int>, double> cache;
  const auto key = std::make_tuple(n, member, l);
  {
    std::lock_guard lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const double v = grid_c_norm(HarmonicDictionary::get(n, max_degree)->member(member), l);
  std::lock_guard lock(mu);
  cache[key] = v;
  return v;
}

std::vector<Vec> random_tuple(std::mt19937_64& rng, int n, int m) {
  std::normal_distribution<double> gauss;
  std::vector<Vec> pts;
  for (int i = 0; i < m; ++i) {
    Vec x(n);
    for (int k = 0; k < n; ++k) x(k) = gauss(rng);
    pts.push_back(x.normalized());
  }
  return pts;
}

void sort_terms(std::vector<SeparableTerm>& terms) {
  std::stable_sort(terms.begin(), terms.end(), [](const SeparableTerm& a, const SeparableTerm& b) {
    return std::abs(a.coefficient) > std::abs(b.coefficient);
  });
}

SeparableTerm harmonic_term(const HarmonicDictionary& dict, double c, std::vector<std::size_t> members) {
  SeparableTerm t;
  t.coefficient = c;
  for (std::size_t i = 0; i < members.size(); ++i) {
    const SphericalFunction y = dict.member(members[i]);
    t.factors.push_back(i == 0 ? scale(y, c) : y);
  }
  t.members = std::move(members);
  return t;
}

}  // namespace

double grid_c_norm(const SphericalFunction& f, int l) {
  if (l < 0 || l > 2) throw InvalidArgument("grid_c_norm: l must be 0, 1 or 2");
  const SphereGrid& g = norm_grid(f.dimension());
  std::vector<double> best(g.size(), 0.0);
  parallel_for(g.size(), [&](std::size_t q) {
    const Vec& x = g.nodes[q];
    const double v = f(x);
    double m = std::abs(v);
    if (l >= 1) m = std::max(m, spherical_gradient(f, x).norm());
    if (l >= 2) {
      Mat hs = restricted_hessian(f, x).matrix;
      hs.diagonal().array() -= v;
      m = std::max(m, Eigen::SelfAdjointEigenSolver<Mat>(hs, Eigen::EigenvaluesOnly)
                          .eigenvalues()
                          .cwiseAbs()
                          .maxCoeff());
    }
    best[q] = m;
  });
  return *std::max_element(best.begin(), best.end());
}

TensorDecomposition decompose_kernel(const Kernel& f, int max_degree, const DecomposeOptions& opts) {
  const int n = f.n, m = f.factors;
  if (n < 2) throw InvalidArgument("decompose_kernel: n must be >= 2");
  if (m < 1) throw InvalidArgument("decompose_kernel: need at least one factor");
  if (max_degree < 0) throw InvalidArgument("decompose_kernel: negative max_degree");

  const auto dict = HarmonicDictionary::get(n, max_degree);
  const std::size_t count = dict->count_up_to(max_degree);
  const SphereGrid grid = build_grid(n, 2 * max_degree + 2);
  const std::size_t g = grid.size();
  const double total = std::pow(static_cast<double>(g), m);
  if (total > 5e7)
    throw InvalidArgument("decompose_kernel: product grid with " + std::to_string(total) +
                          " points is too large; lower max_degree");

  Mat w(g, count);
  for (std::size_t q = 0; q < g; ++q)
    w.row(q) = grid.weights[q] * dict->values(grid.nodes[q], count).transpose();

  const std::size_t points = static_cast<std::size_t>(total);
  std::vector<double> data(points);
  parallel_for(points, [&](std::size_t idx) {
    std::vector<Vec> x(m);
    std::size_t r = idx;
    for (int i = m - 1; i >= 0; --i) {
      x[i] = grid.nodes[r % g];
      r /= g;
    }
    data[idx] = f(x);
  });

  // Contract grid modes from the last to the first; layout is
  // [remaining grid modes, coefficient modes] in row-major order.
  std::size_t outer = points / g, inner = 1;
  for (int mode = m - 1; mode >= 0; --mode) {
    std::vector<double> next(outer * count * inner, 0.0);
    parallel_for(outer, [&](std::size_t a) {
      for (std::size_t q = 0; q < g; ++q) {
        const double* src = &data[(a * g + q) * inner];
        for (std::size_t k = 0; k < count; ++k) {
          const double wk = w(q, k);
          double* dst = &next[(a * count + k) * inner];
          for (std::size_t b = 0; b < inner; ++b) dst[b] += wk * src[b];
        }
      }
    });
    data = std::move(next);
    inner *= count;
    if (mode > 0) outer /= g;
  }

  TensorDecomposition out;
  out.n = n;
  out.factors = m;
  out.max_degree = max_degree;
  out.tol = opts.tol;
  for (std::size_t idx = 0; idx < data.size(); ++idx) {
    const double c = data[idx];
    if (c == 0.0) continue;
    std::vector<std::size_t> members(m);
    std::size_t r = idx;
    for (int i = m - 1; i >= 0; --i) {
      members[i] = r % count;
      r /= count;
    }
    if (std::abs(c) > opts.tol)
      out.terms.push_back(harmonic_term(*dict, c, std::move(members)));
    else
      out.discarded.emplace_back(c, std::move(members));
  }
  sort_terms(out.terms);

  std::mt19937_64 rng(opts.seed);
  double fmax = 0.0;
  for (std::size_t s = 0; s < opts.test_tuples; ++s) {
    const auto x = random_tuple(rng, n, m);
    const double fv = f(x);
    fmax = std::max(fmax, std::abs(fv));
    out.residual = std::max(out.residual, std::abs(reconstruct(out, x) - fv));
  }
  if (opts.strict && out.residual > 10.0 * opts.tol * std::max(1.0, fmax))
    throw ReconstructionFailure("decompose_kernel: residual " + std::to_string(out.residual) +
                                    " exceeds 10*tol; kernel is not band-limited to degree " +
                                    std::to_string(max_degree),
                                out.residual);
  return out;
}

TensorDecomposition decomposition_from_table(
    int n, int factors, const std::vector<std::pair<std::vector<std::string>, double>>& entries) {
  if (n < 2 || factors < 1) throw InvalidArgument("decomposition_from_table: bad dimensions");
  int max_l = 0;
  for (const auto& [keys, value] : entries) {
    if (static_cast<int>(keys.size()) != factors)
      throw InvalidArgument("decomposition_from_table: entry has " + std::to_string(keys.size()) +
                            " keys, expected " + std::to_string(factors));
    for (const auto& k : keys) {
      const auto colon = k.find(':');
      if (colon == std::string::npos) throw InvalidArgument("decomposition_from_table: bad key " + k);
      max_l = std::max(max_l, std::atoi(k.substr(0, colon).c_str()));
    }
  }
  const auto dict = HarmonicDictionary::get(n, max_l);
  std::map<std::vector<std::size_t>, double> sums;
  for (const auto& [keys, value] : entries) {
    std::vector<std::size_t> members;
    for (const auto& k : keys) members.push_back(dict->index_of(k));
    sums[members] += value;
  }
  TensorDecomposition out;
  out.n = n;
  out.factors = factors;
  out.max_degree = max_l;
  for (const auto& [members, c] : sums)
    if (c != 0.0) out.terms.push_back(harmonic_term(*dict, c, members));
  sort_terms(out.terms);
  return out;
}

TensorDecomposition separable_decomposition(std::vector<SphericalFunction> factors) {
  if (factors.empty()) throw InvalidArgument("separable_decomposition: no factors");
  TensorDecomposition out;
  out.n = factors.front().dimension();
  out.factors = static_cast<int>(factors.size());
  for (const auto& f : factors)
    if (f.dimension() != out.n) throw InvalidArgument("separable_decomposition: dimension mismatch");
  SeparableTerm t;
  t.factors = std::move(factors);
  out.terms.push_back(std::move(t));
  return out;
}

TensorDecomposition combine(std::span<const TensorDecomposition> parts, std::span<const double> weights) {
  if (parts.empty() || parts.size() != weights.size())
    throw InvalidArgument("combine: need matching non-empty parts and weights");
  TensorDecomposition out;
  out.n = parts.front().n;
  out.factors = parts.front().factors;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& d = parts[p];
    if (d.n != out.n || d.factors != out.factors) throw InvalidArgument("combine: shape mismatch");
    out.max_degree = std::max(out.max_degree, d.max_degree);
    out.tol = std::max(out.tol, std::abs(weights[p]) * d.tol);
    out.residual += std::abs(weights[p]) * d.residual;
    if (weights[p] == 0.0) continue;
    for (auto t : d.terms) {
      t.coefficient *= weights[p];
      t.factors[0] = scale(t.factors[0], weights[p]);
      out.terms.push_back(std::move(t));
    }
    for (auto [c, members] : d.discarded) out.discarded.emplace_back(weights[p] * c, std::move(members));
  }
  return out;
}

double reconstruct(const TensorDecomposition& d, std::span<const Vec> points) {
  if (static_cast<int>(points.size()) != d.factors)
    throw InvalidArgument("reconstruct: expected " + std::to_string(d.factors) + " points");
  const bool harmonic =
      std::all_of(d.terms.begin(), d.terms.end(), [](const SeparableTerm& t) { return !t.members.empty(); });
  double sum = 0.0;
  if (harmonic && !d.terms.empty()) {
    const auto dict = HarmonicDictionary::get(d.n, d.max_degree);
    const std::size_t count = dict->count_up_to(d.max_degree);
    std::vector<Vec> vals;
    for (const auto& x : points) vals.push_back(dict->values(x, count));
    for (const auto& t : d.terms) {
      double p = t.coefficient;
      for (std::size_t i = 0; i < points.size(); ++i) p *= vals[i](static_cast<Eigen::Index>(t.members[i]));
      sum += p;
    }
    return sum;
  }
  for (const auto& t : d.terms) {
    double p = 1.0;
    for (std::size_t i = 0; i < points.size(); ++i) p *= t.factors[i](points[i]);
    sum += p;
  }
  return sum;
}

Kernel as_kernel(const TensorDecomposition& d) {
  Kernel k;
  k.n = d.n;
  k.factors = d.factors;
  auto shared = std::make_shared<const TensorDecomposition>(d);
  k.eval = [shared](std::span<const Vec> x) { return reconstruct(*shared, x); };
  const bool harmonic =
      std::all_of(d.terms.begin(), d.terms.end(), [](const SeparableTerm& t) { return !t.members.empty(); });
  if (harmonic) k.band_limit = d.max_degree;
  return k;
}

NormLedger norm_bound_report(const TensorDecomposition& d, std::span<const int> l) {
  if (static_cast<int>(l.size()) != d.factors)
    throw InvalidArgument("norm_bound_report: expected " + std::to_string(d.factors) + " orders");
  for (int li : l)
    if (li < 0 || li > 2) throw InvalidArgument("norm_bound_report: orders must lie in 0..2");

  auto product = [&](double c, const std::vector<std::size_t>& members) {
    double p = std::abs(c);
    for (std::size_t i = 0; i < members.size(); ++i) p *= member_norm(d.n, d.max_degree, members[i], l[i]);
    return p;
  };

  NormLedger out;
  double sum = 0.0;
  for (const auto& t : d.terms) {
    double p = 1.0;
    if (!t.members.empty()) {
      p = product(t.coefficient, t.members);
    } else {
      for (std::size_t i = 0; i < t.factors.size(); ++i) p *= grid_c_norm(t.factors[i], l[i]);
    }
    const double next = sum + p;
    out.monotone = out.monotone && next >= sum;
    sum = next;
    out.partial_sums.push_back(sum);
  }
  for (const auto& [c, members] : d.discarded) out.tail += product(c, members);
  out.total = sum + out.tail;
  out.tail_ratio = out.total > 0.0 ? out.tail / out.total : 0.0;
  out.summable = out.tail_ratio < 1e-3;
  return out;
}

}  // namespace valforge
