#include "valforge/mixed.hpp"

#include "valforge/errors.hpp"
#include "valforge/format.hpp"
#include "valforge/hull.hpp"
#include "valforge/parallel.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace valforge {

namespace {

void require_smooth(const ConvexBody& b, int n, const char* what) {
  if (b.dimension() != n) throw InvalidArgument(std::string(what) + ": dimension mismatch");
  if (!b.is_smooth())
    throw InvalidArgument(std::string(what) + ": body of kind " + to_string(b.kind()) +
                          " has no smooth support function");
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// All exponent vectors of total degree `degree` in `vars` variables.
void monomials(int vars, int degree, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == vars - 1) {
    cur.push_back(degree);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int e = degree; e >= 0; --e) {
    cur.push_back(e);
    monomials(vars, degree - e, cur, out);
    cur.pop_back();
  }
}

std::string body_key(const ConvexBody& b) { return body_to_json(b).dump(); }

// Volumes of sum_j mu_j D_j for integer tuples mu, cached by primitive tuple.
class SumVolumes {
 public:
  SumVolumes(std::vector<ConvexBody> distinct, int level) : bodies_(std::move(distinct)) {
    n_ = bodies_.front().dimension();
    exact_ = std::all_of(bodies_.begin(), bodies_.end(),
                         [](const ConvexBody& b) { return !b.vertices().empty(); });
    if (!exact_) {
      const std::vector<Vec> mesh = direction_mesh(n_, level);
      points_.assign(bodies_.size(), std::vector<Vec>(mesh.size()));
      for (std::size_t j = 0; j < bodies_.size(); ++j)
        parallel_for(mesh.size(), [&](std::size_t q) { points_[j][q] = bodies_[j].support_point(mesh[q]); });
    }
  }

  bool exact() const { return exact_; }

  void request(const std::vector<int>& mu) {
    const auto [prim, scale] = primitive(mu);
    if (scale > 0) cache_.emplace(prim, 0.0);
  }

  void compute() {
    std::vector<std::pair<const std::vector<int>, double>*> todo;
    for (auto& entry : cache_) todo.push_back(&entry);
    parallel_for(todo.size(), [&](std::size_t i) { todo[i]->second = volume(todo[i]->first); });
  }

  double operator()(const std::vector<int>& mu) const {
    const auto [prim, scale] = primitive(mu);
    if (scale == 0) return 0.0;
    return std::pow(static_cast<double>(scale), n_) * cache_.at(prim);
  }

 private:
  static std::pair<std::vector<int>, int> primitive(std::vector<int> mu) {
    int g = 0;
    for (int v : mu) g = std::gcd(g, v);
    if (g > 0)
      for (int& v : mu) v /= g;
    return {mu, g};
  }

  double volume(const std::vector<int>& mu) const {
    std::vector<Vec> pts;
    if (exact_) {
      pts.push_back(Vec::Zero(n_));
      for (std::size_t j = 0; j < bodies_.size(); ++j) {
        if (mu[j] == 0) continue;
        std::vector<Vec> scaled_vertices;
        for (const auto& v : bodies_[j].vertices()) scaled_vertices.push_back(mu[j] * v);
        pts = minkowski_sum_vertices(pts, scaled_vertices);
      }
    } else {
      const std::size_t m = points_.front().size();
      pts.assign(m, Vec::Zero(n_));
      for (std::size_t j = 0; j < bodies_.size(); ++j) {
        if (mu[j] == 0) continue;
        for (std::size_t q = 0; q < m; ++q) pts[q] += mu[j] * points_[j][q];
      }
    }
    const HullResult h = convex_hull(pts);
    return h.full_dimensional ? h.volume : 0.0;
  }

  std::vector<ConvexBody> bodies_;
  int n_ = 0;
  bool exact_ = false;
  std::vector<std::vector<Vec>> points_;
  std::map<std::vector<int>, double> cache_;
};

double mixed_volume_at_level(std::span<const ConvexBody> bodies, int level, bool* exact) {
  const int n = bodies.front().dimension();
  const int m = static_cast<int>(bodies.size());

  std::vector<ConvexBody> distinct;
  std::vector<std::string> keys;
  std::vector<int> slot_group(m);
  for (int i = 0; i < m; ++i) {
    const std::string key = body_key(bodies[i]);
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(key);
      distinct.push_back(bodies[i]);
      slot_group[i] = static_cast<int>(keys.size()) - 1;
    } else {
      slot_group[i] = static_cast<int>(it - keys.begin());
    }
  }
  SumVolumes vols(distinct, level);
  *exact = vols.exact();

  std::vector<std::vector<int>> lambdas;
  std::vector<int> lam(m, 0);
  for (;;) {
    if (std::any_of(lam.begin(), lam.end(), [](int v) { return v != 0; })) lambdas.push_back(lam);
    int i = 0;
    while (i < m && lam[i] == n) lam[i++] = 0;
    if (i == m) break;
    ++lam[i];
  }
  auto group_tuple = [&](const std::vector<int>& l) {
    std::vector<int> mu(distinct.size(), 0);
    for (int i = 0; i < m; ++i) mu[slot_group[i]] += l[i];
    return mu;
  };
  for (const auto& l : lambdas) vols.request(group_tuple(l));
  vols.compute();

  std::vector<std::vector<int>> exps;
  std::vector<int> cur;
  monomials(m, n, cur, exps);
  Mat a(lambdas.size(), exps.size());
  Vec rhs(lambdas.size());
  for (std::size_t r = 0; r < lambdas.size(); ++r) {
    for (std::size_t c = 0; c < exps.size(); ++c) {
      double v = 1.0;
      for (int i = 0; i < m; ++i) v *= std::pow(static_cast<double>(lambdas[r][i]), exps[c][i]);
      a(r, c) = v;
    }
    rhs(r) = vols(group_tuple(lambdas[r]));
  }
  Eigen::ColPivHouseholderQR<Mat> qr(a);
  if (qr.rank() != static_cast<Eigen::Index>(exps.size()))
    throw NumericalFailure("polytope_mixed_volume: interpolation system is rank deficient");
  const Vec coef = qr.solve(rhs);
  const std::vector<int> ones(m, 1);
  const auto pos = std::find(exps.begin(), exps.end(), ones) - exps.begin();
  return coef(pos) / factorial(n);
}

// Least-squares fit of vol(K + tB) on t = 0..n+1.
SteinerPolynomial steiner_polytope_at_level(const ConvexBody& k_body, int level) {
  const int n = k_body.dimension();
  const std::vector<Vec> ball = direction_mesh(n, level);
  const int samples = n + 2;
  std::vector<double> vol(samples);
  parallel_for(samples, [&](std::size_t s) {
    const double t = static_cast<double>(s);
    std::vector<Vec> pts;
    if (s == 0) {
      pts = k_body.vertices();
    } else {
      std::vector<Vec> tb;
      for (const auto& u : ball) tb.push_back(t * u);
      pts = minkowski_sum_vertices(k_body.vertices(), tb);
    }
    const HullResult h = convex_hull(pts);
    vol[s] = h.full_dimensional ? h.volume : 0.0;
  });
  Mat a(samples, n + 1);
  Vec rhs(samples);
  for (int s = 0; s < samples; ++s) {
    for (int j = 0; j <= n; ++j) a(s, j) = std::pow(static_cast<double>(s), j);
    rhs(s) = vol[s];
  }
  const Vec coef = a.colPivHouseholderQr().solve(rhs);
  SteinerPolynomial out;
  out.coefficients.assign(coef.data(), coef.data() + coef.size());
  out.residual = (a * coef - rhs).cwiseAbs().maxCoeff() / std::max(1.0, rhs.cwiseAbs().maxCoeff());
  return out;
}

}  // namespace

MixedAreaDensity mixed_area_density(const ConvexBody& k_body, int k,
                                    std::span<const ConvexBody> others, const SphereGrid& grid) {
  const int n = grid.n;
  if (k < 1 || k > n - 1) throw InvalidArgument("mixed_area_density: k must lie in 1..n-1");
  if (static_cast<int>(others.size()) != n - k - 1)
    throw InvalidArgument("mixed_area_density: expected n-k-1 = " + std::to_string(n - k - 1) +
                          " other bodies, got " + std::to_string(others.size()));
  require_smooth(k_body, n, "mixed_area_density");
  for (const auto& b : others) require_smooth(b, n, "mixed_area_density");

  MixedAreaDensity out;
  out.grid = grid;
  out.k = k;
  out.signature.push_back(to_string(k_body.kind()));
  for (const auto& b : others) out.signature.push_back(to_string(b.kind()));
  out.values.resize(grid.size());

  parallel_for(grid.size(), [&](std::size_t q) {
    const Vec& x = grid.nodes[q];
    const Mat basis = tangent_basis(x);
    std::vector<Mat> forms;
    forms.reserve(n - 1);
    const Mat hk = restricted_hessian(k_body.support(), x, basis).matrix;
    for (int i = 0; i < k; ++i) forms.push_back(hk);
    for (const auto& b : others) forms.push_back(restricted_hessian(b.support(), x, basis).matrix);
    for (const auto& f : forms) {
      if (f.rows() == 0) continue;
      const double lmin = Eigen::SelfAdjointEigenSolver<Mat>(f, Eigen::EigenvaluesOnly).eigenvalues()(0);
      if (lmin < -1e-8)
        throw ConvexityViolation("mixed_area_density: D^2 h has eigenvalue " + std::to_string(lmin) +
                                     " at grid node " + std::to_string(q),
                                 q, lmin);
    }
    out.values[q] = mixed_discriminant(std::span<const Mat>(forms));
    if (!std::isfinite(out.values[q]))
      throw NumericalFailure("mixed_area_density: non-finite density at node " + std::to_string(q));
  });
  return out;
}

double mixed_volume_smooth(const ConvexBody& l1, const ConvexBody& k_body, int k,
                           std::span<const ConvexBody> others, const SphereGrid& grid) {
  if (l1.dimension() != grid.n) throw InvalidArgument("mixed_volume_smooth: dimension mismatch");
  const MixedAreaDensity d = mixed_area_density(k_body, k, others, grid);
  std::vector<double> integrand(grid.size());
  for (std::size_t q = 0; q < grid.size(); ++q) integrand[q] = l1.h(grid.nodes[q]) * d.values[q];
  return grid.integrate(integrand) / grid.n;
}

double polytope_volume(const ConvexBody& p, bool* lower_dimensional) {
  if (p.vertices().empty())
    throw InvalidArgument("polytope_volume: body of kind " + to_string(p.kind()) + " is not a polytope");
  const HullResult h = convex_hull(p.vertices());
  if (lower_dimensional) *lower_dimensional = !h.full_dimensional;
  return h.full_dimensional ? h.volume : 0.0;
}

std::vector<Vec> direction_mesh(int n, int level) {
  if (level < 1) throw InvalidArgument("direction_mesh: level must be >= 1");
  if (n == 3) return geodesic_sphere(level);
  if (n == 2) {
    const int m = 4 << level;
    std::vector<Vec> out;
    for (int i = 0; i < m; ++i) {
      const double a = 2.0 * M_PI * i / m;
      out.push_back(Vec{{std::cos(a), std::sin(a)}});
    }
    return out;
  }
  return build_grid(n, 1 << std::max(1, level - 2)).nodes;
}

double polytope_mixed_volume(std::span<const ConvexBody> bodies, const PolynomialRouteOptions& opts) {
  if (bodies.empty()) throw InvalidArgument("polytope_mixed_volume: no bodies");
  const int n = bodies.front().dimension();
  if (static_cast<int>(bodies.size()) != n)
    throw InvalidArgument("polytope_mixed_volume: expected n = " + std::to_string(n) + " bodies");
  for (const auto& b : bodies)
    if (b.dimension() != n) throw InvalidArgument("polytope_mixed_volume: dimension mismatch");

  bool exact = false;
  const double fine = mixed_volume_at_level(bodies, opts.level, &exact);
  if (exact || !opts.extrapolate) return fine;
  const double coarse = mixed_volume_at_level(bodies, opts.level - 1, &exact);
  return (4.0 * fine - coarse) / 3.0;
}

SteinerPolynomial steiner_coefficients(const ConvexBody& k_body, const SphereGrid& grid,
                                       const PolynomialRouteOptions& opts) {
  const int n = k_body.dimension();
  SteinerPolynomial out;
  if (k_body.is_smooth()) {
    if (grid.n != n) throw InvalidArgument("steiner_coefficients: grid dimension mismatch");
    const ConvexBody ball = make_ball(n, 1.0);
    out.coefficients.resize(n + 1);
    out.coefficients[0] = mixed_volume_smooth(k_body, k_body, n - 1, {}, grid);
    for (int j = 1; j <= n; ++j) {
      const ConvexBody& kk = j == n ? ball : k_body;
      const int mult = j == n ? n - 1 : n - j;
      const std::vector<ConvexBody> others(n - 1 - mult, ball);
      out.coefficients[j] = binomial(n, j) * mixed_volume_smooth(ball, kk, mult, others, grid);
    }
    return out;
  }
  if (k_body.vertices().empty())
    throw InvalidArgument("steiner_coefficients: body of kind " + to_string(k_body.kind()) +
                          " is neither smooth nor a polytope");
  out = steiner_polytope_at_level(k_body, opts.level);
  if (opts.extrapolate) {
    const SteinerPolynomial coarse = steiner_polytope_at_level(k_body, opts.level - 1);
    for (int j = 0; j <= n; ++j)
      out.coefficients[j] = (4.0 * out.coefficients[j] - coarse.coefficients[j]) / 3.0;
    out.residual = std::max(out.residual, coarse.residual);
  }
  out.residual_ok = out.residual <= 1e-6;
  return out;
}

std::string steiner_csv(std::span<const SteinerRow> rows) {
  std::ostringstream os;
  os << "body_id,j,coefficient\n";
  for (const auto& r : rows)
    for (std::size_t j = 0; j < r.coefficients.size(); ++j)
      os << r.body_id << ',' << j << ',' << format_double(r.coefficients[j]) << '\n';
  return os.str();
}

}  // namespace valforge
