#include "valforge/synthesis.hpp"

#include "valforge/errors.hpp"
#include "valforge/mixed.hpp"
#include "valforge/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace valforge {

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

int degree_for_count(int n, std::size_t count) {
  std::size_t total = 0;
  for (int l = 0;; ++l) {
    total += harmonic_space_dimension(n, l);
    if (total == count) return l;
    if (total > count) throw InvalidArgument("harmonic coefficient vector has an incomplete degree");
  }
}

// Restricted Hessians of the non-leading factors of each term at one point,
// shared between terms that use the same dictionary member.
class FactorHessians {
 public:
  FactorHessians(const Vec& x, const Mat& basis) : x_(x), basis_(basis) {}

  const Mat& get(const SeparableTerm& t, std::size_t i) {
    if (t.members.empty()) {
      scratch_ = restricted_hessian(t.factors[i], x_, basis_).matrix;
      return scratch_;
    }
    auto it = cache_.find(t.members[i]);
    if (it == cache_.end())
      it = cache_.emplace(t.members[i], restricted_hessian(t.factors[i], x_, basis_).matrix).first;
    return it->second;
  }

 private:
  const Vec& x_;
  const Mat& basis_;
  Mat scratch_;
  std::map<std::size_t, Mat> cache_;
};

void require_smooth_body(const ConvexBody& body, int n, const char* what) {
  if (body.dimension() != n) throw InvalidArgument(std::string(what) + ": dimension mismatch");
  if (!body.is_smooth())
    throw InvalidArgument(std::string(what) + ": body of kind " + to_string(body.kind()) +
                          " has a singular area measure; use a smooth body");
}

nlohmann::json coeffs_json(const std::map<std::string, double>& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, value] : c) j[key] = value;
  return j;
}

}  // namespace

std::string to_string(Parity p) {
  switch (p) {
    case Parity::even:
      return "even";
    case Parity::odd:
      return "odd";
    case Parity::none:
      break;
  }
  return "none";
}

Parity parse_parity(const std::string& s) {
  if (s == "none") return Parity::none;
  if (s == "even") return Parity::even;
  if (s == "odd") return Parity::odd;
  throw InvalidArgument("unknown parity \"" + s + "\" (expected none, even or odd)");
}

void validate(const KernelValuation& v) {
  if (v.n < 2) throw InvalidArgument("kernel valuation: n must be >= 2");
  if (v.k < 1 || v.k > v.n - 1) throw InvalidArgument("kernel valuation: k must lie in 1..n-1");
  if (v.decomposition.factors != v.n - v.k)
    throw InvalidArgument("kernel valuation: kernel has " + std::to_string(v.decomposition.factors) +
                          " factors, expected n-k = " + std::to_string(v.n - v.k));
  if (v.decomposition.n != v.n) throw InvalidArgument("kernel valuation: kernel dimension mismatch");
}

double evaluate_kernel_valuation(const KernelValuation& v, const ConvexBody& body, const SphereGrid& grid) {
  validate(v);
  require_smooth_body(body, v.n, "evaluate_kernel_valuation");
  if (grid.n != v.n) throw InvalidArgument("evaluate_kernel_valuation: grid dimension mismatch");
  const int m = v.n - v.k;
  std::vector<double> values(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t q) {
    const Vec& x = grid.nodes[q];
    const Mat basis = tangent_basis(x);
    const Mat hk = restricted_hessian(body.support(), x, basis).matrix;
    FactorHessians hess(x, basis);
    std::vector<Mat> forms(v.n - 1);
    for (int i = 0; i < v.k; ++i) forms[i] = hk;
    double acc = 0.0;
    for (const auto& t : v.decomposition.terms) {
      for (int l = 1; l < m; ++l) forms[v.k + l - 1] = hess.get(t, l);
      acc += t.factors[0](x) * mixed_discriminant(std::span<const Mat>(forms));
    }
    values[q] = acc;
  });
  return grid.integrate(values);
}

int default_projection_degree(const KernelValuation& v) {
  const bool harmonic = !v.decomposition.terms.empty() &&
                        std::all_of(v.decomposition.terms.begin(), v.decomposition.terms.end(),
                                    [](const SeparableTerm& t) { return !t.members.empty(); });
  return harmonic ? v.decomposition.max_degree + 4 : 12;
}

std::vector<AlphaFunction> accumulate_g_alpha(const KernelValuation& v, const SpanningFrame& frame,
                                              int projection_degree) {
  validate(v);
  const SphereGrid& grid = frame.grid;
  if (frame.family.n != v.n || grid.n != v.n) throw InvalidArgument("accumulate_g_alpha: dimension mismatch");
  if (projection_degree < 0) throw InvalidArgument("accumulate_g_alpha: negative projection degree");
  if (grid.degree < 2 * projection_degree)
    throw InvalidArgument("accumulate_g_alpha: frame grid degree " + std::to_string(grid.degree) +
                          " cannot resolve projection degree " + std::to_string(projection_degree));
  if (frame.certificate.min_sigma <= 1e-10)
    throw SpanningFailure("accumulate_g_alpha: frame does not span", frame.certificate.argmin_node,
                          frame.certificate.min_sigma);

  const int m = v.n - v.k;
  const int slots = m - 1;
  const int big_n = static_cast<int>(frame.family.size());

  // Ordered slot tuples and the multiset each one belongs to.
  std::map<MultiIndex, std::size_t> alpha_index;
  std::vector<MultiIndex> alphas;
  std::vector<std::vector<int>> tuples;
  std::vector<std::size_t> tuple_alpha;
  std::vector<int> tuple(slots, 0);
  for (;;) {
    MultiIndex alpha(big_n, 0);
    for (int s : tuple) ++alpha[s];
    auto [it, fresh] = alpha_index.emplace(alpha, alphas.size());
    if (fresh) alphas.push_back(alpha);
    tuples.push_back(tuple);
    tuple_alpha.push_back(it->second);
    int i = 0;
    while (i < slots && tuple[i] == big_n - 1) tuple[i++] = 0;
    if (i == slots) break;
    ++tuple[i];
  }

  std::vector<std::vector<double>> values(alphas.size(), std::vector<double>(grid.size(), 0.0));
  parallel_for(grid.size(), [&](std::size_t q) {
    const FrameAt& fr = frame.nodes[q];
    const Vec& x = grid.nodes[q];
    FactorHessians hess(x, fr.basis);
    std::vector<Vec> coefs(slots);
    std::vector<double> local(alphas.size(), 0.0);
    for (const auto& t : v.decomposition.terms) {
      const double f1 = t.factors[0](x);
      for (int l = 0; l < slots; ++l) coefs[l] = fr.coefficients(hess.get(t, l + 1));
      for (std::size_t u = 0; u < tuples.size(); ++u) {
        double p = f1;
        for (int l = 0; l < slots; ++l) p *= coefs[l](tuples[u][l]);
        local[tuple_alpha[u]] += p;
      }
    }
    for (std::size_t a = 0; a < alphas.size(); ++a) values[a][q] = local[a];
  });

  const auto dict = HarmonicDictionary::get(v.n, projection_degree);
  std::vector<AlphaFunction> out;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    AlphaFunction f;
    f.alpha = alphas[a];
    f.node_values = std::move(values[a]);
    f.coefficients = dict->project(std::span<const double>(f.node_values), projection_degree, grid);
    f.g = dict->function(f.coefficients);
    out.push_back(std::move(f));
  }
  return out;
}

SphericalFunction parity_project(const SphericalFunction& g, Parity parity) {
  switch (parity) {
    case Parity::even:
      return antipodal_average(g, 1.0);
    case Parity::odd:
      return antipodal_average(g, -1.0);
    case Parity::none:
      break;
  }
  return g;
}

Vec parity_project(const Vec& coefficients, int n, Parity parity) {
  if (parity == Parity::none) return coefficients;
  const int l = degree_for_count(n, static_cast<std::size_t>(coefficients.size()));
  const auto dict = HarmonicDictionary::get(n, l);
  Vec out = coefficients;
  const int keep = parity == Parity::even ? 0 : 1;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    if (dict->degree_of(static_cast<std::size_t>(i)) % 2 != keep) out(i) = 0.0;
  return out;
}

std::map<std::string, double> coefficient_map(const Vec& coefficients, int n) {
  const int l = degree_for_count(n, static_cast<std::size_t>(coefficients.size()));
  const auto dict = HarmonicDictionary::get(n, l);
  std::map<std::string, double> out;
  for (Eigen::Index i = 0; i < coefficients.size(); ++i)
    if (coefficients(i) != 0.0) out[dict->key(static_cast<std::size_t>(i))] = coefficients(i);
  return out;
}

Convexified convexify(const std::map<std::string, double>& g, int n, const SphereGrid& grid) {
  if (grid.n != n) throw InvalidArgument("convexify: grid dimension mismatch");
  int max_l = 0;
  for (const auto& [key, value] : g) max_l = std::max(max_l, std::atoi(key.c_str()));
  const auto dict = HarmonicDictionary::get(n, max_l);
  Vec beta = Vec::Zero(static_cast<Eigen::Index>(dict->count_up_to(max_l)));
  for (const auto& [key, value] : g) beta(static_cast<Eigen::Index>(dict->index_of(key))) = value;
  const SphericalFunction gf = dict->function(beta);

  const CurvatureSweep sweep = curvature_sweep(gf, grid);
  double gmax = 0.0;
  for (const auto& x : grid.nodes) gmax = std::max(gmax, std::abs(gf(x)));

  Convexified out;
  out.radius = std::max(1.0, 2.0 * std::max(0.0, -sweep.min_eigenvalue) + gmax);
  for (;;) {
    try {
      out.plus = make_perturbed_ball(out.radius, g, grid, n);
      break;
    } catch (const ConvexityViolation& err) {
      if (out.doublings == 10)
        throw ConvexityViolation("convexify: no certified radius after 10 doublings (R = " +
                                     std::to_string(out.radius) + "): " + err.what(),
                                 err.node(), err.eigenvalue());
      out.radius *= 2.0;
      ++out.doublings;
    }
  }
  out.minus = make_ball(n, out.radius);
  return out;
}

std::size_t FiniteCombination::mixed_volume_bound() const {
  const std::size_t half = binomial(static_cast<std::size_t>(n * (n + 1) / 2 + n - k - 1),
                                    static_cast<std::size_t>(n - k - 1));
  return 2 * half;
}

std::vector<ConvexBody> FiniteCombination::ellipsoids(const MultiIndex& alpha) const {
  std::vector<ConvexBody> out;
  for (std::size_t s = 0; s < alpha.size(); ++s)
    for (int r = 0; r < alpha[s]; ++r) out.push_back(family.ellipsoids.at(s));
  return out;
}

FiniteCombination synthesize(const KernelValuation& v, const EllipsoidFamily& family,
                             const SpanningFrame& frame, int projection_degree) {
  validate(v);
  if (family.n != v.n) throw InvalidArgument("synthesize: family dimension mismatch");
  const int p = projection_degree < 0 ? default_projection_degree(v) : projection_degree;
  FiniteCombination comb;
  comb.n = v.n;
  comb.k = v.k;
  comb.parity = v.parity;
  comb.projection_degree = p;
  comb.family = family;
  const auto dict = HarmonicDictionary::get(v.n, p);
  for (const auto& a : accumulate_g_alpha(v, frame, p)) {
    // With g' = n g the valuation is sum V(K[k], L+, E[alpha]) - V(K[k], L-, E[alpha]).
    const Vec beta = v.n * parity_project(a.coefficients, v.n, v.parity);
    CombinationTerm t;
    t.alpha = a.alpha;
    t.g_coeffs = coefficient_map(beta, v.n);
    t.g = dict->function(beta);
    Convexified c = convexify(t.g_coeffs, v.n, frame.grid);
    t.plus = std::move(c.plus);
    t.minus = std::move(c.minus);
    t.radius = c.radius;
    comb.terms.push_back(std::move(t));
  }
  if (comb.mixed_volume_count() > comb.mixed_volume_bound())
    throw NumericalFailure("synthesize: " + std::to_string(comb.mixed_volume_count()) +
                           " mixed volumes exceed the bound " + std::to_string(comb.mixed_volume_bound()));
  return comb;
}

CombinationValue evaluate_combination(const FiniteCombination& comb, const ConvexBody& body,
                                      const SphereGrid& grid) {
  require_smooth_body(body, comb.n, "evaluate_combination");
  CombinationValue out;
  for (const auto& t : comb.terms) {
    const std::vector<ConvexBody> es = comb.ellipsoids(t.alpha);
    out.value += mixed_volume_smooth(t.plus, body, comb.k, es, grid) -
                 mixed_volume_smooth(t.minus, body, comb.k, es, grid);
    const MixedAreaDensity d = mixed_area_density(body, comb.k, es, grid);
    std::vector<double> integrand(grid.size());
    for (std::size_t q = 0; q < grid.size(); ++q) integrand[q] = t.g(grid.nodes[q]) * d.values[q];
    out.density_route += grid.integrate(integrand) / comb.n;
  }
  const double scale = std::max({std::abs(out.value), std::abs(out.density_route), 1e-300});
  out.discrepancy = std::abs(out.value - out.density_route) / scale;
  out.consistent = out.discrepancy <= 1e-6 || std::abs(out.value - out.density_route) <= 1e-12;
  return out;
}

nlohmann::json combination_to_json(const FiniteCombination& comb) {
  nlohmann::json fam;
  fam["t"] = comb.family.t;
  fam["c"] = comb.family.c;
  nlohmann::json mats = nlohmann::json::array();
  for (const auto& e : comb.family.ellipsoids) mats.push_back(body_to_json(e));
  fam["ellipsoids"] = mats;

  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : comb.terms) {
    terms.push_back({{"alpha", t.alpha},
                     {"radius", t.radius},
                     {"g", coeffs_json(t.g_coeffs)},
                     {"plus", body_to_json(t.plus)},
                     {"minus", body_to_json(t.minus)}});
  }
  return {{"n", comb.n},
          {"k", comb.k},
          {"parity", to_string(comb.parity)},
          {"projection_degree", comb.projection_degree},
          {"family", fam},
          {"terms", terms},
          {"mixed_volume_count", comb.mixed_volume_count()},
          {"mixed_volume_bound", comb.mixed_volume_bound()}};
}

FiniteCombination combination_from_json(const nlohmann::json& j) {
  try {
    FiniteCombination comb;
    comb.n = j.at("n").get<int>();
    comb.k = j.at("k").get<int>();
    comb.parity = parse_parity(j.at("parity").get<std::string>());
    comb.projection_degree = j.at("projection_degree").get<int>();
    if (comb.n < 2 || comb.k < 1 || comb.k > comb.n - 1)
      throw InvalidArgument("combination json: n and k out of range");
    const auto& fam = j.at("family");
    comb.family.n = comb.n;
    comb.family.t = fam.at("t").get<double>();
    comb.family.c = fam.at("c").get<double>();
    for (const auto& e : fam.at("ellipsoids")) {
      comb.family.ellipsoids.push_back(body_from_json(e, comb.n));
      comb.family.matrices.push_back(comb.family.ellipsoids.back().matrix());
    }
    for (const auto& tj : j.at("terms")) {
      CombinationTerm t;
      t.alpha = tj.at("alpha").get<MultiIndex>();
      if (t.alpha.size() != comb.family.size())
        throw InvalidArgument("combination json: multi-index length does not match the family");
      t.radius = tj.at("radius").get<double>();
      for (const auto& [key, value] : tj.at("g").items()) t.g_coeffs[key] = value.get<double>();
      int max_l = 0;
      for (const auto& [key, value] : t.g_coeffs) max_l = std::max(max_l, std::atoi(key.c_str()));
      const auto dict = HarmonicDictionary::get(comb.n, max_l);
      Vec beta = Vec::Zero(static_cast<Eigen::Index>(dict->count_up_to(max_l)));
      for (const auto& [key, value] : t.g_coeffs) beta(static_cast<Eigen::Index>(dict->index_of(key))) = value;
      t.g = dict->function(beta);
      t.plus = body_from_json(tj.at("plus"), comb.n);
      t.minus = body_from_json(tj.at("minus"), comb.n);
      comb.terms.push_back(std::move(t));
    }
    return comb;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("combination json: ") + e.what());
  }
}

}  // namespace valforge
