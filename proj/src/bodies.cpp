#include "valforge/bodies.hpp"

#include "valforge/errors.hpp"
#include "valforge/harmonics.hpp"
#include "valforge/hull.hpp"
#include "valforge/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace valforge {

std::string to_string(BodyKind kind) {
  switch (kind) {
    case BodyKind::ellipsoid:
      return "ellipsoid";
    case BodyKind::ball:
      return "ball";
    case BodyKind::perturbed_ball:
      return "perturbed_ball";
    case BodyKind::polytope:
      return "polytope";
    case BodyKind::minkowski_combination:
      return "minkowski_combination";
  }
  return "unknown";
}

Vec ConvexBody::support_point(const Vec& x) const {
  if (!vertices_.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < vertices_.size(); ++i)
      if (vertices_[i].dot(x) > vertices_[best].dot(x)) best = i;
    return vertices_[best];
  }
  return support_(x) * x + spherical_gradient(support_, x);
}

SphericalFunction ellipsoid_support(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  return SphericalFunction(
      n, [a](const Vec& x) { return std::sqrt(x.dot(a * x)); },
      [a](const Vec& x) {
        const Vec ax = a * x;
        const double q = x.dot(ax);
        const double h = std::sqrt(q);
        return Jet{h, ax / h, (q * a - ax * ax.transpose()) / (q * h)};
      },
      Smoothness::closed_form);
}

namespace {

Vec zero_if_empty(const Vec& v, int n) { return v.size() == 0 ? Vec::Zero(n) : v; }

double min_eigenvalue(const Mat& m) {
  if (m.rows() == 1) return m(0, 0);
  if (m.rows() == 2) {
    const double tr = 0.5 * (m(0, 0) + m(1, 1));
    const double d = 0.5 * (m(0, 0) - m(1, 1));
    return tr - std::sqrt(d * d + m(0, 1) * m(1, 0));
  }
  return Eigen::SelfAdjointEigenSolver<Mat>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

SphericalFunction polytope_support(const std::vector<Vec>& vertices) {
  const int n = static_cast<int>(vertices.front().size());
  return SphericalFunction::from_values(n, [vertices](const Vec& x) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : vertices) best = std::max(best, v.dot(x));
    return best;
  });
}

}  // namespace

ConvexBody make_ellipsoid(const Mat& a, const Vec& center) {
  const auto n = a.rows();
  if (n < 2 || a.cols() != n) throw InvalidArgument("make_ellipsoid: matrix must be square, n >= 2");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()))
    throw InvalidArgument("make_ellipsoid: matrix is not symmetric");
  const double lmin = Eigen::SelfAdjointEigenSolver<Mat>(a, Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (!(lmin > 0.0)) throw InvalidArgument("make_ellipsoid: matrix is not positive definite");

  ConvexBody b;
  b.kind_ = BodyKind::ellipsoid;
  b.n_ = static_cast<int>(n);
  b.matrix_ = a;
  b.center_ = zero_if_empty(center, b.n_);
  if (b.center_.size() != n) throw InvalidArgument("make_ellipsoid: center dimension mismatch");
  b.support_ = ellipsoid_support(a);
  if (!b.center_.isZero(0.0)) b.support_ = add(b.support_, SphericalFunction::linear(b.center_));
  return b;
}

ConvexBody make_ball(int n, double radius, const Vec& center) {
  if (n < 2) throw InvalidArgument("make_ball: n must be >= 2");
  if (!(radius > 0.0)) throw InvalidArgument("make_ball: radius must be positive");
  ConvexBody b;
  b.kind_ = BodyKind::ball;
  b.n_ = n;
  b.radius_ = radius;
  b.matrix_ = radius * radius * Mat::Identity(n, n);
  b.center_ = zero_if_empty(center, n);
  if (b.center_.size() != n) throw InvalidArgument("make_ball: center dimension mismatch");
  b.support_ = SphericalFunction::constant(n, radius);
  if (!b.center_.isZero(0.0)) b.support_ = add(b.support_, SphericalFunction::linear(b.center_));
  return b;
}

CurvatureSweep curvature_sweep(const SphericalFunction& h, const SphereGrid& grid) {
  if (h.dimension() != grid.n) throw InvalidArgument("curvature_sweep: dimension mismatch");
  std::vector<double> mins(grid.size());
  parallel_for(grid.size(), [&](std::size_t q) {
    mins[q] = min_eigenvalue(restricted_hessian(h, grid.nodes[q]).matrix);
  });
  CurvatureSweep out{mins.empty() ? 0.0 : mins[0], 0};
  for (std::size_t q = 1; q < mins.size(); ++q) {
    if (mins[q] < out.min_eigenvalue) out = {mins[q], q};
  }
  return out;
}

ConvexBody make_perturbed_ball(double radius, const std::map<std::string, double>& coeffs,
                               const SphereGrid& grid, int n, const Vec& center) {
  if (!(radius > 0.0)) throw InvalidArgument("make_perturbed_ball: radius must be positive");
  if (n == 0) n = grid.n;
  if (n != grid.n) throw InvalidArgument("make_perturbed_ball: grid dimension mismatch");

  int max_l = 0;
  for (const auto& [key, value] : coeffs) {
    const auto colon = key.find(':');
    if (colon == std::string::npos) throw InvalidArgument("perturbed_ball: bad coefficient key " + key);
    try {
      max_l = std::max(max_l, std::stoi(key.substr(0, colon)));
    } catch (const std::exception&) {
      throw InvalidArgument("perturbed_ball: bad coefficient key " + key);
    }
  }
  auto dict = HarmonicDictionary::get(n, max_l);
  Vec beta = Vec::Zero(static_cast<Eigen::Index>(dict->count_up_to(max_l)));
  for (const auto& [key, value] : coeffs) beta(static_cast<Eigen::Index>(dict->index_of(key))) += value;

  ConvexBody b;
  b.kind_ = BodyKind::perturbed_ball;
  b.n_ = n;
  b.radius_ = radius;
  b.coeffs_ = coeffs;
  b.center_ = zero_if_empty(center, n);
  b.support_ = add_constant(dict->function(beta), radius);
  if (!b.center_.isZero(0.0)) b.support_ = add(b.support_, SphericalFunction::linear(b.center_));

  const CurvatureSweep sweep = curvature_sweep(b.support_, grid);
  if (sweep.min_eigenvalue < kConvexityThreshold)
    throw ConvexityViolation("perturbed_ball: D^2 h has eigenvalue " +
                                 std::to_string(sweep.min_eigenvalue) + " at grid node " +
                                 std::to_string(sweep.node),
                             sweep.node, sweep.min_eigenvalue);
  return b;
}

ConvexBody make_polytope(std::vector<Vec> vertices) {
  if (vertices.empty()) throw InvalidArgument("make_polytope: empty vertex list");
  const auto n = vertices.front().size();
  if (n < 2) throw InvalidArgument("make_polytope: dimension must be >= 2");
  for (const auto& v : vertices)
    if (v.size() != n) throw InvalidArgument("make_polytope: mixed vertex dimensions");
  ConvexBody b;
  b.kind_ = BodyKind::polytope;
  b.n_ = static_cast<int>(n);
  b.smooth_ = false;
  b.lower_dimensional_ = affine_dimension(vertices) < b.n_;
  b.center_ = Vec::Zero(n);
  b.vertices_ = std::move(vertices);
  b.support_ = polytope_support(b.vertices_);
  return b;
}

ConvexBody minkowski_support(std::span<const ConvexBody> bodies, std::span<const double> lambdas) {
  if (bodies.empty() || bodies.size() != lambdas.size())
    throw InvalidArgument("minkowski_support: need matching non-empty body and coefficient lists");
  const int n = bodies.front().dimension();
  ConvexBody b;
  b.kind_ = BodyKind::minkowski_combination;
  b.n_ = n;
  b.center_ = Vec::Zero(n);
  std::vector<SphericalFunction> fs;
  bool all_polytopes = true;
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    if (bodies[i].dimension() != n) throw InvalidArgument("minkowski_support: dimension mismatch");
    if (!(lambdas[i] >= 0.0)) throw InvalidArgument("minkowski_support: negative coefficient");
    b.smooth_ = b.smooth_ && bodies[i].is_smooth();
    all_polytopes = all_polytopes && !bodies[i].vertices().empty();
    b.terms_.emplace_back(lambdas[i], bodies[i]);
    fs.push_back(bodies[i].support());
  }
  b.support_ = linear_combination(lambdas, fs);
  if (all_polytopes) {
    std::vector<Vec> acc{Vec::Zero(n)};
    for (std::size_t i = 0; i < bodies.size(); ++i) {
      std::vector<Vec> scaled_vertices;
      for (const auto& v : bodies[i].vertices()) scaled_vertices.push_back(lambdas[i] * v);
      acc = minkowski_sum_vertices(acc, scaled_vertices);
    }
    b.vertices_ = std::move(acc);
    b.lower_dimensional_ = affine_dimension(b.vertices_) < n;
  }
  return b;
}

ConvexBody scaled(const ConvexBody& body, double t) {
  const ConvexBody bodies[] = {body};
  const double lambdas[] = {t};
  return minkowski_support(bodies, lambdas);
}

ConvexBody translate(const ConvexBody& body, const Vec& v) {
  if (v.size() != body.dimension()) throw InvalidArgument("translate: dimension mismatch");
  ConvexBody b = body;
  if (!b.vertices_.empty()) {
    for (auto& p : b.vertices_) p += v;
    if (b.kind_ == BodyKind::polytope) {
      b.support_ = polytope_support(b.vertices_);
      return b;
    }
  }
  b.center_ += v;
  b.support_ = add(body.support_, SphericalFunction::linear(v));
  return b;
}

double convexity_certificate(const ConvexBody& body, const SphereGrid& grid) {
  if (!body.is_smooth())
    throw InvalidArgument("convexity_certificate: body of kind " + to_string(body.kind()) +
                          " has no smooth support function");
  return curvature_sweep(body.support(), grid).min_eigenvalue;
}

std::vector<Vec> geodesic_sphere(int level) {
  if (level < 0) throw InvalidArgument("geodesic_sphere: negative level");
  std::vector<Eigen::Vector3d> verts;
  for (int i = 0; i < 3; ++i) {
    verts.push_back(Eigen::Vector3d::Unit(i));
    verts.push_back(-Eigen::Vector3d::Unit(i));
  }
  // Faces of the octahedron, indices into verts (+x, -x, +y, -y, +z, -z).
  std::vector<std::array<int, 3>> faces{{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                                        {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int id = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(4 * faces.size());
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  std::vector<Vec> out;
  out.reserve(verts.size());
  for (const auto& v : verts) out.emplace_back(v);
  return out;
}

ConvexBody make_ball_polytope(int level, double radius) {
  std::vector<Vec> v = geodesic_sphere(level);
  for (auto& p : v) p *= radius;
  return make_polytope(std::move(v));
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json vec_json(const Vec& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec json_vec(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw InvalidArgument(std::string("body json: ") + what + " must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidArgument(std::string("body json: ") + what + " entries must be numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

double json_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw InvalidArgument(std::string("body json: missing numeric field \"") + key + "\"");
  return j.at(key).get<double>();
}

}  // namespace

nlohmann::json body_to_json(const ConvexBody& body) {
  nlohmann::json j;
  j["kind"] = to_string(body.kind());
  switch (body.kind()) {
    case BodyKind::ellipsoid: {
      nlohmann::json rows = nlohmann::json::array();
      for (Eigen::Index r = 0; r < body.matrix().rows(); ++r) rows.push_back(vec_json(body.matrix().row(r).transpose()));
      j["matrix"] = rows;
      break;
    }
    case BodyKind::ball:
      j["radius"] = body.radius();
      break;
    case BodyKind::perturbed_ball: {
      j["radius"] = body.radius();
      nlohmann::json c = nlohmann::json::object();
      for (const auto& [key, value] : body.coeffs()) c[key] = value;
      j["coeffs"] = c;
      break;
    }
    case BodyKind::polytope: {
      nlohmann::json verts = nlohmann::json::array();
      for (const auto& v : body.vertices()) verts.push_back(vec_json(v));
      j["vertices"] = verts;
      return j;
    }
    case BodyKind::minkowski_combination: {
      nlohmann::json terms = nlohmann::json::array();
      for (const auto& [lambda, b] : body.terms())
        terms.push_back({{"lambda", lambda}, {"body", body_to_json(b)}});
      j["terms"] = terms;
      break;
    }
  }
  if (body.center().size() > 0 && !body.center().isZero(0.0)) j["center"] = vec_json(body.center());
  return j;
}

ConvexBody body_from_json(const nlohmann::json& j, int n) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw InvalidArgument("body json: expected an object with a string \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  const Vec center = j.contains("center") ? json_vec(j.at("center"), "center") : Vec();

  if (kind == "ellipsoid") {
    if (!j.contains("matrix") || !j.at("matrix").is_array())
      throw InvalidArgument("body json: ellipsoid needs \"matrix\"");
    const auto& rows = j.at("matrix");
    const auto size = static_cast<Eigen::Index>(rows.size());
    Mat a(size, size);
    for (Eigen::Index r = 0; r < size; ++r) {
      const Vec row = json_vec(rows[r], "matrix row");
      if (row.size() != size) throw InvalidArgument("body json: ellipsoid matrix must be square");
      a.row(r) = row.transpose();
    }
    return make_ellipsoid(a, center);
  }
  if (kind == "ball") return make_ball(n, json_number(j, "radius"), center);
  if (kind == "perturbed_ball") {
    std::map<std::string, double> coeffs;
    if (j.contains("coeffs")) {
      if (!j.at("coeffs").is_object()) throw InvalidArgument("body json: coeffs must be an object");
      for (const auto& [key, value] : j.at("coeffs").items()) {
        if (!value.is_number()) throw InvalidArgument("body json: coefficient " + key + " is not a number");
        coeffs[key] = value.get<double>();
      }
    }
    int max_l = 0;
    for (const auto& [key, value] : coeffs) max_l = std::max(max_l, std::atoi(key.c_str()));
    const SphereGrid grid = build_grid(n, std::max(20, 2 * max_l + 8));
    return make_perturbed_ball(json_number(j, "radius"), coeffs, grid, n, center);
  }
  if (kind == "polytope") {
    if (!j.contains("vertices") || !j.at("vertices").is_array())
      throw InvalidArgument("body json: polytope needs \"vertices\"");
    std::vector<Vec> verts;
    for (const auto& v : j.at("vertices")) verts.push_back(json_vec(v, "vertex"));
    ConvexBody b = make_polytope(std::move(verts));
    return center.size() ? translate(b, center) : b;
  }
  if (kind == "minkowski_combination") {
    if (!j.contains("terms") || !j.at("terms").is_array())
      throw InvalidArgument("body json: minkowski_combination needs \"terms\"");
    std::vector<ConvexBody> bodies;
    std::vector<double> lambdas;
    for (const auto& t : j.at("terms")) {
      lambdas.push_back(json_number(t, "lambda"));
      if (!t.contains("body")) throw InvalidArgument("body json: term without \"body\"");
      bodies.push_back(body_from_json(t.at("body"), n));
    }
    ConvexBody b = minkowski_support(bodies, lambdas);
    return center.size() ? translate(b, center) : b;
  }
  throw InvalidArgument("body json: unknown kind \"" + kind + "\"");
}

}  // namespace valforge
