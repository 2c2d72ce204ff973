#include "valforge/hull.hpp"

#include "valforge/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace valforge {

namespace {

struct RidgeHash {
  std::size_t operator()(const std::vector<int>& key) const {
    std::size_t h = 1469598103934665603ull;
    for (int v : key) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

struct Facet {
  std::vector<int> verts;
  Vec normal;
  double offset = 0.0;
  std::vector<int> outside;
  bool alive = true;
  long stamp = -1;
};

double extent_of(std::span<const Vec> pts) {
  double s = 0.0;
  for (const auto& p : pts) s = std::max(s, p.cwiseAbs().maxCoeff());
  return std::max(s, 1e-300);
}

// Greedy affinely independent subset: indices of up to dim+1 points, each
// maximizing its distance from the affine span of the previous ones.
std::vector<int> spanning_points(std::span<const Vec> pts, double tol) {
  std::vector<int> chosen;
  if (pts.empty()) return chosen;
  const Eigen::Index n = pts.front().size();
  int first = 0;
  for (int i = 1; i < static_cast<int>(pts.size()); ++i)
    if (pts[i](0) < pts[first](0)) first = i;
  chosen.push_back(first);
  std::vector<Vec> basis;
  while (static_cast<Eigen::Index>(chosen.size()) <= n) {
    int best = -1;
    double best_dist = tol;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      Vec d = pts[i] - pts[first];
      for (const auto& q : basis) d -= d.dot(q) * q;
      const double dist = d.norm();
      if (dist > best_dist) {
        best_dist = dist;
        best = i;
      }
    }
    if (best < 0) break;
    Vec d = pts[best] - pts[first];
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) d -= d.dot(q) * q;
    basis.push_back(d.normalized());
    chosen.push_back(best);
  }
  return chosen;
}

class QuickHull {
 public:
  QuickHull(std::span<const Vec> pts, double eps) : pts_(pts), n_(static_cast<int>(pts.front().size())), eps_(eps) {}

  void run(const std::vector<int>& simplex) {
    interior_ = Vec::Zero(n_);
    for (int v : simplex) interior_ += pts_[v];
    interior_ /= static_cast<double>(simplex.size());

    for (int omit = 0; omit <= n_; ++omit) {
      std::vector<int> verts;
      for (int i = 0; i <= n_; ++i)
        if (i != omit) verts.push_back(simplex[i]);
      add_facet(std::move(verts));
    }

    std::vector<char> in_simplex(pts_.size(), 0);
    for (int v : simplex) in_simplex[v] = 1;
    const int initial = static_cast<int>(facets_.size());
    for (int i = 0; i < static_cast<int>(pts_.size()); ++i) {
      if (in_simplex[i]) continue;
      for (int f = 0; f < initial; ++f) {
        if (distance(f, i) > eps_) {
          facets_[f].outside.push_back(i);
          break;
        }
      }
    }

    std::vector<int> work(initial);
    std::iota(work.begin(), work.end(), 0);
    long stamp = 0;
    while (!work.empty()) {
      const int fid = work.back();
      work.pop_back();
      if (!facets_[fid].alive || facets_[fid].outside.empty()) continue;

      int apex = -1;
      double far = -1.0;
      for (int p : facets_[fid].outside) {
        const double d = distance(fid, p);
        if (d > far) {
          far = d;
          apex = p;
        }
      }

      // Facets visible from the apex, connected through shared ridges.
      // Near-coplanar neighbours count as visible so no degenerate cone
      // facets are created over ridges the apex lies on.
      ++stamp;
      std::vector<int> visible{fid};
      facets_[fid].stamp = stamp;
      std::vector<std::pair<std::vector<int>, int>> horizon;
      for (std::size_t head = 0; head < visible.size(); ++head) {
        const int v = visible[head];
        for (auto& ridge : ridges_of(facets_[v].verts)) {
          const int nb = neighbour(ridge, v);
          if (nb < 0) continue;
          if (facets_[nb].stamp == stamp) continue;
          if (distance(nb, apex) > -eps_) {
            facets_[nb].stamp = stamp;
            visible.push_back(nb);
          }
        }
      }
      for (int v : visible) {
        for (auto& ridge : ridges_of(facets_[v].verts)) {
          const int nb = neighbour(ridge, v);
          if (nb >= 0 && facets_[nb].stamp != stamp) horizon.emplace_back(ridge, nb);
        }
      }

      std::vector<int> orphans;
      for (int v : visible) {
        for (int p : facets_[v].outside)
          if (p != apex) orphans.push_back(p);
        facets_[v].outside.clear();
        remove_facet(v);
      }

      std::vector<int> created;
      created.reserve(horizon.size());
      for (auto& [ridge, nb] : horizon) {
        std::vector<int> verts = ridge;
        verts.push_back(apex);
        created.push_back(add_facet(std::move(verts)));
      }
      for (int p : orphans) {
        for (int f : created) {
          if (distance(f, p) > eps_) {
            facets_[f].outside.push_back(p);
            break;
          }
        }
      }
      for (int f : created)
        if (!facets_[f].outside.empty()) work.push_back(f);
    }
  }

  HullResult result() const {
    HullResult r;
    r.dimension = n_;
    r.full_dimensional = true;
    std::vector<char> used(pts_.size(), 0);
    double vol = 0.0;
    Mat m(n_, n_);
    for (const auto& f : facets_) {
      if (!f.alive) continue;
      std::vector<std::size_t> verts(f.verts.begin(), f.verts.end());
      r.facets.push_back(verts);
      for (int i = 0; i < n_; ++i) {
        used[f.verts[i]] = 1;
        m.row(i) = (pts_[f.verts[i]] - interior_).transpose();
      }
      vol += std::abs(m.determinant());
    }
    r.volume = vol / std::tgamma(n_ + 1.0);
    for (std::size_t i = 0; i < used.size(); ++i)
      if (used[i]) r.vertices.push_back(i);
    return r;
  }

 private:
  double distance(int f, int p) const {
    return facets_[f].normal.dot(pts_[p]) - facets_[f].offset;
  }

  std::vector<std::vector<int>> ridges_of(const std::vector<int>& verts) const {
    std::vector<std::vector<int>> out;
    out.reserve(verts.size());
    for (std::size_t omit = 0; omit < verts.size(); ++omit) {
      std::vector<int> r;
      r.reserve(verts.size() - 1);
      for (std::size_t i = 0; i < verts.size(); ++i)
        if (i != omit) r.push_back(verts[i]);
      std::sort(r.begin(), r.end());
      out.push_back(std::move(r));
    }
    return out;
  }

  int neighbour(const std::vector<int>& ridge, int self) const {
    const auto it = ridges_.find(ridge);
    if (it == ridges_.end()) return -1;
    return it->second[0] == self ? it->second[1] : it->second[0];
  }

  Vec facet_normal(const std::vector<int>& verts) const {
    const Vec& p0 = pts_[verts[0]];
    if (n_ == 3) {
      const Eigen::Vector3d a = pts_[verts[1]] - p0;
      const Eigen::Vector3d b = pts_[verts[2]] - p0;
      const Eigen::Vector3d c = a.cross(b);
      const double norm = c.norm();
      if (norm > 0.0) return Vec(c / norm);
    }
    if (n_ == 2) {
      const Vec d = pts_[verts[1]] - p0;
      Vec nrm(2);
      nrm << d(1), -d(0);
      const double norm = nrm.norm();
      if (norm > 0.0) return nrm / norm;
    }
    Mat diffs(n_ - 1, n_);
    for (int i = 1; i < n_; ++i) diffs.row(i - 1) = (pts_[verts[i]] - p0).transpose();
    Eigen::JacobiSVD<Mat> svd(diffs, Eigen::ComputeFullV);
    return svd.matrixV().col(n_ - 1);
  }

  int add_facet(std::vector<int> verts) {
    Facet f;
    f.normal = facet_normal(verts);
    f.offset = f.normal.dot(pts_[verts[0]]);
    if (f.normal.dot(interior_) - f.offset > 0.0) {
      f.normal = -f.normal;
      f.offset = -f.offset;
    }
    f.verts = std::move(verts);
    const int id = static_cast<int>(facets_.size());
    for (auto& ridge : ridges_of(f.verts)) {
      auto [it, inserted] = ridges_.try_emplace(std::move(ridge), std::array<int, 2>{-1, -1});
      auto& slot = it->second;
      if (slot[0] < 0)
        slot[0] = id;
      else
        slot[1] = id;
    }
    facets_.push_back(std::move(f));
    return id;
  }

  void remove_facet(int id) {
    facets_[id].alive = false;
    for (auto& ridge : ridges_of(facets_[id].verts)) {
      auto it = ridges_.find(ridge);
      if (it == ridges_.end()) continue;
      auto& slot = it->second;
      if (slot[0] == id) slot[0] = -1;
      if (slot[1] == id) slot[1] = -1;
      if (slot[0] < 0 && slot[1] < 0) {
        ridges_.erase(it);
      } else if (slot[0] < 0) {
        std::swap(slot[0], slot[1]);
      }
    }
  }

  std::span<const Vec> pts_;
  int n_;
  double eps_;
  Vec interior_;
  std::vector<Facet> facets_;
  std::unordered_map<std::vector<int>, std::array<int, 2>, RidgeHash> ridges_;
};

// Coordinates of the points in an orthonormal frame of their affine span.
std::vector<Vec> to_affine_frame(std::span<const Vec> pts, const std::vector<int>& spanning) {
  const Vec& origin = pts[spanning[0]];
  std::vector<Vec> basis;
  for (std::size_t k = 1; k < spanning.size(); ++k) {
    Vec d = pts[spanning[k]] - origin;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis) d -= d.dot(q) * q;
    basis.push_back(d.normalized());
  }
  std::vector<Vec> out;
  out.reserve(pts.size());
  for (const auto& p : pts) {
    Vec c(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t k = 0; k < basis.size(); ++k) c(k) = (p - origin).dot(basis[k]);
    out.push_back(std::move(c));
  }
  return out;
}

// Indices of the extreme points of a point set of any affine dimension.
std::vector<std::size_t> extreme_points(std::span<const Vec> pts) {
  if (pts.empty()) return {};
  const double tol = 1e-10 * extent_of(pts);
  const std::vector<int> spanning = spanning_points(pts, tol);
  const int dim = static_cast<int>(spanning.size()) - 1;
  if (dim == 0) return {static_cast<std::size_t>(spanning[0])};
  const std::vector<Vec> local = to_affine_frame(pts, spanning);
  if (dim == 1) {
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 1; i < local.size(); ++i) {
      if (local[i](0) < local[lo](0)) lo = i;
      if (local[i](0) > local[hi](0)) hi = i;
    }
    return {lo, hi};
  }
  return convex_hull(local).vertices;
}

}  // namespace

int affine_dimension(std::span<const Vec> points) {
  if (points.empty()) return -1;
  return static_cast<int>(spanning_points(points, 1e-10 * extent_of(points)).size()) - 1;
}

HullResult convex_hull(std::span<const Vec> points) {
  if (points.empty()) throw InvalidArgument("convex_hull: empty point set");
  const int n = static_cast<int>(points.front().size());
  if (n < 2) throw InvalidArgument("convex_hull: dimension must be >= 2");
  for (const auto& p : points)
    if (p.size() != n) throw InvalidArgument("convex_hull: mixed point dimensions");

  const double scale = extent_of(points);
  const std::vector<int> simplex = spanning_points(points, 1e-10 * scale);
  if (static_cast<int>(simplex.size()) < n + 1) {
    HullResult r;
    r.dimension = n;
    r.full_dimensional = false;
    r.volume = 0.0;
    r.vertices = extreme_points(points);
    return r;
  }
  QuickHull qh(points, 1e-12 * scale * n);
  qh.run(simplex);
  return qh.result();
}

std::vector<Vec> minkowski_sum_vertices(std::span<const Vec> a, std::span<const Vec> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("minkowski_sum_vertices: empty summand");
  std::vector<Vec> sums;
  sums.reserve(a.size() * b.size());
  for (const auto& p : a)
    for (const auto& q : b) sums.push_back(p + q);
  std::vector<Vec> out;
  for (std::size_t i : extreme_points(sums)) out.push_back(sums[i]);
  return out;
}

}  // namespace valforge
