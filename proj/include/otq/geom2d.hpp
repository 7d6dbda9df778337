#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace otq {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

using Point2 = Eigen::Vector2d;

/// N sites stored one per row. Row index is the site identity.
using PointCloud = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Tag carried by polygon edges that lie on the domain boundary.
inline constexpr int kBoundaryEdge = -1;

/// Closed half-plane {x : normal . x <= offset}, stored with a unit normal so
/// that `signed_distance` is a true Euclidean distance.
template <typename Scalar>
struct HalfPlane {
  Vector2<Scalar> normal;
  Scalar offset;

  HalfPlane(const Vector2<Scalar>& a, Scalar b) {
    const Scalar len = a.norm();
    if (!(len > Scalar(0)) || !std::isfinite(len)) {
      throw std::invalid_argument("half-plane normal must be nonzero and finite");
    }
    normal = a / len;
    offset = b / len;
  }

  Scalar signed_distance(const Vector2<Scalar>& x) const { return normal.dot(x) - offset; }
};

/// Absolute tolerances used by the clipping predicates.
template <typename Scalar>
struct GeomTolerance {
  Scalar length;
  Scalar area;
};

/// Counterclockwise convex polygon. Edge k joins vertex k to vertex k+1 and
/// carries `edge_tags()[k]`: the index of the site whose bisector created it,
/// or kBoundaryEdge.
template <typename Scalar>
class ConvexPolygon {
 public:
  using Vec = Vector2<Scalar>;

  ConvexPolygon() = default;

  explicit ConvexPolygon(std::vector<Vec> vertices, std::vector<int> tags = {})
      : vertices_(std::move(vertices)), tags_(std::move(tags)) {
    if (tags_.empty()) tags_.assign(vertices_.size(), kBoundaryEdge);
    if (tags_.size() != vertices_.size()) {
      throw std::invalid_argument("one edge tag per vertex expected");
    }
    if (vertices_.size() >= 3 && signed_area() < Scalar(0)) {
      std::reverse(vertices_.begin(), vertices_.end());
      // edge k now runs from old vertex n-1-k to old vertex n-2-k
      std::vector<int> t(tags_.size());
      const std::size_t n = tags_.size();
      for (std::size_t k = 0; k < n; ++k) t[k] = tags_[(2 * n - 2 - k) % n];
      tags_ = std::move(t);
    }
  }

  static ConvexPolygon rectangle(Scalar x0, Scalar y0, Scalar x1, Scalar y1) {
    return ConvexPolygon({Vec(x0, y0), Vec(x1, y0), Vec(x1, y1), Vec(x0, y1)});
  }

  const std::vector<Vec>& vertices() const { return vertices_; }
  const std::vector<int>& edge_tags() const { return tags_; }
  const Vec& vertex(std::size_t k) const { return vertices_[k]; }
  std::size_t size() const { return vertices_.size(); }
  bool empty() const { return vertices_.size() < 3; }

  Scalar signed_area() const {
    Scalar a(0);
    const std::size_t n = vertices_.size();
    if (n < 3) return a;
    const Vec& o = vertices_[0];
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const Vec u = vertices_[k] - o;
      const Vec v = vertices_[k + 1] - o;
      a += u.x() * v.y() - u.y() * v.x();
    }
    return a / Scalar(2);
  }

  Scalar area() const { return empty() ? Scalar(0) : std::abs(signed_area()); }

  Vec centroid() const {
    Vec c = Vec::Zero();
    const std::size_t n = vertices_.size();
    if (n == 0) return c;
    if (n < 3) {
      for (const auto& v : vertices_) c += v;
      return c / Scalar(n);
    }
    Scalar a2(0);
    const Vec& o = vertices_[0];
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const Vec u = vertices_[k] - o;
      const Vec v = vertices_[k + 1] - o;
      const Scalar cr = u.x() * v.y() - u.y() * v.x();
      a2 += cr;
      c += cr * (u + v);
    }
    return o + c / (Scalar(3) * a2);
  }

  /// Largest vertex-to-vertex distance.
  Scalar diameter() const {
    Scalar d(0);
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
      for (std::size_t j = i + 1; j < vertices_.size(); ++j) {
        d = std::max(d, (vertices_[i] - vertices_[j]).norm());
      }
    }
    return d;
  }

  Eigen::AlignedBox<Scalar, 2> bounding_box() const {
    Eigen::AlignedBox<Scalar, 2> box;
    for (const auto& v : vertices_) box.extend(v);
    return box;
  }

  /// Point-in-polygon with a boundary slack of `tol`.
  bool contains(const Vec& p, Scalar tol = Scalar(0)) const {
    const std::size_t n = vertices_.size();
    if (n < 3) return false;
    for (std::size_t k = 0; k < n; ++k) {
      const Vec e = vertices_[(k + 1) % n] - vertices_[k];
      const Vec w = p - vertices_[k];
      const Scalar len = e.norm();
      if (len == Scalar(0)) continue;
      if ((e.x() * w.y() - e.y() * w.x()) / len < -tol) return false;
    }
    return true;
  }

  GeomTolerance<Scalar> default_tolerance() const {
    const auto box = bounding_box();
    const Scalar diag = empty() ? Scalar(0) : box.diagonal().norm();
    return {Scalar(1e-12) * diag, Scalar(1e-14) * area()};
  }

 private:
  std::vector<Vec> vertices_;
  std::vector<int> tags_;
};

using Polygon2d = ConvexPolygon<double>;
using HalfPlane2d = HalfPlane<double>;

/// poly ∩ h. Vertices within `tol.length` of the boundary line count as on it;
/// results below `tol.area` collapse to the empty polygon. The new edge along
/// the clipping line carries `tag`.
template <typename Scalar>
ConvexPolygon<Scalar> clip(const ConvexPolygon<Scalar>& poly, const HalfPlane<Scalar>& h,
                           int tag, const GeomTolerance<Scalar>& tol) {
  using Vec = Vector2<Scalar>;
  const auto& vs = poly.vertices();
  const auto& tags = poly.edge_tags();
  const std::size_t n = vs.size();
  if (n < 3) return {};

  // sign: -1 strictly inside, 0 on the line, +1 strictly outside
  std::vector<Scalar> s(n);
  std::vector<int> side(n);
  bool any_out = false, any_in = false;
  for (std::size_t k = 0; k < n; ++k) {
    s[k] = h.signed_distance(vs[k]);
    side[k] = s[k] > tol.length ? 1 : (s[k] < -tol.length ? -1 : 0);
    any_out |= side[k] > 0;
    any_in |= side[k] < 0;
  }
  if (!any_out) return poly;
  if (!any_in) return {};

  std::vector<Vec> out;
  std::vector<int> out_tags;
  out.reserve(n + 2);
  out_tags.reserve(n + 2);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t k1 = (k + 1) % n;
    if (side[k] <= 0) {
      if (side[k1] > 0) {
        if (side[k] < 0) {
          out.push_back(vs[k]);
          out_tags.push_back(tags[k]);
          const Scalar t = s[k] / (s[k] - s[k1]);
          out.push_back(vs[k] + t * (vs[k1] - vs[k]));
          out_tags.push_back(tag);
        } else {
          out.push_back(vs[k]);
          out_tags.push_back(tag);
        }
      } else {
        out.push_back(vs[k]);
        out_tags.push_back(tags[k]);
      }
    } else if (side[k1] < 0) {
      const Scalar t = s[k] / (s[k] - s[k1]);
      out.push_back(vs[k] + t * (vs[k1] - vs[k]));
      out_tags.push_back(tags[k]);
    }
  }

  // merge near-coincident neighbours; the survivor keeps the later outgoing tag
  std::vector<Vec> merged;
  std::vector<int> merged_tags;
  merged.reserve(out.size());
  merged_tags.reserve(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (!merged.empty() && (out[k] - merged.back()).norm() <= tol.length) {
      merged_tags.back() = out_tags[k];
      continue;
    }
    merged.push_back(out[k]);
    merged_tags.push_back(out_tags[k]);
  }
  while (merged.size() > 1 && (merged.back() - merged.front()).norm() <= tol.length) {
    merged_tags.front() = merged_tags.back();
    merged.front() = merged.back();
    merged.pop_back();
    merged_tags.pop_back();
  }
  if (merged.size() < 3) return {};

  ConvexPolygon<Scalar> result(std::move(merged), std::move(merged_tags));
  if (!(result.signed_area() > tol.area)) return {};
  return result;
}

template <typename Scalar>
ConvexPolygon<Scalar> clip(const ConvexPolygon<Scalar>& poly, const HalfPlane<Scalar>& h,
                           int tag = kBoundaryEdge) {
  return clip(poly, h, tag, poly.default_tolerance());
}

/// One shared edge between two power cells.
struct Facet {
  int neighbor;
  double length;
  Point2 a;
  Point2 b;
};

/// Power cells of (Y, phi) restricted to a convex domain.
struct PowerDiagram {
  std::vector<Polygon2d> cells;
  /// neighbors[i] lists every cell sharing an edge of positive length with i,
  /// sorted by neighbor index.
  std::vector<std::vector<Facet>> neighbors;

  std::size_t size() const { return cells.size(); }
  /// Zero when i and j are not adjacent.
  double shared_edge_length(int i, int j) const;
};

/// The half-plane of points where site i beats site j in the power comparison
/// ‖x−y_i‖²−φ_i ≤ ‖x−y_j‖²−φ_j.
HalfPlane2d power_halfplane(const Point2& yi, double phi_i, const Point2& yj, double phi_j);

/// Single power cell, clipped by every other site. Throws DuplicateSites.
Polygon2d power_cell(int i, const PointCloud& sites, const Eigen::VectorXd& phi,
                     const Polygon2d& domain);

/// All power cells plus adjacency. `hint` (typically the diagram of a nearby
/// potential vector) only affects the clipping order, never the result.
PowerDiagram power_diagram(const PointCloud& sites, const Eigen::VectorXd& phi,
                           const Polygon2d& domain, const PowerDiagram* hint = nullptr);

/// Throws DuplicateSites if two rows of `sites` are identical.
void check_distinct(const PointCloud& sites);

/// min_{i≠j} ‖y_i − y_j‖, +inf for fewer than two sites.
double min_pairwise_distance(const PointCloud& sites);

}  // namespace otq
