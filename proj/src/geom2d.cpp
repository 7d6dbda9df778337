#include "otq/geom2d.hpp"

#include "otq/errors.hpp"
#include "otq/parallel.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <limits>
#include <numeric>

namespace otq {

double PowerDiagram::shared_edge_length(int i, int j) const {
  for (const auto& f : neighbors[static_cast<std::size_t>(i)]) {
    if (f.neighbor == j) return f.length;
  }
  return 0.0;
}

HalfPlane2d power_halfplane(const Point2& yi, double phi_i, const Point2& yj, double phi_j) {
  const Point2 d = yj - yi;
  // ‖y_j‖² − ‖y_i‖² written as a product to keep the difference accurate
  const double b = d.dot(yj + yi) - phi_j + phi_i;
  return HalfPlane2d(2.0 * d, b);
}

void check_distinct(const PointCloud& sites) {
  const auto n = static_cast<int>(sites.rows());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (sites(a, 0) != sites(b, 0)) return sites(a, 0) < sites(b, 0);
    if (sites(a, 1) != sites(b, 1)) return sites(a, 1) < sites(b, 1);
    return a < b;
  });
  for (int k = 1; k < n; ++k) {
    const int a = order[static_cast<std::size_t>(k - 1)];
    const int b = order[static_cast<std::size_t>(k)];
    if (sites(a, 0) == sites(b, 0) && sites(a, 1) == sites(b, 1)) {
      throw DuplicateSites(std::min(a, b), std::max(a, b));
    }
  }
}

double min_pairwise_distance(const PointCloud& sites) {
  double best = std::numeric_limits<double>::infinity();
  const auto n = sites.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      best = std::min(best, (sites.row(i) - sites.row(j)).squaredNorm());
    }
  }
  return std::sqrt(best);
}

Polygon2d power_cell(int i, const PointCloud& sites, const Eigen::VectorXd& phi,
                     const Polygon2d& domain) {
  const auto n = static_cast<int>(sites.rows());
  if (i < 0 || i >= n) throw std::out_of_range("site index out of range");
  const auto tol = domain.default_tolerance();
  const Point2 yi = sites.row(i).transpose();
  Polygon2d cell = domain;
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const Point2 yj = sites.row(j).transpose();
    if (yj == yi) throw DuplicateSites(std::min(i, j), std::max(i, j));
    if (cell.empty()) continue;
    cell = clip(cell, power_halfplane(yi, phi(i), yj, phi(j)), j, tol);
  }
  return cell;
}

namespace {

struct Disk {
  Point2 center;
  double radius;
};

Disk bounding_disk(const Polygon2d& poly) {
  Point2 c = Point2::Zero();
  for (const auto& v : poly.vertices()) c += v;
  c /= static_cast<double>(poly.size());
  double r2 = 0.0;
  for (const auto& v : poly.vertices()) r2 = std::max(r2, (v - c).squaredNorm());
  return {c, std::sqrt(r2)};
}

/// Uniform bucket grid over the sites, with the largest potential per bucket.
class SiteGrid {
 public:
  SiteGrid(const PointCloud& sites, const Eigen::VectorXd& phi, const Polygon2d& domain) {
    Eigen::AlignedBox2d box = domain.bounding_box();
    for (Eigen::Index i = 0; i < sites.rows(); ++i) box.extend(Point2(sites.row(i).transpose()));
    origin_ = box.min();
    const Point2 ext = box.sizes().cwiseMax(1e-300);
    const double per_side = std::ceil(std::sqrt(static_cast<double>(sites.rows()) / 2.0));
    const double h = std::max(ext.x(), ext.y()) / std::max(per_side, 1.0);
    nx_ = std::max(1, static_cast<int>(std::ceil(ext.x() / h)));
    ny_ = std::max(1, static_cast<int>(std::ceil(ext.y() / h)));
    hx_ = ext.x() / nx_;
    hy_ = ext.y() / ny_;
    hmin_ = std::min(hx_, hy_);

    const std::size_t nb = static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
    std::vector<int> count(nb + 1, 0);
    std::vector<int> bucket_of(static_cast<std::size_t>(sites.rows()));
    for (Eigen::Index i = 0; i < sites.rows(); ++i) {
      const int b = bucket_index(ix(sites(i, 0)), iy(sites(i, 1)));
      bucket_of[static_cast<std::size_t>(i)] = b;
      ++count[static_cast<std::size_t>(b) + 1];
    }
    std::partial_sum(count.begin(), count.end(), count.begin());
    start_ = count;
    items_.resize(static_cast<std::size_t>(sites.rows()));
    max_phi_.assign(nb, -std::numeric_limits<double>::infinity());
    std::vector<int> fill = start_;
    for (Eigen::Index i = 0; i < sites.rows(); ++i) {
      const auto b = static_cast<std::size_t>(bucket_of[static_cast<std::size_t>(i)]);
      items_[static_cast<std::size_t>(fill[b]++)] = static_cast<int>(i);
      max_phi_[b] = std::max(max_phi_[b], phi(i));
    }
  }

  int ix(double x) const {
    return std::clamp(static_cast<int>(std::floor((x - origin_.x()) / hx_)), 0, nx_ - 1);
  }
  int iy(double y) const {
    return std::clamp(static_cast<int>(std::floor((y - origin_.y()) / hy_)), 0, ny_ - 1);
  }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double hmin() const { return hmin_; }
  int bucket_index(int bx, int by) const { return by * nx_ + bx; }

  double distance_to_bucket(const Point2& p, int bx, int by) const {
    const double x0 = origin_.x() + bx * hx_;
    const double y0 = origin_.y() + by * hy_;
    const double dx = std::max({x0 - p.x(), 0.0, p.x() - (x0 + hx_)});
    const double dy = std::max({y0 - p.y(), 0.0, p.y() - (y0 + hy_)});
    return std::hypot(dx, dy);
  }

  double max_phi(int b) const { return max_phi_[static_cast<std::size_t>(b)]; }

  template <typename Fn>
  void for_each_in(int b, Fn&& fn) const {
    for (int k = start_[static_cast<std::size_t>(b)]; k < start_[static_cast<std::size_t>(b) + 1]; ++k) {
      fn(items_[static_cast<std::size_t>(k)]);
    }
  }

 private:
  Point2 origin_;
  int nx_ = 1, ny_ = 1;
  double hx_ = 1.0, hy_ = 1.0, hmin_ = 1.0;
  std::vector<int> start_;
  std::vector<int> items_;
  std::vector<double> max_phi_;
};

/// Visits buckets at Chebyshev distance exactly `ring` from (cx, cy).
template <typename Fn>
bool for_each_ring_bucket(const SiteGrid& grid, int cx, int cy, int ring, Fn&& fn) {
  bool any = false;
  const int x0 = cx - ring, x1 = cx + ring, y0 = cy - ring, y1 = cy + ring;
  auto visit = [&](int bx, int by) {
    if (bx < 0 || by < 0 || bx >= grid.nx() || by >= grid.ny()) return;
    any = true;
    fn(bx, by);
  };
  if (ring == 0) {
    visit(cx, cy);
    return any;
  }
  for (int bx = x0; bx <= x1; ++bx) {
    visit(bx, y0);
    visit(bx, y1);
  }
  for (int by = y0 + 1; by <= y1 - 1; ++by) {
    visit(x0, by);
    visit(x1, by);
  }
  return any;
}

class CellBuilder {
 public:
  CellBuilder(const PointCloud& sites, const Eigen::VectorXd& phi, const Polygon2d& domain,
              const SiteGrid& grid, double phi_max)
      : sites_(sites), phi_(phi), domain_(domain), grid_(grid), phi_max_(phi_max),
        tol_(domain.default_tolerance()) {}

  Polygon2d build(int i, const std::vector<Facet>* hint) const {
    const Point2 yi = sites_.row(i).transpose();
    const double phi_i = phi_(i);
    Polygon2d cell = domain_;
    Disk disk = bounding_disk(cell);

    auto try_site = [&](int j) {
      if (j == i || cell.empty()) return;
      const Point2 yj = sites_.row(j).transpose();
      const Point2 d = yj - yi;
      const double b = d.dot(yj + yi) - phi_(j) + phi_i;
      if (2.0 * d.dot(disk.center) + 2.0 * d.norm() * disk.radius <= b) return;
      cell = clip(cell, HalfPlane2d(2.0 * d, b), j, tol_);
      if (!cell.empty()) disk = bounding_disk(cell);
    };

    if (hint != nullptr) {
      for (const auto& f : *hint) try_site(f.neighbor);
    } else {
      const int bx = grid_.ix(yi.x()), by = grid_.iy(yi.y());
      for (int ring = 0; ring <= 1; ++ring) {
        for_each_ring_bucket(grid_, bx, by, ring,
                             [&](int x, int y) { grid_.for_each_in(grid_.bucket_index(x, y), try_site); });
      }
    }
    if (cell.empty()) return cell;

    const Point2 c0 = disk.center;
    const int cx = grid_.ix(c0.x()), cy = grid_.iy(c0.y());
    const int max_ring = std::max(grid_.nx(), grid_.ny()) + 1;
    for (int ring = 0; ring <= max_ring && !cell.empty(); ++ring) {
      const double e = (disk.center - yi).norm();
      const double slack = (disk.radius + e) * (disk.radius + e);
      if (ring >= 1) {
        const double reach = (ring - 1) * grid_.hmin() - (disk.center - c0).norm();
        if (reach >= disk.radius) {
          const double gap = reach - disk.radius;
          if (gap * gap >= slack + phi_max_ - phi_i) break;
        }
      }
      const bool any = for_each_ring_bucket(grid_, cx, cy, ring, [&](int x, int y) {
        if (cell.empty()) return;
        const int b = grid_.bucket_index(x, y);
        const double dist = grid_.distance_to_bucket(disk.center, x, y);
        if (dist >= disk.radius) {
          const double gap = dist - disk.radius;
          if (gap * gap >= (disk.radius + (disk.center - yi).norm()) *
                                   (disk.radius + (disk.center - yi).norm()) +
                               grid_.max_phi(b) - phi_i) {
            return;
          }
        }
        grid_.for_each_in(b, try_site);
      });
      if (!any) break;
    }
    return cell;
  }

  double length_tolerance() const { return tol_.length; }

 private:
  const PointCloud& sites_;
  const Eigen::VectorXd& phi_;
  const Polygon2d& domain_;
  const SiteGrid& grid_;
  double phi_max_;
  GeomTolerance<double> tol_;
};

}  // namespace

PowerDiagram power_diagram(const PointCloud& sites, const Eigen::VectorXd& phi,
                           const Polygon2d& domain, const PowerDiagram* hint) {
  const auto n = static_cast<std::size_t>(sites.rows());
  if (static_cast<std::size_t>(phi.size()) != n) {
    throw std::invalid_argument("one potential per site expected");
  }
  check_distinct(sites);

  PowerDiagram diagram;
  diagram.cells.resize(n);
  diagram.neighbors.assign(n, {});
  if (n == 0) return diagram;

  const SiteGrid grid(sites, phi, domain);
  const double phi_max = phi.maxCoeff();
  const CellBuilder builder(sites, phi, domain, grid, phi_max);
  const bool use_hint = hint != nullptr && hint->neighbors.size() == n;

  std::vector<std::vector<Facet>> raw(n);
  parallel_for(n, [&](std::size_t i) {
    const auto* h = use_hint ? &hint->neighbors[i] : nullptr;
    Polygon2d cell = builder.build(static_cast<int>(i), h);
    const auto& vs = cell.vertices();
    const auto& tags = cell.edge_tags();
    for (std::size_t k = 0; k < vs.size(); ++k) {
      if (tags[k] < 0) continue;
      const Point2& a = vs[k];
      const Point2& b = vs[(k + 1) % vs.size()];
      const double len = (b - a).norm();
      if (len > builder.length_tolerance()) raw[i].push_back({tags[k], len, a, b});
    }
    diagram.cells[i] = std::move(cell);
  });

  // Symmetrize: a pair is adjacent if either side saw a positive-length edge.
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& f : raw[i]) {
      const auto j = static_cast<std::size_t>(f.neighbor);
      const Facet* other = nullptr;
      for (const auto& g : raw[j]) {
        if (g.neighbor == static_cast<int>(i)) {
          other = &g;
          break;
        }
      }
      if (other != nullptr && j < i) continue;  // already merged from j's side
      Facet merged = f;
      if (other != nullptr) merged.length = 0.5 * (f.length + other->length);
      diagram.neighbors[i].push_back(merged);
      Facet mirror{static_cast<int>(i), merged.length, merged.b, merged.a};
      diagram.neighbors[j].push_back(mirror);
    }
  }
  for (auto& list : diagram.neighbors) {
    std::sort(list.begin(), list.end(),
              [](const Facet& a, const Facet& b) { return a.neighbor < b.neighbor; });
    // a cell can touch the same neighbour through two collinear fragments
    std::vector<Facet> unique;
    for (const auto& f : list) {
      if (!unique.empty() && unique.back().neighbor == f.neighbor) {
        unique.back().length += f.length;
        continue;
      }
      unique.push_back(f);
    }
    list = std::move(unique);
  }
  return diagram;
}

}  // namespace otq
