#include "otq/density.hpp"

#include "otq/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace otq {

namespace {

struct Span {
  double lo;
  double hi;
};

// x-extent of poly ∩ {y = const}; caller guarantees the line meets poly.
Span horizontal_span(const Polygon2d& poly, double y) {
  Span s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  const auto& vs = poly.vertices();
  const std::size_t n = vs.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Point2& a = vs[k];
    const Point2& b = vs[(k + 1) % n];
    if (a.y() == y) {
      s.lo = std::min(s.lo, a.x());
      s.hi = std::max(s.hi, a.x());
    }
    if ((a.y() - y) * (b.y() - y) < 0.0) {
      const double x = a.x() + (y - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      s.lo = std::min(s.lo, x);
      s.hi = std::max(s.hi, x);
    }
  }
  return s;
}

}  // namespace

PolygonMoments polygon_area_moments(const Polygon2d& poly) {
  PolygonMoments m;
  if (poly.empty()) return m;
  const auto& vs = poly.vertices();
  const std::size_t n = vs.size();
  const Point2 o = vs[0];
  double a2 = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    // fan triangle (o, v_k, v_{k+1}) in local coordinates
    const Point2 u = vs[k] - o;
    const Point2 v = vs[k + 1] - o;
    const double cr = u.x() * v.y() - u.y() * v.x();
    a2 += cr;
    sx += cr * (u.x() + v.x());
    sy += cr * (u.y() + v.y());
    sxx += cr * (u.x() * u.x() + u.x() * v.x() + v.x() * v.x());
    syy += cr * (u.y() * u.y() + u.y() * v.y() + v.y() * v.y());
  }
  const double area = a2 / 2.0;
  const Point2 s1(sx / 6.0, sy / 6.0);
  const double s2 = (sxx + syy) / 12.0;
  m.mass = area;
  m.first = s1 + o * area;
  m.second_trace = s2 + 2.0 * o.dot(s1) + o.squaredNorm() * area;
  return m;
}

Density::Density(Grid values, const Eigen::AlignedBox2d& domain)
    : values_(std::move(values)), box_(domain) {
  if (values_.rows() < 1 || values_.cols() < 1) throw std::invalid_argument("empty density grid");
  if (!(box_.sizes().x() > 0.0) || !(box_.sizes().y() > 0.0)) {
    throw std::invalid_argument("density domain must have positive area");
  }
  if (!values_.allFinite() || values_.minCoeff() < 0.0) {
    throw std::invalid_argument("density values must be finite and nonnegative");
  }
  dx_ = box_.sizes().x() / static_cast<double>(values_.cols());
  dy_ = box_.sizes().y() / static_cast<double>(values_.rows());
  const double total = values_.sum() * dx_ * dy_;
  if (!(total > 0.0)) throw ZeroMass();
  values_ /= total;
  domain_ = Polygon2d::rectangle(box_.min().x(), box_.min().y(), box_.max().x(), box_.max().y());

  const auto h = values_.rows(), w = values_.cols();
  prefix0_.setZero(h, w + 1);
  prefix1_.setZero(h, w + 1);
  prefix2_.setZero(h, w + 1);
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      const double x0 = box_.min().x() + static_cast<double>(c) * dx_;
      const double x1 = x0 + dx_;
      const double v = values_(r, c);
      prefix0_(r, c + 1) = prefix0_(r, c) + v;
      prefix1_(r, c + 1) = prefix1_(r, c) + v * (x1 - x0) * (x1 + x0) / 2.0;
      prefix2_(r, c + 1) = prefix2_(r, c) + v * (x1 - x0) * (x1 * x1 + x1 * x0 + x0 * x0) / 3.0;
    }
  }

  cumulative_.resize(static_cast<std::size_t>(h * w));
  double acc = 0.0;
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      acc += values_(r, c) * dx_ * dy_;
      cumulative_[static_cast<std::size_t>(r * w + c)] = acc;
    }
  }
}

Density Density::uniform(const Eigen::AlignedBox2d& domain) {
  return Density(Grid::Ones(1, 1), domain);
}

Density Density::from_image(const GrayImage& image, bool gamma_dark) {
  if (image.width < 1 || image.height < 1 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height)) {
    throw std::invalid_argument("malformed image");
  }
  Grid g(image.height, image.width);
  for (int row = 0; row < image.height; ++row) {
    for (int col = 0; col < image.width; ++col) {
      const double gray = image.at(col, row);
      // image row 0 is the top band of the domain
      g(image.height - 1 - row, col) = gamma_dark ? 255.0 - gray : gray;
    }
  }
  if (!(g.sum() > 0.0)) throw ZeroMass();
  const double aspect = static_cast<double>(image.height) / static_cast<double>(image.width);
  return Density(std::move(g), Eigen::AlignedBox2d(Point2(0.0, 0.0), Point2(1.0, aspect)));
}

Density Density::analytic_gaussian2(double coef, int resolution) {
  if (resolution < 16) throw std::invalid_argument("resolution must be at least 16");
  Grid g(resolution, resolution);
  const double half = resolution / 2.0;
  std::vector<double> sq(static_cast<std::size_t>(resolution));
  for (int k = 0; k < resolution; ++k) {
    // (k + ½ − R/2) is exact, so mirrored pixels get bit-identical values
    const double t = (k + 0.5 - half) / resolution;
    sq[static_cast<std::size_t>(k)] = t * t;
  }
  for (int r = 0; r < resolution; ++r) {
    for (int c = 0; c < resolution; ++c) {
      g(r, c) = std::exp(-coef * (sq[static_cast<std::size_t>(c)] + sq[static_cast<std::size_t>(r)]));
    }
  }
  return Density(std::move(g), unit_square());
}

double Density::value_at(const Point2& p) const {
  if (!box_.contains(p)) return 0.0;
  const int c = std::clamp(static_cast<int>((p.x() - box_.min().x()) / dx_), 0, width() - 1);
  const int r = std::clamp(static_cast<int>((p.y() - box_.min().y()) / dy_), 0, height() - 1);
  return values_(r, c);
}

PolygonMoments Density::moments_of_row(const Polygon2d& poly, int row, double ymin,
                                       double ymax) const {
  PolygonMoments m;
  const double x0 = box_.min().x();
  const double yb = box_.min().y() + row * dy_;
  const double yt = yb + dy_;
  const GeomTolerance<double> tol{1e-15 * diameter(), 0.0};

  Polygon2d strip = clip(poly, HalfPlane2d(Point2(0.0, -1.0), -yb), kBoundaryEdge, tol);
  strip = clip(strip, HalfPlane2d(Point2(0.0, 1.0), yt), kBoundaryEdge, tol);
  if (strip.empty()) return m;

  double sx0 = std::numeric_limits<double>::infinity(), sx1 = -sx0;
  for (const auto& v : strip.vertices()) {
    sx0 = std::min(sx0, v.x());
    sx1 = std::max(sx1, v.x());
  }
  const int w = width();
  const int c0 = std::clamp(static_cast<int>(std::floor((sx0 - x0) / dx_)), 0, w - 1);
  const int c1 = std::clamp(static_cast<int>(std::ceil((sx1 - x0) / dx_)), c0 + 1, w);

  int f0 = c1, f1 = c1;  // fully covered columns [f0, f1)
  if (ymin <= yb && ymax >= yt) {
    const Span bottom = horizontal_span(poly, yb);
    const Span top = horizontal_span(poly, yt);
    const double lo = std::max(bottom.lo, top.lo);
    const double hi = std::min(bottom.hi, top.hi);
    if (hi > lo) {
      f0 = std::clamp(static_cast<int>(std::ceil((lo - x0) / dx_)), c0, c1);
      f1 = std::clamp(static_cast<int>(std::floor((hi - x0) / dx_)), c0, c1);
      if (f1 <= f0) f0 = f1 = c1;
    }
  }

  auto partial = [&](int c) {
    const double v = values_(row, c);
    if (v == 0.0) return;
    const double xl = x0 + c * dx_;
    Polygon2d piece = clip(strip, HalfPlane2d(Point2(-1.0, 0.0), -xl), kBoundaryEdge, tol);
    piece = clip(piece, HalfPlane2d(Point2(1.0, 0.0), xl + dx_), kBoundaryEdge, tol);
    PolygonMoments pm = polygon_area_moments(piece);
    m.mass += v * pm.mass;
    m.first += v * pm.first;
    m.second_trace += v * pm.second_trace;
  };
  for (int c = c0; c < std::min(f0, c1); ++c) partial(c);
  if (f1 > f0) {
    const double s0 = prefix0_(row, f1) - prefix0_(row, f0);
    const double s1 = prefix1_(row, f1) - prefix1_(row, f0);
    const double s2 = prefix2_(row, f1) - prefix2_(row, f0);
    const double hy = yt - yb;
    const double ybar = (yt + yb) / 2.0;
    const double y2 = hy * (yt * yt + yt * yb + yb * yb) / 3.0;
    m.mass += s0 * dx_ * hy;
    m.first += Point2(s1 * hy, s0 * dx_ * hy * ybar);
    m.second_trace += s2 * hy + s0 * dx_ * y2;
  }
  for (int c = std::max(f1, c0); c < c1; ++c) {
    if (c >= f0 && c < f1) continue;
    partial(c);
  }
  return m;
}

PolygonMoments Density::moments(const Polygon2d& poly) const {
  PolygonMoments m;
  if (poly.empty()) return m;
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (const auto& v : poly.vertices()) {
    ymin = std::min(ymin, v.y());
    ymax = std::max(ymax, v.y());
  }
  const double y0 = box_.min().y();
  const int h = height();
  const int r0 = std::clamp(static_cast<int>(std::floor((ymin - y0) / dy_)), 0, h - 1);
  const int r1 = std::clamp(static_cast<int>(std::ceil((ymax - y0) / dy_)), r0 + 1, h);
  for (int r = r0; r < r1; ++r) m += moments_of_row(poly, r, ymin, ymax);
  return m;
}

double Density::segment_integral(const Point2& a, const Point2& b) const {
  const double len = (b - a).norm();
  if (len == 0.0) return 0.0;
  std::vector<double> ts{0.0, 1.0};
  const Point2 d = b - a;
  auto crossings = [&](double pa, double pd, double origin, double step, int count) {
    if (pd == 0.0) return;
    const double lo = std::min(pa, pa + pd), hi = std::max(pa, pa + pd);
    const int k0 = std::max(0, static_cast<int>(std::ceil((lo - origin) / step)));
    const int k1 = std::min(count, static_cast<int>(std::floor((hi - origin) / step)));
    for (int k = k0; k <= k1; ++k) {
      const double t = (origin + k * step - pa) / pd;
      if (t > 0.0 && t < 1.0) ts.push_back(t);
    }
  };
  crossings(a.x(), d.x(), box_.min().x(), dx_, width());
  crossings(a.y(), d.y(), box_.min().y(), dy_, height());
  std::sort(ts.begin(), ts.end());

  const Point2 normal = Point2(-d.y(), d.x()) / len;
  const double nudge = 1e-9 * std::min(dx_, dy_);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    const double dt = ts[k + 1] - ts[k];
    if (dt <= 0.0) continue;
    const Point2 mid = a + 0.5 * (ts[k] + ts[k + 1]) * d;
    // sample both sides so edges lying on pixel borders see the mean value
    const double v = 0.5 * (value_at(mid + nudge * normal) + value_at(mid - nudge * normal));
    total += v * dt * len;
  }
  return total;
}

Point2 Density::sample(Rng& rng) const {
  const double u = uniform01(rng) * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  // skip zero-mass pixels that share the same cumulative value
  const auto idx = static_cast<Eigen::Index>(it - cumulative_.begin());
  const Eigen::Index w = values_.cols();
  const Eigen::Index r = idx / w, c = idx % w;
  const double x = box_.min().x() + (static_cast<double>(c) + uniform01(rng)) * dx_;
  const double y = box_.min().y() + (static_cast<double>(r) + uniform01(rng)) * dy_;
  return {x, y};
}

PolygonMoments polygon_moments(const Density& rho, const Polygon2d& poly) {
  return rho.moments(poly);
}

double transport_cost_to_point(const PolygonMoments& m, const Point2& y) {
  if (m.mass == 0.0) return 0.0;
  return m.second_trace - 2.0 * y.dot(m.first) + y.squaredNorm() * m.mass;
}

double transport_cost_to_point(const Density& rho, const Polygon2d& poly, const Point2& y) {
  return transport_cost_to_point(rho.moments(poly), y);
}

}  // namespace otq
