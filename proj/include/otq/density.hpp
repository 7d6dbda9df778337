#pragma once

#include "otq/geom2d.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <random>
#include <vector>

namespace otq {

/// 64-bit Mersenne Twister (std::mt19937_64). The algorithm and its output
/// stream are fixed by the C++ standard, so seeded runs reproduce bit-for-bit
/// on every platform as long as values are converted with `uniform01`.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// 8-bit grayscale raster, row 0 at the top (PGM order).
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int col, int row) const {
    return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(col)];
  }
};

/// Integrals of 1, x and ‖x‖² against ρ over a region.
struct PolygonMoments {
  double mass = 0.0;
  Point2 first = Point2::Zero();
  double second_trace = 0.0;

  Point2 barycenter() const { return first / mass; }
  PolygonMoments& operator+=(const PolygonMoments& o) {
    mass += o.mass;
    first += o.first;
    second_trace += o.second_trace;
    return *this;
  }
};

/// Probability density that is constant on each pixel of a W×H grid covering
/// an axis-aligned rectangle. Row 0 of the grid is the bottom band of pixels.
/// Normalized to unit mass on construction.
class Density {
 public:
  using Grid = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  Density(Grid values, const Eigen::AlignedBox2d& domain);

  static Density uniform(const Eigen::AlignedBox2d& domain = unit_square());
  /// Darker pixels carry more mass when `gamma_dark` (value 255 − gray);
  /// otherwise the gray level itself. Domain is [0,1]×[0,H/W], image top at
  /// the top of the domain.
  static Density from_image(const GrayImage& image, bool gamma_dark);
  /// exp(−coef·((x−½)² + (y−½)²)) sampled at pixel centres of a
  /// resolution² grid on [0,1]².
  static Density analytic_gaussian2(double coef, int resolution = 1024);

  template <typename Fn>
  static Density rasterize(Fn&& fn, int width, int height,
                           const Eigen::AlignedBox2d& domain = unit_square()) {
    Grid g(height, width);
    const double dx = domain.sizes().x() / width;
    const double dy = domain.sizes().y() / height;
    for (int r = 0; r < height; ++r) {
      for (int c = 0; c < width; ++c) {
        g(r, c) = fn(domain.min().x() + (c + 0.5) * dx, domain.min().y() + (r + 0.5) * dy);
      }
    }
    return Density(std::move(g), domain);
  }

  static Eigen::AlignedBox2d unit_square() {
    return Eigen::AlignedBox2d(Point2(0.0, 0.0), Point2(1.0, 1.0));
  }

  const Eigen::AlignedBox2d& box() const { return box_; }
  const Polygon2d& domain() const { return domain_; }
  int width() const { return static_cast<int>(values_.cols()); }
  int height() const { return static_cast<int>(values_.rows()); }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  const Grid& values() const { return values_; }
  double max_value() const { return values_.maxCoeff(); }
  double diameter() const { return box_.diagonal().norm(); }

  /// Pixel value at p; zero outside the domain.
  double value_at(const Point2& p) const;

  /// Exact integrals over a convex polygon contained in the domain.
  PolygonMoments moments(const Polygon2d& poly) const;

  /// ∫ ρ ds along the segment [a, b], exact for the piecewise-constant field
  /// (pixel values on shared pixel borders are averaged).
  double segment_integral(const Point2& a, const Point2& b) const;

  /// One draw from ρ.
  Point2 sample(Rng& rng) const;

 private:
  PolygonMoments moments_of_row(const Polygon2d& poly, int row, double ymin, double ymax) const;

  Grid values_;
  Eigen::AlignedBox2d box_;
  Polygon2d domain_;
  double dx_ = 1.0;
  double dy_ = 1.0;
  // per-row prefix sums over columns of v, v·(x₁²−x₀²)/2 and v·(x₁³−x₀³)/3
  Grid prefix0_, prefix1_, prefix2_;
  std::vector<double> cumulative_;
};

/// Moments of ρ restricted to `poly`.
PolygonMoments polygon_moments(const Density& rho, const Polygon2d& poly);

/// ∫_poly ‖x − y‖² dρ expanded from the moments (never re-integrates).
double transport_cost_to_point(const PolygonMoments& m, const Point2& y);
double transport_cost_to_point(const Density& rho, const Polygon2d& poly, const Point2& y);

/// Raw (unit-density) moments of a polygon via Green's theorem.
PolygonMoments polygon_area_moments(const Polygon2d& poly);

}  // namespace otq
