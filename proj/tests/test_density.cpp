#include "otq/density.hpp"
#include "otq/errors.hpp"
#include "otq/pgm.hpp"

#include <doctest.h>

#include <cstdio>
#include <random>

using namespace otq;

namespace {

GrayImage image(int w, int h, std::vector<std::uint8_t> px) {
  GrayImage img;
  img.width = w;
  img.height = h;
  img.pixels = std::move(px);
  return img;
}

Density uniform_raster() {
  return Density::rasterize([](double, double) { return 1.0; }, 64, 64);
}

}  // namespace

TEST_CASE("from_image") {
  SUBCASE("single pixel") {
    const Density d = Density::from_image(image(1, 1, {100}), true);
    CHECK(d.moments(d.domain()).mass == doctest::Approx(1.0));
    CHECK(d.box().max().isApprox(Point2(1.0, 1.0)));
  }

  SUBCASE("all mass in the dark pixel") {
    const Density d = Density::from_image(image(2, 1, {0, 255}), true);
    CHECK(d.box().max().y() == doctest::Approx(0.5));
    const PolygonMoments m = d.moments(Polygon2d::rectangle(0.0, 0.0, 0.5, 0.5));
    CHECK(m.mass == doctest::Approx(1.0));
  }

  SUBCASE("equal grays") {
    const Density d = Density::from_image(image(2, 2, {7, 7, 7, 7}), false);
    for (double x : {0.0, 0.5}) {
      for (double y : {0.0, 0.5}) {
        CHECK(d.moments(Polygon2d::rectangle(x, y, x + 0.5, y + 0.5)).mass ==
              doctest::Approx(0.25));
      }
    }
  }

  SUBCASE("image top maps to the top of the domain") {
    // 1x2 image: dark top row
    const Density d = Density::from_image(image(1, 2, {0, 255}), true);
    CHECK(d.box().max().y() == doctest::Approx(2.0));
    CHECK(d.moments(Polygon2d::rectangle(0.0, 1.0, 1.0, 2.0)).mass == doctest::Approx(1.0));
  }

  SUBCASE("zero mass") {
    CHECK_THROWS_AS(Density::from_image(image(2, 1, {255, 255}), true), ZeroMass);
    CHECK_THROWS_AS(Density::from_image(image(2, 1, {0, 0}), false), ZeroMass);
  }
}

TEST_CASE("analytic_gaussian2") {
  SUBCASE("coefficient 0 is uniform") {
    const Density d = Density::analytic_gaussian2(0.0, 32);
    CHECK(d.values().minCoeff() == doctest::Approx(d.values().maxCoeff()));
    CHECK(d.max_value() == doctest::Approx(1.0));
  }

  SUBCASE("symmetry and mode") {
    const Density d = Density::analytic_gaussian2(8.0, 1024);
    const auto& v = d.values();
    const int r = 1024;
    double worst = 0.0;
    for (int i = 0; i < r; i += 7) {
      for (int j = 0; j < r; j += 5) {
        const double a = v(i, j);
        worst = std::max({worst, std::abs(a - v(j, i)), std::abs(a - v(r - 1 - i, j)),
                          std::abs(a - v(i, r - 1 - j))});
      }
    }
    CHECK(worst <= 1e-12);
    CHECK(v(512, 512) == doctest::Approx(d.max_value()));
    const double half = d.moments(Polygon2d::rectangle(0.0, 0.0, 0.5, 1.0)).mass;
    CHECK(std::abs(half - 0.5) <= 1e-12);
  }

  CHECK_THROWS(Density::analytic_gaussian2(8.0, 8));
}

TEST_CASE("polygon_moments") {
  const Density u = uniform_raster();

  SUBCASE("half rectangle") {
    const PolygonMoments m = u.moments(Polygon2d::rectangle(0.0, 0.0, 0.5, 1.0));
    CHECK(m.mass == doctest::Approx(0.5));
    CHECK(m.first.isApprox(Point2(0.125, 0.25)));
    // ∫x² + ∫y² = 0.5³/3 + 0.5/3
    CHECK(m.second_trace == doctest::Approx(0.125 / 3.0 + 0.5 / 3.0));
    CHECK(m.barycenter().isApprox(Point2(0.25, 0.5)));
  }

  SUBCASE("empty polygon") {
    const PolygonMoments m = u.moments(Polygon2d());
    CHECK(m.mass == 0.0);
    CHECK(m.first.isZero());
    CHECK(m.second_trace == 0.0);
  }

  SUBCASE("triangle barycenter matches Monte Carlo") {
    const Polygon2d t({Point2(0, 0), Point2(1, 0), Point2(0, 1)});
    const PolygonMoments m = u.moments(t);
    CHECK(m.mass == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(m.barycenter().isApprox(Point2(1.0 / 3.0, 1.0 / 3.0), 1e-12));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> w(0.0, 1.0);
    Point2 acc = Point2::Zero();
    int hits = 0;
    for (int k = 0; k < 400000; ++k) {
      const Point2 p(w(rng), w(rng));
      if (p.x() + p.y() <= 1.0) {
        acc += p;
        ++hits;
      }
    }
    CHECK((acc / hits - m.barycenter()).norm() < 3e-3);
  }

  SUBCASE("normalization") {
    const Density g = Density::analytic_gaussian2(8.0, 256);
    CHECK(std::abs(g.moments(g.domain()).mass - 1.0) <= 1e-12);
    CHECK(std::abs(g.values().sum() * g.dx() * g.dy() - 1.0) <= 1e-12);
  }

  SUBCASE("additivity over random splits") {
    const Density g = Density::analytic_gaussian2(8.0, 128);
    const Density img = Density::rasterize(
        [](double x, double y) { return 1.0 + std::sin(13 * x) * std::cos(7 * y); }, 37, 23);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> w(0.0, 1.0);
    for (const Density* d : {&g, &img}) {
      for (int k = 0; k < 50; ++k) {
        const Polygon2d base = clip(d->domain(), HalfPlane2d(Point2(w(rng) - 0.5, w(rng) - 0.5),
                                                              0.3 * w(rng)));
        if (base.empty()) continue;
        const Point2 c = base.centroid();
        const Point2 a(w(rng) - 0.5, w(rng) - 0.5);
        const Polygon2d p1 = clip(base, HalfPlane2d(a, a.dot(c)));
        const Polygon2d p2 = clip(base, HalfPlane2d(-a, -a.dot(c)));
        const PolygonMoments whole = d->moments(base);
        PolygonMoments parts = d->moments(p1);
        parts += d->moments(p2);
        CHECK(std::abs(whole.mass - parts.mass) <= 1e-10);
        CHECK((whole.first - parts.first).norm() <= 1e-10);
        CHECK(std::abs(whole.second_trace - parts.second_trace) <= 1e-10);
      }
    }
  }

  SUBCASE("matches a pixel-by-pixel reference") {
    const Density d = Density::rasterize(
        [](double x, double y) { return 0.2 + x * x + 3 * y; }, 17, 11);
    const Polygon2d p({Point2(0.13, 0.07), Point2(0.91, 0.31), Point2(0.77, 0.88),
                       Point2(0.21, 0.69)});
    PolygonMoments ref;
    for (int r = 0; r < d.height(); ++r) {
      for (int c = 0; c < d.width(); ++c) {
        Polygon2d piece = p;
        const double x0 = c * d.dx(), y0 = r * d.dy();
        piece = clip(piece, HalfPlane2d(Point2(-1, 0), -x0));
        piece = clip(piece, HalfPlane2d(Point2(1, 0), x0 + d.dx()));
        piece = clip(piece, HalfPlane2d(Point2(0, -1), -y0));
        piece = clip(piece, HalfPlane2d(Point2(0, 1), y0 + d.dy()));
        PolygonMoments pm = polygon_area_moments(piece);
        const double v = d.values()(r, c);
        ref.mass += v * pm.mass;
        ref.first += v * pm.first;
        ref.second_trace += v * pm.second_trace;
      }
    }
    const PolygonMoments m = d.moments(p);
    CHECK(m.mass == doctest::Approx(ref.mass).epsilon(1e-13));
    CHECK(m.first.isApprox(ref.first, 1e-13));
    CHECK(m.second_trace == doctest::Approx(ref.second_trace).epsilon(1e-13));
  }
}

TEST_CASE("transport_cost_to_point") {
  const Density u = uniform_raster();
  CHECK(transport_cost_to_point(u, u.domain(), Point2(0.5, 0.5)) == doctest::Approx(1.0 / 6.0));
  CHECK(transport_cost_to_point(u, Polygon2d(), Point2(0.5, 0.5)) == 0.0);
  const Polygon2d half = Polygon2d::rectangle(0.0, 0.0, 0.5, 1.0);
  CHECK(transport_cost_to_point(u, half, Point2(0.25, 0.5)) ==
        doctest::Approx(1.0 / 96.0 + 0.5 / 12.0));

  SUBCASE("parallel-axis identity") {
    const Density g = Density::analytic_gaussian2(8.0, 128);
    const Polygon2d p({Point2(0.1, 0.2), Point2(0.8, 0.1), Point2(0.6, 0.9)});
    const PolygonMoments m = g.moments(p);
    const Point2 b = m.barycenter();
    for (const Point2 y : {Point2(0.0, 0.0), Point2(0.3, 0.7), Point2(1.0, 0.2)}) {
      CHECK(transport_cost_to_point(m, y) ==
            doctest::Approx(transport_cost_to_point(m, b) + m.mass * (y - b).squaredNorm())
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("segment_integral") {
  const Density u = uniform_raster();
  CHECK(u.segment_integral(Point2(0.1, 0.1), Point2(0.9, 0.7)) == doctest::Approx(1.0));
  const Density two = Density::rasterize([](double x, double) { return x < 0.5 ? 1.0 : 3.0; }, 2, 1);
  // values normalize to 0.5 and 1.5
  CHECK(two.segment_integral(Point2(0.0, 0.5), Point2(1.0, 0.5)) == doctest::Approx(1.0));
  // along the shared pixel border the two sides are averaged
  CHECK(two.segment_integral(Point2(0.5, 0.0), Point2(0.5, 1.0)) == doctest::Approx(1.0));
  CHECK(two.segment_integral(Point2(0.2, 0.0), Point2(0.2, 1.0)) == doctest::Approx(0.5));
}

TEST_CASE("sampling follows the density") {
  const Density d = Density::rasterize([](double x, double) { return x < 0.5 ? 1.0 : 3.0; }, 2, 1);
  Rng rng(123);
  int right = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const Point2 p = d.sample(rng);
    CHECK_FALSE((p.x() < 0.0 || p.x() >= 1.0 || p.y() < 0.0 || p.y() >= 1.0));
    right += p.x() >= 0.5 ? 1 : 0;
  }
  const double se = std::sqrt(0.75 * 0.25 / n);
  CHECK(std::abs(static_cast<double>(right) / n - 0.75) < 4 * se);
}

TEST_CASE("pgm") {
  SUBCASE("ascii with comments") {
    const GrayImage img = parse_pgm("P2\n# comment\n3 2\n# another\n255\n0 1 2\n253 254 255\n");
    CHECK(img.width == 3);
    CHECK(img.height == 2);
    CHECK(img.at(0, 0) == 0);
    CHECK(img.at(2, 1) == 255);
  }

  SUBCASE("binary") {
    std::string data = "P5 2 2 255\n";
    data += std::string("\x00\x80\xff\x10", 4);
    const GrayImage img = parse_pgm(data);
    CHECK(img.pixels == std::vector<std::uint8_t>{0, 128, 255, 16});
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(parse_pgm("P6 1 1 255\n\x01"), ParseError);
    CHECK_THROWS_AS(parse_pgm("P2 2 2 255\n1 2 3"), ParseError);
    CHECK_THROWS_AS(parse_pgm("P5 2 2 255\n\x01"), ParseError);
    CHECK_THROWS_AS(parse_pgm("P2 1 1 65535\n7"), ParseError);
    CHECK_THROWS_AS(parse_pgm("P2 1 1 255\n300"), ParseError);
    CHECK_THROWS_AS(read_pgm("/nonexistent/file.pgm"), ParseError);
  }

  SUBCASE("round trip") {
    const GrayImage img = image(3, 2, {1, 2, 3, 250, 0, 9});
    const std::string path = "pgm_round_trip.pgm";
    write_pgm(path, img);
    const GrayImage back = read_pgm(path);
    std::remove(path.c_str());
    CHECK(back.width == 3);
    CHECK(back.height == 2);
    CHECK(back.pixels == img.pixels);
  }
}
