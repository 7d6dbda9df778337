#include "otq/diagnostics.hpp"
#include "otq/errors.hpp"
#include "otq/sdot.hpp"

#include <doctest.h>

#include <random>

using namespace otq;

namespace {

PointCloud two_sites(double a, double b) {
  PointCloud y(2, 2);
  y << a, 0.5, b, 0.5;
  return y;
}

PointCloud random_cloud(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  PointCloud y(n, 2);
  for (int i = 0; i < n; ++i) y.row(i) << u(rng), u(rng);
  return y;
}

}  // namespace

TEST_CASE("dual_value and mass_gradient") {
  const Density u = Density::uniform();

  CHECK(dual_value(two_sites(0.25, 0.75), Eigen::Vector2d::Zero(), u) ==
        doctest::Approx(5.0 / 48.0).epsilon(1e-13));

  SUBCASE("single site ignores the potential") {
    PointCloud y(1, 2);
    y << 0.3, 0.6;
    const double expected = 1.0 / 6.0 + (Point2(0.3, 0.6) - Point2(0.5, 0.5)).squaredNorm();
    for (double phi : {0.0, 1.7, -3.0}) {
      CHECK(dual_value(y, Eigen::VectorXd::Constant(1, phi), u) ==
            doctest::Approx(expected).epsilon(1e-13));
    }
  }

  SUBCASE("asymmetric pair") {
    const Eigen::VectorXd g = mass_gradient(two_sites(0.25, 0.5), Eigen::Vector2d::Zero(), u);
    CHECK(g[0] == doctest::Approx(0.125));
    CHECK(g[1] == doctest::Approx(-0.125));
    const Eigen::VectorXd s = mass_gradient(two_sites(0.25, 0.75), Eigen::Vector2d::Zero(), u);
    CHECK(s.cwiseAbs().maxCoeff() <= 1e-14);
  }

  SUBCASE("gradient matches finite differences of the dual") {
    const Density g = Density::analytic_gaussian2(8.0, 256);
    const PointCloud y = random_cloud(12, 2);
    Eigen::VectorXd phi = Eigen::VectorXd::LinSpaced(12, -0.01, 0.01);
    const Eigen::VectorXd grad = mass_gradient(y, phi, g);
    const double h = 1e-6;
    for (int i = 0; i < 12; ++i) {
      Eigen::VectorXd p = phi, m = phi;
      p[i] += h;
      m[i] -= h;
      const double fd = (dual_value(y, p, g) - dual_value(y, m, g)) / (2 * h);
      CHECK(fd == doctest::Approx(grad[i]).epsilon(1e-5));
    }
  }
}

TEST_CASE("solve_potentials") {
  const Density u = Density::uniform();

  SUBCASE("symmetric pair needs no iteration") {
    const PotentialSolution s = solve_potentials(two_sites(0.25, 0.75), u);
    CHECK(s.phi.cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(s.report.iterations <= 1);
  }

  SUBCASE("asymmetric pair moves the boundary to x = 1/2") {
    SolveOptions opts;
    opts.tol = 1e-12;
    const PotentialSolution s = solve_potentials(two_sites(0.25, 0.5), u, opts);
    CHECK(s.phi[0] == 0.0);
    CHECK(s.phi[0] - s.phi[1] == doctest::Approx(0.0625).epsilon(1e-10));
    CHECK(s.state.diagram.cells[0].bounding_box().max().x() == doctest::Approx(0.5));
  }

  SUBCASE("20x20 grid is already balanced") {
    PointCloud y(400, 2);
    for (int j = 0; j < 20; ++j)
      for (int i = 0; i < 20; ++i) y.row(j * 20 + i) << (2 * i + 1) / 40.0, (2 * j + 1) / 40.0;
    const PotentialSolution s = solve_potentials(y, u);
    CHECK(s.phi.cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((s.state.masses.array() - 1.0 / 400).abs().maxCoeff() <= 1e-6 / 400);
  }

  SUBCASE("random clouds on the Gaussian") {
    const Density g = Density::analytic_gaussian2(8.0, 512);
    SolveOptions opts;
    opts.tol = 1e-9;
    for (unsigned seed : {1u, 2u, 3u}) {
      const PointCloud y = random_cloud(60, seed);
      const PotentialSolution s = solve_potentials(y, g, opts);
      CHECK(s.report.final_residual <= 1e-9);
      CHECK((s.state.masses.array() - 1.0 / 60).abs().maxCoeff() <= 1e-9 / 60);

      // gauge invariance
      const Eigen::VectorXd shift = Eigen::VectorXd::Constant(60, 0.3);
      const PotentialSolution t = solve_potentials(y, g, opts, &shift);
      CHECK((t.phi - s.phi).cwiseAbs().maxCoeff() <= 1e-12);

      // primal and dual agree at the optimum
      double primal = 0.0;
      for (int i = 0; i < 60; ++i) {
        primal += transport_cost_to_point(s.state.moments[i], y.row(i).transpose());
      }
      CHECK(std::abs(s.state.dual - primal) <= 1e-9 * primal);

      // relabelling the sites permutes the potentials
      PointCloud r = y.colwise().reverse();
      const PotentialSolution p = solve_potentials(r, g, opts);
      for (int i = 0; i < 60; ++i) {
        CHECK(p.phi[59 - i] - p.phi[59] == doctest::Approx(s.phi[i] - s.phi[0]).epsilon(1e-6));
      }
    }
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(solve_potentials(two_sites(0.3, 0.3), u), DuplicateSites);
    const Density g = Density::analytic_gaussian2(8.0, 256);
    SolveOptions opts;
    opts.max_iter = 1;
    opts.tol = 1e-12;
    try {
      solve_potentials(random_cloud(100, 4), g, opts);
      FAIL("expected NotConverged");
    } catch (const NotConverged& e) {
      CHECK(e.report.iterations == 1);
      CHECK(e.report.final_residual > 1e-12);
    }
  }
}

TEST_CASE("quantization") {
  const Density u = Density::uniform();

  SUBCASE("single site") {
    PointCloud y(1, 2);
    y << 0.5, 0.5;
    const Quantization q = quantization(y, u);
    CHECK(q.cost == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
    CHECK(q.f_value == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
    CHECK(q.barycenters.row(0).transpose().isApprox(Point2(0.5, 0.5)));
  }

  SUBCASE("symmetric pair") {
    const Quantization q = quantization(two_sites(0.25, 0.75), u);
    CHECK(q.cost == doctest::Approx(5.0 / 48.0).epsilon(1e-13));
    CHECK(q.barycenters.row(0).transpose().isApprox(Point2(0.25, 0.5)));
    CHECK(q.barycenters.row(1).transpose().isApprox(Point2(0.75, 0.5)));
  }

  SUBCASE("midline cloud is a fixed point") {
    const PointCloud y = midline_cloud(8);
    const Quantization q = quantization(y, u);
    CHECK((q.barycenters - y).cwiseAbs().maxCoeff() <= 1e-8);
  }

  SUBCASE("warm start reuses the solution") {
    const Density g = Density::analytic_gaussian2(8.0, 256);
    const PointCloud y = random_cloud(40, 9);
    const Quantization a = quantization(y, g);
    PointCloud moved = y;
    moved.array() += 1e-4;
    const Quantization b = quantization(moved, g, {}, &a);
    const Quantization c = quantization(moved, g);
    CHECK(b.report.iterations <= c.report.iterations);
    CHECK(b.cost == doctest::Approx(c.cost).epsilon(1e-8));
  }
}
