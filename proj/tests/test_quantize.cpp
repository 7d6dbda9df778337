#include "otq/diagnostics.hpp"
#include "otq/quantize.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace otq;

namespace {

PointCloud random_cloud(int n, unsigned seed, double lo = 0.05, double hi = 0.95) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  PointCloud y(n, 2);
  for (int i = 0; i < n; ++i) y.row(i) << u(rng), u(rng);
  return y;
}

SolveOptions tight() {
  SolveOptions o;
  o.tol = 1e-11;
  return o;
}

}  // namespace

TEST_CASE("c_d_omega") {
  const double c = c_d_omega(std::numbers::sqrt2);
  CHECK(c == doctest::Approx(4.0 * std::pow(std::numbers::sqrt2 + 1.0, 3)));
  CHECK(c == doctest::Approx(56.2843).epsilon(1e-5));
}

TEST_CASE("energy") {
  const Density u = Density::uniform();
  PointCloud one(1, 2);
  one << 0.5, 0.5;
  CHECK(energy(one, u) == doctest::Approx(1.0 / 12.0).epsilon(1e-13));

  PointCloud pair(2, 2);
  pair << 0.25, 0.5, 0.75, 0.5;
  CHECK(energy(pair, u) == doctest::Approx(5.0 / 96.0).epsilon(1e-13));

  for (int n : {2, 8, 32}) {
    const double f = energy(midline_cloud(n), u);
    CHECK(f == doctest::Approx(0.5 * (1.0 / 12.0 + 1.0 / (12.0 * n * n))).epsilon(1e-10));
    CHECK(f >= 1.0 / 24.0);
  }
}

TEST_CASE("gradient") {
  const Density u = Density::uniform();

  SUBCASE("single site") {
    PointCloud y(1, 2);
    y << 0.9, 0.9;
    CHECK(gradient(y, u).row(0).transpose().isApprox(Point2(0.4, 0.4), 1e-12));
  }

  SUBCASE("critical cloud") {
    CHECK(gradient(midline_cloud(8), u).cwiseAbs().maxCoeff() <= 1e-8);
  }

  SUBCASE("central finite differences") {
    const Density g = Density::analytic_gaussian2(8.0, 512);
    const PointCloud y = random_cloud(16, 31);
    const SolveOptions opts = tight();
    const PointCloud grad = gradient(y, g, opts);
    const double h = 1e-5 * g.diameter();
    for (int i = 0; i < 16; ++i) {
      for (int c = 0; c < 2; ++c) {
        PointCloud p = y, m = y;
        p(i, c) += h;
        m(i, c) -= h;
        const double fd = (energy(p, g, opts) - energy(m, g, opts)) / (2 * h);
        if (std::abs(grad(i, c)) < 1e-10) {
          CHECK(std::abs(fd) <= 1e-10);
        } else {
          CHECK(std::abs(fd - grad(i, c)) <= 1e-4 * std::abs(grad(i, c)));
        }
      }
    }
  }
}

TEST_CASE("lloyd and descent steps") {
  const Density u = Density::uniform();

  SUBCASE("symmetric pair is a fixed point") {
    PointCloud y(2, 2);
    y << 0.25, 0.5, 0.75, 0.5;
    CHECK((lloyd_step(y, u) - y).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("both sites in the left half") {
    PointCloud y(2, 2);
    y << 0.1, 0.5, 0.2, 0.5;
    const PointCloud b = lloyd_step(y, u);
    CHECK(b(0, 0) == doctest::Approx(0.25));
    CHECK(b(1, 0) == doctest::Approx(0.75));
    CHECK(energy(b, u) < energy(y, u));
  }

  SUBCASE("tau limits") {
    const Density g = Density::analytic_gaussian2(8.0, 256);
    const PointCloud y = random_cloud(30, 5);
    const Quantization q = quantization(y, g);
    CHECK(descent_step(q, 0.0) == y);
    CHECK(descent_step(q, 1.0) == q.barycenters);
    CHECK((descent_step(y, g, 1.0) - lloyd_step(y, g)).cwiseAbs().maxCoeff() == 0.0);
    const PointCloud half = descent_step(q, 0.5);
    CHECK(min_pairwise_distance(half) >= 0.5 * min_pairwise_distance(y) - 1e-12);
  }

  SUBCASE("translation equivariance") {
    const auto bump = [](double x, double y) { return 1.0 + x * x + 0.5 * y; };
    const Eigen::Vector2d t(0.3, -0.7);
    const Eigen::AlignedBox2d box(Point2(0, 0), Point2(1, 1));
    const Eigen::AlignedBox2d moved(t, t + Point2(1, 1));
    const Density a = Density::rasterize(bump, 64, 64, box);
    const Density b = Density::rasterize([&](double x, double y) { return bump(x - t.x(), y - t.y()); },
                                         64, 64, moved);
    const PointCloud y = random_cloud(25, 13);
    const PointCloud ys = y.rowwise() + t.transpose();
    const SolveOptions opts = tight();
    const Quantization qa = quantization(y, a, opts);
    const Quantization qb = quantization(ys, b, opts);
    CHECK(std::abs(qa.f_value - qb.f_value) <= 1e-10);
    CHECK(((qb.barycenters.rowwise() - t.transpose()) - qa.barycenters).cwiseAbs().maxCoeff() <=
          1e-10);
    CHECK(std::abs(gradient(qa).squaredNorm() - gradient(qb).squaredNorm()) <= 1e-10);
  }
}

TEST_CASE("kn_schedule") {
  CHECK(kn_schedule(1.0, 100, 0.1, 0.5) == 2);
  CHECK(kn_schedule(1.0, 100, 0.1, 0.1) == 11);
  CHECK_FALSE(kn_schedule(0.01, 100, 0.1, 0.5).has_value());
  CHECK_FALSE(kn_schedule(0.01, 100, 1.0, 0.5).has_value());
}

TEST_CASE("run_descent") {
  const Density g = Density::analytic_gaussian2(8.0, 256);
  const PointCloud y0 = random_cloud(36, 3, 0.0, 1.0);

  SUBCASE("Lloyd iterations") {
    DescentConfig cfg;
    cfg.tau = 1.0;
    cfg.max_steps = 10;
    cfg.solve = tight();
    const DescentTrace tr = run_descent(y0, g, cfg);
    REQUIRE(tr.steps.size() == 11);
    for (std::size_t k = 0; k + 1 < tr.steps.size(); ++k) {
      CHECK(tr.steps[k + 1].f_value <= tr.steps[k].f_value + 1e-12);
      CHECK(tr.steps[k].grad_norm_sq <=
            2.0 * (tr.steps[k].f_value - tr.steps[k + 1].f_value) + 1e-10);
    }
    CHECK(tr.eta == doctest::Approx(0.5));
    CHECK(tr.terminal_cost == doctest::Approx(2.0 * tr.steps.back().f_value));
  }

  SUBCASE("damped steps") {
    DescentConfig cfg;
    cfg.tau = 0.3;
    cfg.max_steps = 8;
    cfg.snapshot_stride = 4;
    const DescentTrace tr = run_descent(y0, g, cfg);
    CHECK(tr.eta == doctest::Approx(1.0 - 0.3 * 1.7 / 2.0));
    CHECK(tr.a_factor == doctest::Approx(1.0 / 0.7));
    CHECK(tr.epsilon == doctest::Approx(min_pairwise_distance(y0)));
    CHECK(tr.snapshots.size() == 3);
    for (std::size_t k = 0; k + 1 < tr.steps.size(); ++k) {
      CHECK(tr.steps[k + 1].min_pairwise >= 0.7 * tr.steps[k].min_pairwise - 1e-12);
    }
    for (const auto& s : tr.steps) CHECK(s.f_value <= s.lemma_gf_bound);
    CHECK(tr.terminal_cost <= tr.explicit_bound);
  }

  SUBCASE("schedule underflow returns the initial cloud") {
    DescentConfig cfg;
    cfg.tau = 0.5;
    cfg.schedule = Schedule::kn;
    const DescentTrace tr = run_descent(y0, g, cfg);
    // F·N·ε is far below 1 for this cloud
    CHECK(tr.schedule_underflow);
    CHECK(tr.k_n == 0);
    CHECK(tr.steps.size() == 1);
    CHECK(tr.final_sites == y0);
  }
}
