#include "otq/errors.hpp"
#include "otq/experiment.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace otq;

namespace {

const Eigen::AlignedBox2d kUnit(Point2(0, 0), Point2(1, 1));

}  // namespace

TEST_CASE("generate_points") {
  SUBCASE("grid") {
    const PointCloud g = generate_points(InitSource::Kind::grid, 4, kUnit, 0);
    PointCloud expected(4, 2);
    expected << 0.25, 0.25, 0.75, 0.25, 0.25, 0.75, 0.75, 0.75;
    CHECK(g == expected);
    CHECK_THROWS_AS(generate_points(InitSource::Kind::grid, 5, kUnit, 0), NonSquareN);
  }

  SUBCASE("grid follows the domain") {
    const Eigen::AlignedBox2d box(Point2(0, 0), Point2(1, 0.5));
    const PointCloud g = generate_points(InitSource::Kind::grid, 4, box, 0);
    CHECK(g(3, 1) == doctest::Approx(0.375));
  }

  SUBCASE("random is reproducible") {
    const PointCloud a = generate_points(InitSource::Kind::random, 50, kUnit, 7);
    const PointCloud b = generate_points(InitSource::Kind::random, 50, kUnit, 7);
    const PointCloud c = generate_points(InitSource::Kind::random, 50, kUnit, 8);
    CHECK(a == b);
    CHECK(a != c);
    CHECK(a.minCoeff() >= 0.0);
    CHECK(a.maxCoeff() < 1.0);
    // first draw of mt19937_64 seeded with 7, top 53 bits
    Rng rng(7);
    CHECK(a(0, 0) == static_cast<double>(rng() >> 11) * 0x1.0p-53);
  }
}

TEST_CASE("points csv") {
  const PointCloud y = generate_points(InitSource::Kind::random, 20, kUnit, 3);
  std::stringstream ss;
  write_points_csv(ss, y);
  CHECK(ss.str().rfind("x,y\n", 0) == 0);
  const PointCloud back = parse_points_csv(ss);
  CHECK(back == y);

  std::istringstream bad("x,y\n0.1,abc\n");
  CHECK_THROWS_AS(parse_points_csv(bad), ParseError);
  std::istringstream short_row("x,y\n0.1\n");
  CHECK_THROWS_AS(parse_points_csv(short_row), ParseError);
  CHECK_THROWS_AS(read_points_csv("/nonexistent/points.csv"), ParseError);
}

TEST_CASE("fit_rate") {
  const std::vector<double> ns{400, 961, 1600, 2500};
  std::vector<double> v;
  for (double n : ns) v.push_back(3.0 * std::pow(n, -0.95));
  const RateFit f = fit_rate(ns, v);
  CHECK(std::abs(f.slope + 0.95) <= 1e-9);
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(f.points.size() == 4);
  CHECK_THROWS(fit_rate({1.0}, {1.0}));
  CHECK_THROWS(fit_rate({1.0, 2.0}, {1.0}));
}

TEST_CASE("sources") {
  CHECK(DensitySource::parse("uniform").kind == DensitySource::Kind::uniform);
  const DensitySource g = DensitySource::parse("gauss2:8");
  CHECK(g.kind == DensitySource::Kind::gauss2);
  CHECK(g.coefficient == 8.0);
  CHECK(g.describe() == "gauss2:8");
  CHECK(DensitySource::parse("pgm:data/x.pgm").path == "data/x.pgm");
  CHECK_THROWS_AS(DensitySource::parse("gauss2:abc"), ParseError);
  CHECK_THROWS_AS(DensitySource::parse("pgm:"), ParseError);
  CHECK_THROWS_AS(DensitySource::parse("normal"), ParseError);

  CHECK(InitSource::parse("grid").kind == InitSource::Kind::grid);
  CHECK(InitSource::parse("random").kind == InitSource::Kind::random);
  CHECK(InitSource::parse("csv:p.csv").path == "p.csv");
  CHECK_THROWS_AS(InitSource::parse("hex"), ParseError);
}

TEST_CASE("run_rates") {
  DensitySource src = DensitySource::parse("gauss2:8");
  src.resolution = 256;
  const Density rho = src.load();
  ExperimentSpec spec;
  spec.density = src;
  spec.init = InitSource::parse("random");
  spec.ns = {36, 16, 64};
  spec.trials = 2;
  spec.seed = 5;

  const RatesResult a = run_rates(spec, rho);
  const RatesResult b = run_rates(spec, rho);
  REQUIRE(a.runs.size() == 6);
  CHECK(a.runs[0].n == 16);
  CHECK(a.runs[1].seed == 6);
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    CHECK(a.runs[i].status == "ok");
    CHECK(a.runs[i].value == b.runs[i].value);
    CHECK(a.runs[i].value < a.runs[i].initial_value);
  }
  REQUIRE(a.fit.has_value());
  CHECK(a.fit->slope < 0.0);

  std::ostringstream csv;
  write_rates_csv(csv, a);
  CHECK(csv.str().rfind("n,trial,seed,status,initial_f,value,steps,seconds\n", 0) == 0);

  SUBCASE("deterministic init runs once per N") {
    spec.init = InitSource::parse("grid");
    const RatesResult g = run_rates(spec, rho, true);
    CHECK(g.runs.size() == 3);
    const RatesResult all = run_rates(spec, rho, false);
    CHECK(all.runs.size() == 6);
    CHECK(all.runs[0].value == all.runs[1].value);
  }

  SUBCASE("descent mode") {
    spec.mode = Mode::descent;
    spec.tau = 0.5;
    spec.steps = 3;
    spec.trials = 1;
    const RatesResult d = run_rates(spec, rho);
    for (const auto& r : d.runs) {
      CHECK(r.steps == 3);
      CHECK(r.value < r.initial_value);
    }
  }
}

TEST_CASE("suite registry") {
  CHECK(suite_names() == std::vector<std::string>{"bounds", "lemmas", "gaussian1d", "proba"});
  const SuiteResult s = run_suite("gaussian1d", Density::uniform(), 0);
  CHECK(s.passed());
  CHECK(s.to_json()["suite"] == "gaussian1d");
  CHECK_THROWS(run_suite("nope", Density::uniform(), 0));
}
