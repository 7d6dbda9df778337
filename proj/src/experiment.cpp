#include "otq/experiment.hpp"

#include "otq/diagnostics.hpp"
#include "otq/errors.hpp"
#include "otq/oned.hpp"
#include "otq/pgm.hpp"
#include "otq/quantize.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#ifndef OTQ_VERSION_STRING
#define OTQ_VERSION_STRING "0.0.0"
#endif

namespace otq {

using nlohmann::json;

const char* version_string() { return OTQ_VERSION_STRING; }

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view text, const char* what) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ParseError(std::string("invalid ") + what + ": '" + std::string(text) + "'");
  }
  return v;
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.rfind(prefix, 0) == 0;
}

}  // namespace

DensitySource DensitySource::parse(const std::string& text) {
  DensitySource s;
  if (text == "uniform") {
    s.kind = Kind::uniform;
  } else if (starts_with(text, "gauss2:")) {
    s.kind = Kind::gauss2;
    s.coefficient = parse_double(text.substr(7), "gaussian coefficient");
  } else if (starts_with(text, "pgm:")) {
    s.kind = Kind::pgm;
    s.path = text.substr(4);
    if (s.path.empty()) throw ParseError("pgm density needs a path");
  } else {
    throw ParseError("unknown density '" + text + "' (expected uniform, gauss2:COEFF, pgm:PATH)");
  }
  return s;
}

std::string DensitySource::describe() const {
  switch (kind) {
    case Kind::uniform:
      return "uniform";
    case Kind::gauss2:
      return "gauss2:" + format_double(coefficient);
    case Kind::pgm:
      return "pgm:" + path;
  }
  return {};
}

Density DensitySource::load() const {
  switch (kind) {
    case Kind::uniform:
      return Density::uniform();
    case Kind::gauss2:
      return Density::analytic_gaussian2(coefficient, resolution);
    case Kind::pgm:
      return Density::from_image(read_pgm(path), gamma_dark);
  }
  throw std::logic_error("unreachable");
}

InitSource InitSource::parse(const std::string& text) {
  InitSource s;
  if (text == "grid") {
    s.kind = Kind::grid;
  } else if (text == "random") {
    s.kind = Kind::random;
  } else if (starts_with(text, "csv:")) {
    s.kind = Kind::csv;
    s.path = text.substr(4);
    if (s.path.empty()) throw ParseError("csv init needs a path");
  } else {
    throw ParseError("unknown init '" + text + "' (expected grid, random, csv:PATH)");
  }
  return s;
}

std::string InitSource::describe() const {
  switch (kind) {
    case Kind::grid:
      return "grid";
    case Kind::random:
      return "random";
    case Kind::csv:
      return "csv:" + path;
  }
  return {};
}

PointCloud generate_points(InitSource::Kind kind, int n, const Eigen::AlignedBox2d& domain,
                           std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("N must be positive");
  const Point2 lo = domain.min();
  const Point2 size = domain.sizes();
  PointCloud y(n, 2);
  if (kind == InitSource::Kind::grid) {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (side * side != n) throw NonSquareN(n);
    for (int j = 0; j < side; ++j) {
      for (int i = 0; i < side; ++i) {
        y.row(j * side + i) << lo.x() + size.x() * (2.0 * i + 1.0) / (2.0 * side),
            lo.y() + size.y() * (2.0 * j + 1.0) / (2.0 * side);
      }
    }
  } else if (kind == InitSource::Kind::random) {
    Rng rng(seed);
    for (int k = 0; k < n; ++k) {
      const double u = uniform01(rng);
      const double v = uniform01(rng);
      y.row(k) << lo.x() + size.x() * u, lo.y() + size.y() * v;
    }
  } else {
    throw std::invalid_argument("csv points are read, not generated");
  }
  return y;
}

PointCloud initial_points(const InitSource& init, int n, const Eigen::AlignedBox2d& domain,
                          std::uint64_t seed) {
  if (init.kind == InitSource::Kind::csv) return read_points_csv(init.path);
  return generate_points(init.kind, n, domain, seed);
}

void write_points_csv(std::ostream& out, const PointCloud& points) {
  out << "x,y\n";
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out << format_double(points(i, 0)) << ',' << format_double(points(i, 1)) << '\n';
  }
}

void write_points_csv(const std::string& path, const PointCloud& points) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  write_points_csv(f, points);
  if (!f) throw Error("write failed: " + path);
}

PointCloud parse_points_csv(std::istream& in) {
  std::vector<Point2> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && (line == "x,y" || line == "\"x\",\"y\"")) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError("line " + std::to_string(lineno) + ": expected 'x,y'");
    }
    const std::string_view sv(line);
    pts.emplace_back(parse_double(sv.substr(0, comma), "x coordinate"),
                     parse_double(sv.substr(comma + 1), "y coordinate"));
  }
  if (pts.empty()) throw ParseError("no points in csv");
  PointCloud y(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) y.row(static_cast<Eigen::Index>(i)) = pts[i];
  return y;
}

PointCloud read_points_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path);
  return parse_points_csv(f);
}

RateFit fit_rate(const std::vector<double>& ns, const std::vector<double>& values) {
  if (ns.size() != values.size() || ns.size() < 2) {
    throw std::invalid_argument("rate fit needs at least two (N, value) pairs");
  }
  RateFit fit;
  const auto m = static_cast<Eigen::Index>(ns.size());
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd b(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double x = std::log(ns[static_cast<std::size_t>(k)]);
    const double v = values[static_cast<std::size_t>(k)];
    if (!(v > 0.0)) throw std::invalid_argument("rate fit needs positive values");
    a(k, 0) = x;
    a(k, 1) = 1.0;
    b(k) = std::log(v);
    fit.points.emplace_back(x, b(k));
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  fit.slope = coef(0);
  fit.intercept = coef(1);
  const double ss_tot = (b.array() - b.mean()).square().sum();
  const double ss_res = (b - a * coef).squaredNorm();
  fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return fit;
}

namespace {

RunRecord run_one(const ExperimentSpec& spec, const Density& rho, int n, int trial) {
  RunRecord r;
  r.n = n;
  r.trial = trial;
  r.seed = spec.seed + static_cast<std::uint64_t>(trial);
  const auto t0 = std::chrono::steady_clock::now();
  const SolveOptions opts{spec.tol, 200};
  try {
    const PointCloud y0 = initial_points(spec.init, n, rho.box(), r.seed);
    r.n = static_cast<int>(y0.rows());
    switch (spec.mode) {
      case Mode::one_lloyd: {
        const Quantization q0 = quantization(y0, rho, opts);
        r.initial_value = q0.f_value;
        r.value = quantization(q0.barycenters, rho, opts, &q0).f_value;
        r.steps = 1;
        break;
      }
      case Mode::lloyd_iterate:
      case Mode::descent: {
        DescentConfig cfg;
        cfg.tau = spec.mode == Mode::lloyd_iterate ? 1.0 : spec.tau;
        cfg.max_steps = spec.steps;
        cfg.schedule = spec.kn_schedule ? Schedule::kn : Schedule::fixed_steps;
        cfg.epsilon0 = spec.epsilon;
        cfg.solve = opts;
        const DescentTrace tr = run_descent(y0, rho, cfg);
        r.initial_value = tr.steps.front().f_value;
        r.value = tr.steps.back().f_value;
        r.steps = tr.k_n;
        break;
      }
    }
  } catch (const NotConverged&) {
    r.status = "not_converged";
  } catch (const DuplicateSites&) {
    r.status = "duplicate_sites";
  } catch (const EmptyCell&) {
    r.status = "empty_cell";
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

RatesResult run_rates(const ExperimentSpec& spec, const Density& rho, bool dedupe_deterministic) {
  if (spec.ns.empty()) throw std::invalid_argument("no N values");
  if (spec.trials < 1) throw std::invalid_argument("trials must be positive");
  RatesResult res;
  const bool deterministic = spec.init.kind != InitSource::Kind::random;
  const int trials = (deterministic && dedupe_deterministic) ? 1 : spec.trials;
  std::vector<int> ns = spec.ns;
  std::sort(ns.begin(), ns.end());
  for (int n : ns) {
    double sum = 0.0;
    int ok = 0;
    for (int t = 0; t < trials; ++t) {
      RunRecord r = run_one(spec, rho, n, t);
      if (r.status == "ok") {
        sum += r.value;
        ++ok;
      }
      res.runs.push_back(std::move(r));
    }
    if (ok > 0) res.means.emplace_back(n, sum / ok);
  }
  std::vector<double> xs, vs;
  for (const auto& [n, v] : res.means) {
    if (xs.empty() || xs.back() != n) {
      xs.push_back(n);
      vs.push_back(v);
    }
  }
  if (xs.size() >= 3) res.fit = fit_rate(xs, vs);
  return res;
}

void write_rates_csv(std::ostream& out, const RatesResult& result) {
  out << "n,trial,seed,status,initial_f,value,steps,seconds\n";
  for (const auto& r : result.runs) {
    out << r.n << ',' << r.trial << ',' << r.seed << ',' << r.status << ','
        << format_double(r.initial_value) << ',' << format_double(r.value) << ',' << r.steps
        << ',' << format_double(r.seconds) << '\n';
  }
}

json to_json(const ExperimentSpec& spec) {
  static const std::map<Mode, std::string> modes{{Mode::one_lloyd, "one_lloyd"},
                                                 {Mode::lloyd_iterate, "lloyd_iterate"},
                                                 {Mode::descent, "descent"}};
  json j;
  j["density"] = spec.density.describe();
  j["init"] = spec.init.describe();
  j["n"] = spec.ns;
  j["mode"] = modes.at(spec.mode);
  j["steps"] = spec.steps;
  j["tau"] = spec.tau;
  j["schedule"] = spec.kn_schedule ? "kn" : "fixed_steps";
  j["epsilon"] = spec.epsilon ? json(*spec.epsilon) : json(nullptr);
  j["trials"] = spec.trials;
  j["seed"] = spec.seed;
  j["tol"] = spec.tol;
  j["prng"] = "mt19937_64";
  return j;
}

json to_json(const RateFit& fit) {
  json pts = json::array();
  for (const auto& [x, y] : fit.points) pts.push_back({{"log_n", x}, {"log_value", y}});
  return {{"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r_squared", fit.r_squared},
          {"points", pts}};
}

json to_json(const SolveReport& r) {
  return {{"iterations", r.iterations},
          {"final_residual", r.final_residual},
          {"newton_steps", r.newton_steps},
          {"fallback_steps", r.fallback_steps}};
}

json to_json(const Quantization& q) {
  json bary = json::array();
  for (Eigen::Index i = 0; i < q.barycenters.rows(); ++i) {
    bary.push_back({q.barycenters(i, 0), q.barycenters(i, 1)});
  }
  return {{"n", q.size()},
          {"phi", std::vector<double>(q.phi.data(), q.phi.data() + q.phi.size())},
          {"masses", std::vector<double>(q.masses.data(), q.masses.data() + q.masses.size())},
          {"barycenters", bary},
          {"cost", q.cost},
          {"f_value", q.f_value},
          {"solver", to_json(q.report)}};
}

bool SuiteResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.satisfied; });
}

json SuiteResult::to_json() const {
  json list = json::array();
  for (const auto& c : checks) {
    json j{{"name", c.name},
           {"lhs", c.lhs},
           {"rhs", c.rhs},
           {"slack", c.slack},
           {"satisfied", c.satisfied}};
    if (!c.details.is_null()) j["details"] = c.details;
    list.push_back(std::move(j));
  }
  return {{"suite", suite}, {"passed", passed()}, {"checks", list}};
}

namespace {

CheckResult from_bound(std::string name, const BoundCheck& b, json details = nullptr) {
  return {std::move(name), b.lhs, b.rhs, b.slack, b.satisfied, std::move(details)};
}

constexpr double kTightTol = 1e-10;

void suite_bounds(SuiteResult& out, const Density& rho, std::uint64_t seed) {
  const SolveOptions opts{kTightTol, 200};
  const Density uniform = Density::uniform();
  {
    const PointCloud grid = generate_points(InitSource::Kind::grid, 400, rho.box(), seed);
    out.checks.push_back(from_bound("barycenter_bound_grid_n400",
                                    barycenter_bound(grid, rho, 1.0 / 20.0, opts),
                                    {{"epsilon", 1.0 / 20.0}}));
  }
  for (int t = 0; t < 5; ++t) {
    const PointCloud y = generate_points(InitSource::Kind::random, 100, rho.box(), seed + t);
    const double eps = std::min(1.0, min_pairwise_distance(y));
    out.checks.push_back(from_bound("barycenter_bound_random_n100_trial" + std::to_string(t),
                                    barycenter_bound(y, rho, eps, opts),
                                    {{"epsilon", eps}, {"seed", seed + t}}));
  }
  for (int t = 0; t < 10; ++t) {
    const PointCloud y = generate_points(InitSource::Kind::random, 100, rho.box(), seed + t);
    const double eps = min_pairwise_distance(y);
    out.checks.push_back(from_bound("pl_random_n100_trial" + std::to_string(t),
                                    pl_check(y, rho, eps, opts),
                                    {{"epsilon", eps}, {"seed", seed + t}}));
  }
  out.checks.push_back(
      from_bound("pl_midline_n8", pl_check(midline_cloud(8), uniform, 1.0 / 8.0, opts)));
  for (int n : {4, 16, 64}) {
    const HyperplaneCheck h = hyperplane_bound_check(n, uniform, opts);
    CheckResult c = from_bound("hyperplane_n" + std::to_string(n), h.bound,
                               {{"max_x_deviation", h.max_x_deviation}});
    c.satisfied = h.satisfied;
    out.checks.push_back(std::move(c));
  }
}

void suite_lemmas(SuiteResult& out, const Density& rho, std::uint64_t seed) {
  const SolveOptions opts{kTightTol, 200};
  {
    const PointCloud y0 = generate_points(InitSource::Kind::random, 100, rho.box(), seed);
    DescentConfig cfg;
    cfg.tau = 1.0;
    cfg.max_steps = 20;
    cfg.solve = opts;
    const DescentTrace tr = run_descent(y0, rho, cfg);
    double worst_increase = -std::numeric_limits<double>::infinity();
    double worst_identity = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < tr.steps.size(); ++k) {
      const double df = tr.steps[k].f_value - tr.steps[k + 1].f_value;
      worst_increase = std::max(worst_increase, -df);
      worst_identity = std::max(worst_identity, tr.steps[k].grad_norm_sq - 2.0 * df);
    }
    out.checks.push_back(from_bound("lloyd_energy_monotone", BoundCheck::of(worst_increase, 0.0),
                                    {{"steps", 20}, {"n", 100}}));
    out.checks.push_back(from_bound("lloyd_gradient_identity",
                                    BoundCheck::of(worst_identity, 1e-10),
                                    {{"steps", 20}, {"n", 100}}));
  }
  {
    const PointCloud y0 = generate_points(InitSource::Kind::random, 64, rho.box(), seed + 1);
    DescentConfig cfg;
    cfg.tau = 0.5;
    cfg.max_steps = 10;
    cfg.solve = opts;
    const DescentTrace tr = run_descent(y0, rho, cfg);
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < tr.steps.size(); ++k) {
      worst = std::min(worst, tr.steps[k + 1].min_pairwise / tr.steps[k].min_pairwise);
    }
    out.checks.push_back(from_bound("stretch_contraction_tau0.5", BoundCheck::of(0.5 - 1e-9, worst),
                                    {{"steps", 10}, {"n", 64}}));
  }
  {
    const PointCloud y0 = generate_points(InitSource::Kind::grid, 400, rho.box(), seed);
    DescentConfig cfg;
    cfg.tau = 0.1;
    cfg.max_steps = 10;
    cfg.solve = opts;
    const DescentTrace tr = run_descent(y0, rho, cfg);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& s : tr.steps) worst = std::max(worst, s.f_value - s.lemma_gf_bound);
    out.checks.push_back(from_bound("lemma_gf_trace_tau0.1", BoundCheck::of(worst, 0.0),
                                    {{"steps", 10}, {"n", 400}, {"eta", tr.eta},
                                     {"a", tr.a_factor}, {"epsilon", tr.epsilon}}));
  }
}

void suite_gaussian1d(SuiteResult& out) {
  const std::vector<int> ns{1 << 8, 1 << 10, 1 << 12, 1 << 14, 1 << 16};
  const GaussianSweep sweep = gaussian_lower_bound_check(ns, 0.5);
  json pts = json::array();
  for (const auto& p : sweep.points) {
    pts.push_back({{"n", p.n}, {"sigma", p.sigma}, {"cost", p.cost}, {"scaled", p.scaled}});
    out.checks.push_back(from_bound("gaussian_lower_bound_n" + std::to_string(p.n), p.check,
                                    {{"alpha", sweep.alpha}, {"constant", sweep.constant}}));
  }
  CheckResult mono{"scaled_cost_nondecreasing", 0.0, 0.0, 0.0, sweep.scaled_nondecreasing,
                   {{"points", pts}}};
  out.checks.push_back(std::move(mono));

  std::vector<double> xs, vs;
  const TruncGauss1D fixed(0.3);
  for (int n : ns) {
    xs.push_back(n);
    vs.push_back(quantile_cells(fixed, n).cost);
  }
  const RateFit fit = fit_rate(xs, vs);
  out.checks.push_back(from_bound("fixed_sigma_slope", BoundCheck::of(std::abs(fit.slope + 2.0), 0.2),
                                  {{"slope", fit.slope}, {"sigma", 0.3}}));
}

void suite_proba(SuiteResult& out, const Density& rho, std::uint64_t seed) {
  const Density uniform = Density::uniform();
  {
    const int n = 1000;
    const double eps = std::pow(n, -2.0 / 3.0);
    const KappaCheck k = kappa_expectation_check(uniform, n, eps, 200, seed);
    out.checks.push_back(from_bound("kappa_expectation_n1000", k.bound,
                                    {{"mean", k.mean}, {"standard_error", k.standard_error},
                                     {"epsilon", eps}, {"trials", 200}, {"seed", seed}}));
  }
  {
    const int n = 400;
    const double eps = std::pow(n, -2.0 / 3.0);
    const ConcentrationCheck c = concentration_check(uniform, rho, n, eps, 20, seed);
    out.checks.push_back(from_bound("concentration_n400", c.bound,
                                    {{"threshold", c.threshold}, {"k_constant", c.k_constant},
                                     {"fraction", c.fraction}, {"trials", 20}, {"seed", seed}}));
  }
  {
    const int n = 200;
    const double eps = std::pow(n, -2.0 / 3.0);
    const PointCloud y = sample_cloud(uniform, n, seed);
    const BoundedDifference d = kappa_bounded_difference(y, uniform, eps, 1000, seed + 1);
    out.checks.push_back(from_bound("kappa_bounded_difference_n200",
                                    BoundCheck::of(d.max_change, d.bound),
                                    {{"packing_constant", 5}, {"resamples", 1000}}));
  }
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"bounds", "lemmas", "gaussian1d", "proba"};
  return names;
}

SuiteResult run_suite(const std::string& suite, const Density& rho, std::uint64_t seed) {
  SuiteResult out;
  out.suite = suite;
  if (suite == "bounds") {
    suite_bounds(out, rho, seed);
  } else if (suite == "lemmas") {
    suite_lemmas(out, rho, seed);
  } else if (suite == "gaussian1d") {
    suite_gaussian1d(out);
  } else if (suite == "proba") {
    suite_proba(out, rho, seed);
  } else {
    throw std::invalid_argument("unknown suite '" + suite + "'");
  }
  return out;
}

}  // namespace otq
