// Command-line front end: solve, rates, verify, points, lloyd, descent.

#include "otq/diagnostics.hpp"
#include "otq/errors.hpp"
#include "otq/experiment.hpp"
#include "otq/quantize.hpp"
#include "otq/sdot.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

constexpr int kExitIo = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitVerifyFailed = 3;

struct Common {
  std::string density = "uniform";
  std::string init = "grid";
  std::vector<int> ns;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  int resolution = 1024;
  bool no_gamma_dark = false;
  std::string out;
  std::string json_path;
};

otq::DensitySource density_source(const Common& c) {
  auto src = otq::DensitySource::parse(c.density);
  src.resolution = c.resolution;
  src.gamma_dark = !c.no_gamma_dark;
  return src;
}

void emit_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw otq::Error("cannot write " + path);
  f << j.dump(2) << '\n';
}

void emit_points(const otq::PointCloud& y, const std::string& path) {
  if (path.empty() || path == "-") {
    otq::write_points_csv(std::cout, y);
  } else {
    otq::write_points_csv(path, y);
  }
}

json header(const std::string& command) {
  return {{"command", command}, {"version", otq::version_string()}};
}

otq::PointCloud load_sites(const Common& c, const otq::Density& rho) {
  const auto init = otq::InitSource::parse(c.init);
  if (init.kind != otq::InitSource::Kind::csv && c.ns.size() != 1) {
    throw otq::ParseError("exactly one --n is needed to generate points");
  }
  return otq::initial_points(init, init.kind == otq::InitSource::Kind::csv ? 0 : c.ns.front(),
                             rho.box(), c.seed);
}

void add_density(CLI::App* cmd, Common& c) {
  cmd->add_option("--density", c.density, "uniform | gauss2:COEFF | pgm:PATH")
      ->capture_default_str();
  cmd->add_option("--resolution", c.resolution, "raster size for gauss2 densities")
      ->capture_default_str();
  cmd->add_flag("--no-gamma-dark", c.no_gamma_dark, "use gray level as mass (bright = heavy)");
}

void add_init(CLI::App* cmd, Common& c) {
  cmd->add_option("--init", c.init, "grid | random | csv:PATH")->capture_default_str();
  cmd->add_option("--n", c.ns, "number of points (repeatable)");
  cmd->add_option("--seed", c.seed, "PRNG seed (mt19937_64)")->capture_default_str();
}

int cmd_solve(const Common& c, const std::string& points_path) {
  const otq::Density rho = density_source(c).load();
  Common cc = c;
  if (!points_path.empty()) cc.init = "csv:" + points_path;
  const otq::PointCloud y = load_sites(cc, rho);
  json j = header("solve");
  j["config"] = {{"density", c.density}, {"init", cc.init}, {"tol", c.tol}, {"seed", c.seed}};
  try {
    const otq::Quantization q = otq::quantization(y, rho, {c.tol, 200});
    j["result"] = otq::to_json(q);
    emit_json(j, c.out);
    return 0;
  } catch (const otq::NotConverged& e) {
    j["error"] = e.what();
    j["solver"] = otq::to_json(e.report);
    emit_json(j, c.out);
    std::cerr << "error: " << e.what() << '\n';
    return kExitNotConverged;
  }
}

int cmd_rates(const Common& c, const std::string& mode, int steps, double tau,
              const std::string& schedule, std::optional<double> epsilon, int trials,
              bool all_trials) {
  if (c.ns.size() < 3) throw otq::ParseError("rates needs at least three --n values");
  otq::ExperimentSpec spec;
  spec.density = density_source(c);
  spec.init = otq::InitSource::parse(c.init);
  spec.ns = c.ns;
  spec.steps = steps;
  spec.tau = tau;
  spec.kn_schedule = schedule == "kn";
  spec.epsilon = epsilon;
  spec.trials = trials;
  spec.seed = c.seed;
  spec.tol = c.tol;
  if (mode == "one_lloyd") {
    spec.mode = otq::Mode::one_lloyd;
  } else if (mode == "lloyd_iterate") {
    spec.mode = otq::Mode::lloyd_iterate;
  } else {
    spec.mode = otq::Mode::descent;
  }
  const otq::Density rho = spec.density.load();
  const otq::RatesResult res = otq::run_rates(spec, rho, !all_trials);

  if (!c.out.empty()) {
    std::ofstream f(c.out);
    if (!f) throw otq::Error("cannot write " + c.out);
    otq::write_rates_csv(f, res);
  }
  json j = header("rates");
  j["config"] = otq::to_json(spec);
  json means = json::array();
  for (const auto& [n, v] : res.means) means.push_back({{"n", n}, {"mean_value", v}});
  j["means"] = means;
  int failed = 0;
  for (const auto& r : res.runs) failed += r.status == "ok" ? 0 : 1;
  j["runs"] = res.runs.size();
  j["failed_runs"] = failed;
  j["fit"] = res.fit ? otq::to_json(*res.fit) : json(nullptr);
  emit_json(j, c.json_path);
  if (!res.fit) {
    std::cerr << "error: fewer than three N values survived\n";
    return kExitNotConverged;
  }
  return 0;
}

int cmd_verify(const Common& c, const std::vector<std::string>& suites) {
  const otq::Density rho = density_source(c).load();
  json j = header("verify");
  j["config"] = {{"density", c.density}, {"seed", c.seed}};
  json list = json::array();
  bool ok = true;
  const auto& names = suites.empty() ? otq::suite_names() : suites;
  for (const auto& s : names) {
    const otq::SuiteResult r = otq::run_suite(s, rho, c.seed);
    ok = ok && r.passed();
    list.push_back(r.to_json());
    std::cerr << s << ": " << (r.passed() ? "pass" : "FAIL") << '\n';
  }
  j["suites"] = list;
  j["passed"] = ok;
  emit_json(j, c.out);
  return ok ? 0 : kExitVerifyFailed;
}

int cmd_points(const Common& c) {
  const otq::Density rho = density_source(c).load();
  const auto init = otq::InitSource::parse(c.init);
  if (init.kind == otq::InitSource::Kind::csv) throw otq::ParseError("points needs grid or random");
  if (c.ns.size() != 1) throw otq::ParseError("points needs exactly one --n");
  emit_points(otq::generate_points(init.kind, c.ns.front(), rho.box(), c.seed), c.out);
  return 0;
}

json trace_json(const otq::DescentTrace& tr) {
  json steps = json::array();
  for (const auto& s : tr.steps) {
    steps.push_back({{"k", s.k},
                     {"f_value", s.f_value},
                     {"grad_norm_sq", s.grad_norm_sq},
                     {"min_pairwise_distance", s.min_pairwise},
                     {"lemma_gf_bound", s.lemma_gf_bound},
                     {"pl_lhs", s.pl_lhs},
                     {"pl_rhs", s.pl_rhs}});
  }
  return {{"tau", tr.tau},
          {"eta", tr.eta},
          {"a", tr.a_factor},
          {"epsilon", tr.epsilon},
          {"c_omega", tr.c_omega},
          {"steps_run", tr.k_n},
          {"schedule_underflow", tr.schedule_underflow},
          {"terminal_cost", tr.terminal_cost},
          {"explicit_bound", tr.explicit_bound},
          {"trace", steps}};
}

int cmd_descent(const Common& c, const std::string& command, double tau, int steps,
                const std::string& schedule, std::optional<double> epsilon) {
  const otq::Density rho = density_source(c).load();
  const otq::PointCloud y0 = load_sites(c, rho);
  otq::DescentConfig cfg;
  cfg.tau = tau;
  cfg.max_steps = steps;
  cfg.schedule = schedule == "kn" ? otq::Schedule::kn : otq::Schedule::fixed_steps;
  cfg.epsilon0 = epsilon;
  cfg.solve = {c.tol, 200};
  try {
    const otq::DescentTrace tr = otq::run_descent(y0, rho, cfg);
    if (!c.out.empty()) otq::write_points_csv(c.out, tr.final_sites);
    json j = header(command);
    j["config"] = {{"density", c.density}, {"init", c.init}, {"tol", c.tol}, {"seed", c.seed},
                   {"schedule", schedule}};
    j["result"] = trace_json(tr);
    emit_json(j, c.json_path);
    return 0;
  } catch (const otq::NotConverged& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNotConverged;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uniform optimal quantization by semidiscrete optimal transport"};
  app.set_version_flag("--version", std::string(otq::version_string()));
  app.require_subcommand(1);

  Common c;
  std::string points_path;
  std::string mode = "one_lloyd";
  std::string schedule = "fixed";
  std::optional<double> epsilon;
  double tau = 1.0;
  int steps = 1;
  int trials = 20;
  bool all_trials = false;
  std::vector<std::string> suites;

  auto* solve = app.add_subcommand("solve", "solve for equal-mass power cells");
  add_density(solve, c);
  add_init(solve, c);
  solve->add_option("--points", points_path, "CSV of sites (header x,y)");
  solve->add_option("--tol", c.tol, "mass tolerance relative to 1/N")->capture_default_str();
  solve->add_option("--out", c.out, "JSON report path (default stdout)");

  auto* rates = app.add_subcommand("rates", "log-log rate experiment over several N");
  add_density(rates, c);
  add_init(rates, c);
  rates->add_option("--mode", mode, "one_lloyd | lloyd_iterate | descent")
      ->check(CLI::IsMember({"one_lloyd", "lloyd_iterate", "descent"}))
      ->capture_default_str();
  rates->add_option("--steps", steps, "Lloyd iterations or descent steps")->capture_default_str();
  rates->add_option("--tau", tau, "descent step size")->capture_default_str();
  rates->add_option("--schedule", schedule, "fixed | kn")
      ->check(CLI::IsMember({"fixed", "kn"}))
      ->capture_default_str();
  rates->add_option("--epsilon", epsilon, "separation for the kn schedule");
  rates->add_option("--trials", trials, "trials per N")->capture_default_str();
  rates->add_flag("--all-trials", all_trials, "repeat deterministic inits for every trial");
  rates->add_option("--tol", c.tol, "mass tolerance relative to 1/N")->capture_default_str();
  rates->add_option("--out", c.out, "per-run CSV path");
  rates->add_option("--json", c.json_path, "JSON report path (default stdout)");

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", suites, "bounds | lemmas | gaussian1d | proba (default: all)")
      ->check(CLI::IsMember(otq::suite_names()));
  std::string verify_density = "gauss2:8";
  verify->add_option("--density", verify_density, "uniform | gauss2:COEFF | pgm:PATH")
      ->capture_default_str();
  verify->add_option("--resolution", c.resolution, "raster size for gauss2 densities");
  verify->add_option("--seed", c.seed, "PRNG seed")->capture_default_str();
  verify->add_option("--out", c.out, "JSON report path (default stdout)");

  auto* points = app.add_subcommand("points", "generate a point cloud");
  add_density(points, c);
  add_init(points, c);
  points->add_option("--out", c.out, "CSV path (default stdout)");

  for (const char* name : {"lloyd", "descent"}) {
    auto* cmd = app.add_subcommand(name, std::string(name) == "lloyd" ? "Lloyd iterations"
                                                                       : "fixed-step gradient descent");
    add_density(cmd, c);
    add_init(cmd, c);
    cmd->add_option("--steps", steps, "number of steps")->capture_default_str();
    if (std::string(name) == "descent") {
      cmd->add_option("--tau", tau, "step size in (0, 1]")->capture_default_str();
      cmd->add_option("--schedule", schedule, "fixed | kn")
          ->check(CLI::IsMember({"fixed", "kn"}))
          ->capture_default_str();
      cmd->add_option("--epsilon", epsilon, "separation for the kn schedule");
    }
    cmd->add_option("--tol", c.tol, "mass tolerance relative to 1/N")->capture_default_str();
    cmd->add_option("--out", c.out, "final points CSV path");
    cmd->add_option("--json", c.json_path, "JSON trace path (default stdout)");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return cmd_solve(c, points_path);
    if (*rates) return cmd_rates(c, mode, steps, tau, schedule, epsilon, trials, all_trials);
    if (*verify) {
      c.density = verify_density;
      return cmd_verify(c, suites);
    }
    if (*points) return cmd_points(c);
    for (auto* sub : app.get_subcommands()) {
      const std::string name = sub->get_name();
      if (name == "lloyd") return cmd_descent(c, name, 1.0, steps, "fixed", std::nullopt);
      if (name == "descent") return cmd_descent(c, name, tau, steps, schedule, epsilon);
    }
  } catch (const otq::DuplicateSites& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const otq::NotConverged& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
