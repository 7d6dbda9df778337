#pragma once

#include "otq/density.hpp"
#include "otq/sdot.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace otq {

/// Library version with git describe suffix, e.g. "0.1.0-68def80".
const char* version_string();

/// Where the target density comes from: "uniform", "gauss2:COEFF" or
/// "pgm:PATH".
struct DensitySource {
  enum class Kind { uniform, gauss2, pgm };
  Kind kind = Kind::uniform;
  double coefficient = 0.0;
  std::string path;
  int resolution = 1024;
  bool gamma_dark = true;

  static DensitySource parse(const std::string& text);
  std::string describe() const;
  Density load() const;
};

/// "grid", "random" or "csv:PATH".
struct InitSource {
  enum class Kind { grid, random, csv };
  Kind kind = Kind::grid;
  std::string path;

  static InitSource parse(const std::string& text);
  std::string describe() const;
};

/// grid: n×n cell centres of the domain (N = n², NonSquareN otherwise);
/// random: i.i.d. uniform on the domain.
PointCloud generate_points(InitSource::Kind kind, int n, const Eigen::AlignedBox2d& domain,
                           std::uint64_t seed);
PointCloud initial_points(const InitSource& init, int n, const Eigen::AlignedBox2d& domain,
                          std::uint64_t seed);

/// Header "x,y", one point per line, 17 significant digits.
void write_points_csv(std::ostream& out, const PointCloud& points);
void write_points_csv(const std::string& path, const PointCloud& points);
PointCloud parse_points_csv(std::istream& in);
PointCloud read_points_csv(const std::string& path);

/// Ordinary least squares of log(value) against log(N).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;
};

RateFit fit_rate(const std::vector<double>& ns, const std::vector<double>& values);

enum class Mode { one_lloyd, lloyd_iterate, descent };

struct ExperimentSpec {
  DensitySource density;
  InitSource init;
  std::vector<int> ns;
  Mode mode = Mode::one_lloyd;
  /// Lloyd iterations or descent steps.
  int steps = 1;
  double tau = 1.0;
  bool kn_schedule = false;
  std::optional<double> epsilon;
  int trials = 20;
  std::uint64_t seed = 0;
  double tol = 1e-6;
};

struct RunRecord {
  int n = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  /// F_N(B_N(Y⁰)) for one_lloyd, terminal F_N otherwise
  double value = 0.0;
  double initial_value = 0.0;
  int steps = 0;
  double seconds = 0.0;
};

struct RatesResult {
  std::vector<RunRecord> runs;
  std::vector<std::pair<int, double>> means;
  std::optional<RateFit> fit;
};

/// Runs every (N, trial). Trial t uses seed + t; deterministic inits are run
/// once per N when `dedupe_deterministic` is set.
RatesResult run_rates(const ExperimentSpec& spec, const Density& rho,
                      bool dedupe_deterministic = false);

void write_rates_csv(std::ostream& out, const RatesResult& result);

nlohmann::json to_json(const ExperimentSpec& spec);
nlohmann::json to_json(const RateFit& fit);
nlohmann::json to_json(const SolveReport& report);
nlohmann::json to_json(const Quantization& q);

/// One named check of a verification suite.
struct CheckResult {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool satisfied = false;
  nlohmann::json details;
};

struct SuiteResult {
  std::string suite;
  std::vector<CheckResult> checks;
  bool passed() const;
  nlohmann::json to_json() const;
};

/// Suites: bounds, lemmas, gaussian1d, proba.
SuiteResult run_suite(const std::string& suite, const Density& rho, std::uint64_t seed);
const std::vector<std::string>& suite_names();

}  // namespace otq
