#include "otq/diagnostics.hpp"

#include "otq/parallel.hpp"
#include "otq/quantize.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace otq {

namespace {

// Packing count in the plane: at most 5 points fit in an open ε-disk with
// pairwise distances ≥ ε.
constexpr int kPackingC2 = 5;

// Relative slack so that spacings equal to ε up to rounding count as ties.
constexpr double kTieSlack = 1e-12;

std::vector<char> isolated_flags(const PointCloud& y, double epsilon) {
  const Eigen::Index n = y.rows();
  std::vector<char> ok(static_cast<std::size_t>(n), 1);
  const double e2 = epsilon * epsilon * (1.0 - kTieSlack);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if ((y.row(i) - y.row(j)).squaredNorm() < e2) {
        ok[static_cast<std::size_t>(i)] = 0;
        ok[static_cast<std::size_t>(j)] = 0;
      }
    }
  }
  return ok;
}

double kappa_of(const PointCloud& y, double epsilon) {
  const auto ok = isolated_flags(y, epsilon);
  double count = 0.0;
  for (char c : ok) count += c;
  return count / static_cast<double>(y.rows());
}

double kappa_lower_bound(const Density& sigma, int n, double epsilon) {
  const double base = 1.0 - sigma.max_value() * std::numbers::pi * epsilon * epsilon;
  return std::pow(std::max(base, 0.0), n - 1);
}

}  // namespace

SeparationStats separation_stats(const PointCloud& sites, double epsilon) {
  if (sites.rows() < 1) throw std::invalid_argument("empty point cloud");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  SeparationStats s;
  s.epsilon = epsilon;
  // ties at ε (up to rounding) count as isolated
  const auto ok = isolated_flags(sites, epsilon);
  for (std::size_t i = 0; i < ok.size(); ++i) {
    if (ok[i]) s.isolated.push_back(static_cast<int>(i));
  }
  s.kappa = static_cast<double>(s.isolated.size()) / static_cast<double>(sites.rows());
  s.min_pairwise = min_pairwise_distance(sites);
  return s;
}

BoundCheck barycenter_bound(const Quantization& q, const Density& rho, double epsilon,
                            const SolveOptions& opts) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1]");
  const Quantization qb = quantization(q.barycenters, rho, opts);
  const SeparationStats s = separation_stats(q.sites, epsilon);
  const double n = static_cast<double>(q.size());
  const double rhs = c_d_omega(rho.diameter()) * (1.0 / (epsilon * n) + 1.0 - s.kappa);
  return BoundCheck::of(qb.cost, rhs);
}

BoundCheck barycenter_bound(const PointCloud& sites, const Density& rho, double epsilon,
                            const SolveOptions& opts) {
  return barycenter_bound(quantization(sites, rho, opts), rho, epsilon, opts);
}

BoundCheck pl_check(const Quantization& q, const Density& rho, double epsilon) {
  const double dmin = min_pairwise_distance(q.sites);
  if (dmin < epsilon * (1.0 - kTieSlack)) throw EpsilonTooLarge(epsilon, dmin);
  const double n = static_cast<double>(q.size());
  const double lhs = q.f_value - c_d_omega(rho.diameter()) / (n * epsilon);
  const double rhs = n * gradient(q).squaredNorm();
  return BoundCheck::of(lhs, rhs);
}

BoundCheck pl_check(const PointCloud& sites, const Density& rho, double epsilon,
                    const SolveOptions& opts) {
  const double dmin = min_pairwise_distance(sites);
  if (dmin < epsilon * (1.0 - kTieSlack)) throw EpsilonTooLarge(epsilon, dmin);
  return pl_check(quantization(sites, rho, opts), rho, epsilon);
}

PointCloud midline_cloud(int n) {
  if (n < 1) throw std::invalid_argument("N must be positive");
  PointCloud y(n, 2);
  for (int i = 0; i < n; ++i) y.row(i) << (2.0 * i + 1.0) / (2.0 * n), 0.5;
  return y;
}

PointCloud hyperplane_cloud(int n) {
  if (n < 1) throw std::invalid_argument("N must be positive");
  PointCloud y(n, 2);
  for (int i = 0; i < n; ++i) y.row(i) << 0.5, (2.0 * i + 1.0) / (2.0 * n);
  return y;
}

HyperplaneCheck hyperplane_bound_check(int n, const Density& rho_uniform,
                                       const SolveOptions& opts) {
  HyperplaneCheck h;
  h.n = n;
  const Quantization q = quantization(hyperplane_cloud(n), rho_uniform, opts);
  h.max_x_deviation = (q.barycenters.col(0).array() - 0.5).abs().maxCoeff();
  const Quantization qb = quantization(q.barycenters, rho_uniform, opts);
  h.bound = BoundCheck::of(1.0 / 12.0 - 1e-6, qb.cost);
  h.satisfied = h.bound.satisfied && h.max_x_deviation <= 1e-9;
  return h;
}

PointCloud sample_cloud(const Density& sigma, int n, std::uint64_t seed) {
  Rng rng(seed);
  PointCloud y(n, 2);
  for (int i = 0; i < n; ++i) y.row(i) = sigma.sample(rng).transpose();
  return y;
}

KappaCheck kappa_expectation_check(const Density& sigma, int n, double epsilon, int trials,
                                   std::uint64_t seed) {
  if (trials < 2) throw std::invalid_argument("need at least two trials");
  KappaCheck k;
  k.seed = seed;
  k.samples.resize(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    k.samples[t] = kappa_of(sample_cloud(sigma, n, seed + t), epsilon);
  });
  const Eigen::Map<const Eigen::VectorXd> v(k.samples.data(), trials);
  k.mean = v.mean();
  const double var = (v.array() - k.mean).square().sum() / (trials - 1);
  k.standard_error = std::sqrt(var / trials);
  k.bound = BoundCheck::of(kappa_lower_bound(sigma, n, epsilon), k.mean + 3.0 * k.standard_error);
  return k;
}

ConcentrationCheck concentration_check(const Density& sigma, const Density& rho, int n,
                                       double epsilon, int trials, std::uint64_t seed,
                                       std::optional<double> k_constant,
                                       const SolveOptions& opts) {
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  ConcentrationCheck c;
  c.seed = seed;
  const double rate = std::pow(static_cast<double>(n), -1.0 / 3.0);
  if (k_constant) {
    c.k_constant = *k_constant;
  } else {
    const double nd = static_cast<double>(n);
    const double bound = c_d_omega(rho.diameter()) *
                         (1.0 / (epsilon * nd) + 1.0 - kappa_lower_bound(sigma, n, epsilon));
    c.k_constant = bound / rate;
  }
  c.threshold = c.k_constant * rate;
  c.costs.resize(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    const PointCloud y = sample_cloud(sigma, n, seed + static_cast<std::uint64_t>(t));
    const PointCloud b = lloyd_step(y, rho, opts);
    c.costs[static_cast<std::size_t>(t)] = quantization(b, rho, opts).cost;
  }
  int hits = 0;
  for (double cost : c.costs) hits += cost <= c.threshold ? 1 : 0;
  c.fraction = static_cast<double>(hits) / trials;
  c.bound = BoundCheck::of(0.95, c.fraction);
  return c;
}

BoundedDifference kappa_bounded_difference(const PointCloud& sites, const Density& sigma,
                                           double epsilon, int resamples, std::uint64_t seed) {
  BoundedDifference d;
  const int n = static_cast<int>(sites.rows());
  d.bound = (2.0 * kPackingC2 + 1.0) / n;
  const double base = kappa_of(sites, epsilon);
  Rng rng(seed);
  PointCloud moved = sites;
  for (int r = 0; r < resamples; ++r) {
    const auto i = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
    moved.row(i) = sigma.sample(rng).transpose();
    d.max_change = std::max(d.max_change, std::abs(kappa_of(moved, epsilon) - base));
    moved.row(i) = sites.row(i);
  }
  d.satisfied = d.max_change <= d.bound + 1e-15;
  return d;
}

}  // namespace otq
