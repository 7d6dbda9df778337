#pragma once

#include "otq/bound_check.hpp"
#include "otq/density.hpp"
#include "otq/sdot.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace otq {

/// I_ε(Y): indices i with ‖y_i − y_j‖ ≥ ε for every j ≠ i.
struct SeparationStats {
  double epsilon = 0.0;
  std::vector<int> isolated;
  /// |I_ε| / N
  double kappa = 0.0;
  double min_pairwise = 0.0;
};

SeparationStats separation_stats(const PointCloud& sites, double epsilon);

/// W₂²(ρ, δ_{B_N(Y)}) ≤ C_{2,Ω}(ε⁻¹/N + 1 − κ), the left side solved at B_N(Y).
BoundCheck barycenter_bound(const PointCloud& sites, const Density& rho, double epsilon,
                            const SolveOptions& opts = {});
BoundCheck barycenter_bound(const Quantization& q, const Density& rho, double epsilon,
                            const SolveOptions& opts = {});

/// F_N(Y) − C_{2,Ω}/(Nε) ≤ N‖∇F_N(Y)‖². Throws EpsilonTooLarge when Y has
/// two sites closer than ε.
BoundCheck pl_check(const PointCloud& sites, const Density& rho, double epsilon,
                    const SolveOptions& opts = {});
BoundCheck pl_check(const Quantization& q, const Density& rho, double epsilon);

/// ((2i−1)/(2N), ½), i = 1..N: critical for F_N on the uniform square but
/// not a minimizer.
PointCloud midline_cloud(int n);

/// (½, (2i−1)/(2N)), i = 1..N: N points on the hyperplane x = ½.
PointCloud hyperplane_cloud(int n);

struct HyperplaneCheck {
  int n = 0;
  /// lhs = 1/12 − 1e−6, rhs = W₂²(ρ, δ_{B_N(Y)})
  BoundCheck bound;
  double max_x_deviation = 0.0;
  bool satisfied = false;
};

/// One Lloyd step from hyperplane_cloud(N) against a uniform density on
/// [0,1]²: the barycenters stay on x = ½ and the cost stays ≥ 1/12.
HyperplaneCheck hyperplane_bound_check(int n, const Density& rho_uniform,
                                       const SolveOptions& opts = {});

/// N i.i.d. draws from σ.
PointCloud sample_cloud(const Density& sigma, int n, std::uint64_t seed);

struct KappaCheck {
  /// lhs = (1 − ‖σ‖_∞ π ε²)^{N−1}, rhs = mean κ + 3 standard errors
  BoundCheck bound;
  double mean = 0.0;
  double standard_error = 0.0;
  std::vector<double> samples;
  std::uint64_t seed = 0;
};

/// Trial t draws its cloud from a generator seeded with seed + t.
KappaCheck kappa_expectation_check(const Density& sigma, int n, double epsilon, int trials,
                                   std::uint64_t seed);

struct ConcentrationCheck {
  double threshold = 0.0;
  double k_constant = 0.0;
  std::vector<double> costs;
  double fraction = 0.0;
  /// lhs = 0.95, rhs = fraction of trials with W₂²(ρ, δ_B) ≤ threshold
  BoundCheck bound;
  std::uint64_t seed = 0;
};

/// One Lloyd step from i.i.d. clouds drawn from σ. The threshold is
/// K·N^{−1/3}; by default K·N^{−1/3} = C_{2,Ω}(ε⁻¹/N + 1 − κ̲) with κ̲ the
/// expectation lower bound (1 − ‖σ‖_∞ π ε²)^{N−1}.
ConcentrationCheck concentration_check(const Density& sigma, const Density& rho, int n,
                                       double epsilon, int trials, std::uint64_t seed,
                                       std::optional<double> k_constant = std::nullopt,
                                       const SolveOptions& opts = {});

struct BoundedDifference {
  double max_change = 0.0;
  /// (2c₂ + 1)/N with c₂ = 5
  double bound = 0.0;
  bool satisfied = false;
};

/// Moves one random point of Y to a fresh draw from σ, `resamples` times,
/// and records the largest change of κ.
BoundedDifference kappa_bounded_difference(const PointCloud& sites, const Density& sigma,
                                           double epsilon, int resamples, std::uint64_t seed);

}  // namespace otq
