#pragma once

#include "otq/density.hpp"
#include "otq/sdot.hpp"

#include <optional>
#include <vector>

namespace otq {

/// C_{d,Ω} = (2^{2d−1}/ω_{d−1})·(diam(Ω)+1)^{d+1} for d = 2 (ω₁ = 2).
double c_d_omega(double diameter);

/// F_N(Y) = ½ W₂²(ρ, δ_Y).
double energy(const PointCloud& sites, const Density& rho, const SolveOptions& opts = {});

/// ∇F_N(Y) = (Y − B_N(Y)) / N.
PointCloud gradient(const PointCloud& sites, const Density& rho, const SolveOptions& opts = {});
PointCloud gradient(const Quantization& q);

/// Y ↦ B_N(Y).
PointCloud lloyd_step(const PointCloud& sites, const Density& rho, const SolveOptions& opts = {});

/// Y + τ(B_N(Y) − Y).
PointCloud descent_step(const PointCloud& sites, const Density& rho, double tau,
                        const SolveOptions& opts = {});
PointCloud descent_step(const Quantization& q, double tau);

enum class Schedule { fixed_steps, kn };

struct DescentConfig {
  double tau = 1.0;
  /// Step count for Schedule::fixed_steps.
  int max_steps = 0;
  Schedule schedule = Schedule::fixed_steps;
  /// Separation ε_N of Y⁰; measured from Y⁰ when unset.
  std::optional<double> epsilon0;
  SolveOptions solve;
  bool warm_start = true;
  /// Keep every `snapshot_stride`-th iterate (0 keeps none).
  int snapshot_stride = 0;
};

struct DescentStep {
  int k = 0;
  double f_value = 0.0;
  /// N‖∇F_N(Y^k)‖²
  double grad_norm_sq = 0.0;
  double min_pairwise = 0.0;
  /// Right side of F_N(Y^k) ≤ F_N(Y⁰)η^k + 2C(1−η)(ε^{1−d}/N)(A^k−η^k)/(A−η).
  double lemma_gf_bound = 0.0;
  /// F_N(Y^k) − C·ε_k^{1−d}/N with ε_k the current min pairwise distance.
  double pl_lhs = 0.0;
  double pl_rhs = 0.0;
};

struct DescentTrace {
  std::vector<DescentStep> steps;  // iterates 0..k
  std::vector<std::pair<int, PointCloud>> snapshots;
  PointCloud final_sites;
  double tau = 1.0;
  double eta = 1.0;
  double a_factor = 1.0;
  double epsilon = 0.0;
  double c_omega = 0.0;
  int k_n = 0;
  bool schedule_underflow = false;
  /// Right side of the terminal estimate
  /// W₂²(ρ,δ_{Y^k}) ≤ W₂²(ρ,δ_{Y⁰})η^k + 2C(1−η)/(A−η)·(A^k−η^k)/(Nε^{d−1}).
  double explicit_bound = 0.0;
  double terminal_cost = 0.0;
};

/// k_N = ⌊(1/(dτ)) ln(F_N(Y⁰)·N·ε^{d−1})⌋ with d = 2; nullopt when the log
/// argument is ≤ 1 (no meaningful step count).
std::optional<int> kn_schedule(double f0, int n, double epsilon, double tau);

/// Fixed-step descent Y^{k+1} = Y^k + τ(B_N(Y^k) − Y^k) with per-step
/// diagnostics. Records iterates 0..k; the gradient at the last iterate is
/// evaluated too so its row is complete.
DescentTrace run_descent(const PointCloud& y0, const Density& rho, const DescentConfig& cfg);

}  // namespace otq
