#include "otq/quantize.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace otq {

double c_d_omega(double diameter) {
  // d = 2: 2^{3}/ω₁ = 4
  return 4.0 * std::pow(diameter + 1.0, 3);
}

double energy(const PointCloud& sites, const Density& rho, const SolveOptions& opts) {
  return quantization(sites, rho, opts).f_value;
}

PointCloud gradient(const Quantization& q) {
  return (q.sites - q.barycenters) / static_cast<double>(q.size());
}

PointCloud gradient(const PointCloud& sites, const Density& rho, const SolveOptions& opts) {
  return gradient(quantization(sites, rho, opts));
}

PointCloud lloyd_step(const PointCloud& sites, const Density& rho, const SolveOptions& opts) {
  return quantization(sites, rho, opts).barycenters;
}

PointCloud descent_step(const Quantization& q, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in [0, 1]");
  if (tau == 1.0) return q.barycenters;
  return q.sites + tau * (q.barycenters - q.sites);
}

PointCloud descent_step(const PointCloud& sites, const Density& rho, double tau,
                        const SolveOptions& opts) {
  if (tau == 0.0) return sites;
  return descent_step(quantization(sites, rho, opts), tau);
}

std::optional<int> kn_schedule(double f0, int n, double epsilon, double tau) {
  const double arg = f0 * n * epsilon;
  if (!(arg > 1.0)) return std::nullopt;
  const double k = std::floor(std::log(arg) / (2.0 * tau));
  if (!(k >= 1.0)) return std::nullopt;
  return static_cast<int>(k);
}

DescentTrace run_descent(const PointCloud& y0, const Density& rho, const DescentConfig& cfg) {
  if (!(cfg.tau > 0.0 && cfg.tau <= 1.0)) throw std::invalid_argument("tau must lie in (0, 1]");
  const int n = static_cast<int>(y0.rows());
  const double nd = static_cast<double>(n);

  DescentTrace tr;
  tr.tau = cfg.tau;
  tr.eta = 1.0 - 0.5 * cfg.tau * (2.0 - cfg.tau);
  tr.a_factor = cfg.tau < 1.0 ? 1.0 / (1.0 - cfg.tau) : std::numeric_limits<double>::infinity();
  tr.epsilon = cfg.epsilon0.value_or(min_pairwise_distance(y0));
  tr.c_omega = c_d_omega(rho.diameter());

  Quantization q = quantization(y0, rho, cfg.solve);
  const double f0 = q.f_value;

  int steps = cfg.max_steps;
  if (cfg.schedule == Schedule::kn) {
    const auto k = kn_schedule(f0, n, tr.epsilon, cfg.tau);
    tr.schedule_underflow = !k.has_value();
    steps = k.value_or(0);
  }
  tr.k_n = steps;

  auto gf_bound = [&](int k) {
    const double ek = std::pow(tr.eta, k);
    if (k == 0) return f0;
    if (!std::isfinite(tr.a_factor)) {
      // τ = 1: A is infinite and the estimate is vacuous beyond one step
      return k == 1 ? f0 * ek + 2.0 * tr.c_omega * (1.0 - tr.eta) / (nd * tr.epsilon)
                    : std::numeric_limits<double>::infinity();
    }
    const double ak = std::pow(tr.a_factor, k);
    return f0 * ek + 2.0 * tr.c_omega * (1.0 - tr.eta) / (nd * tr.epsilon) * (ak - ek) /
                         (tr.a_factor - tr.eta);
  };

  PointCloud y = y0;
  for (int k = 0;; ++k) {
    DescentStep s;
    s.k = k;
    s.f_value = q.f_value;
    const PointCloud g = gradient(q);
    s.grad_norm_sq = nd * g.squaredNorm();
    s.min_pairwise = min_pairwise_distance(y);
    s.lemma_gf_bound = gf_bound(k);
    s.pl_lhs = q.f_value - tr.c_omega / (nd * s.min_pairwise);
    s.pl_rhs = s.grad_norm_sq;
    tr.steps.push_back(s);
    if (cfg.snapshot_stride > 0 && k % cfg.snapshot_stride == 0) tr.snapshots.emplace_back(k, y);
    if (k == steps) break;

    y = descent_step(q, cfg.tau);
    q = quantization(y, rho, cfg.solve, cfg.warm_start ? &q : nullptr);
  }
  tr.final_sites = y;
  tr.terminal_cost = q.cost;
  if (steps == 0) {
    tr.explicit_bound = 2.0 * f0;
  } else if (!std::isfinite(tr.a_factor)) {
    tr.explicit_bound = steps == 1 ? 2.0 * f0 * tr.eta +
                                         2.0 * tr.c_omega * (1.0 - tr.eta) / (nd * tr.epsilon)
                                   : std::numeric_limits<double>::infinity();
  } else {
    const double ek = std::pow(tr.eta, steps);
    const double ak = std::pow(tr.a_factor, steps);
    tr.explicit_bound = 2.0 * f0 * ek + 2.0 * tr.c_omega * (1.0 - tr.eta) /
                                            (tr.a_factor - tr.eta) * (ak - ek) /
                                            (nd * tr.epsilon);
  }
  return tr;
}

}  // namespace otq
