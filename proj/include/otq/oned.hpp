#pragma once

#include "otq/bound_check.hpp"

#include <limits>
#include <vector>

namespace otq {

/// m_σ e^{−x²/(2σ²)} restricted to [−1, 1]. σ = +inf gives the uniform
/// density 1/2.
class TruncGauss1D {
 public:
  explicit TruncGauss1D(double sigma);
  static TruncGauss1D uniform() { return TruncGauss1D(std::numeric_limits<double>::infinity()); }

  double sigma() const { return sigma_; }
  /// Normalization constant: 1/m_σ = ∫_{−1}^{1} e^{−x²/(2σ²)} dx.
  double m_sigma() const { return m_sigma_; }
  bool is_uniform() const { return uniform_; }

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double t) const;

  /// ∫_a^b ρ and ∫_a^b x ρ in closed form.
  double mass(double a, double b) const;
  double first_moment(double a, double b) const;
  /// ∫_a^b (x − c)² ρ dx by composite Gauss–Legendre.
  double central_second_moment(double a, double b, double c) const;

 private:
  double sigma_;
  bool uniform_;
  double m_sigma_;
  double z_lo_;  // Φ(−1/σ)
  double z_span_;  // Φ(1/σ) − Φ(−1/σ)
};

/// Equal-mass quantile partition of [−1, 1] into N cells.
struct Cells1D {
  std::vector<double> breakpoints;  // N + 1
  std::vector<double> barycenters;  // N
  std::vector<double> masses;       // N
  /// W₂² between ρ and the uniform measure on the barycenters.
  double cost = 0.0;
};

Cells1D quantile_cells(const TruncGauss1D& rho, int n);

/// σ with e^{1/(2σ²)} = N^α.
double sigma_for_alpha(double n, double alpha);

struct GaussianSweepPoint {
  int n = 0;
  double sigma = 0.0;
  double cost = 0.0;
  /// cost · N^{2−δ}
  double scaled = 0.0;
  BoundCheck check;
};

struct GaussianSweep {
  double delta = 0.0;
  double alpha = 0.0;
  /// c fitted so that c·N₀^{−(2−δ)} equals the cost at the smallest N₀.
  double constant = 0.0;
  std::vector<GaussianSweepPoint> points;
  bool satisfied = false;
  bool scaled_nondecreasing = false;
};

/// With α = (1+δ)/2 + 0.05 and σ_N = sigma_for_alpha(N, α), checks
/// c·N^{−(2−δ)} ≤ exact cost at each N of the (increasing) sweep.
GaussianSweep gaussian_lower_bound_check(const std::vector<int>& ns, double delta);

/// Cost of the tensor grid of per-axis quantile barycenters, n points per
/// axis (N = n^d); equals the sum of the per-axis 1D costs.
double separable_grid_cost(const std::vector<TruncGauss1D>& axes, int n_per_axis);

}  // namespace otq
