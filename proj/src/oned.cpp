#include "otq/oned.hpp"

#include <Eigen/Eigenvalues>

#include <array>
#include <cmath>
#include <stdexcept>

namespace otq {

namespace {

constexpr int kNodes = 20;

struct GaussLegendre {
  std::array<double, kNodes> x{};
  std::array<double, kNodes> w{};
};

// Golub–Welsch on the Legendre Jacobi matrix, nodes on [−1, 1].
const GaussLegendre& gauss_legendre() {
  static const GaussLegendre rule = [] {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(kNodes, kNodes);
    for (int k = 1; k < kNodes; ++k) {
      const double b = k / std::sqrt(4.0 * k * k - 1.0);
      j(k, k - 1) = b;
      j(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    GaussLegendre r;
    for (int k = 0; k < kNodes; ++k) {
      r.x[k] = es.eigenvalues()[k];
      const double v = es.eigenvectors()(0, k);
      r.w[k] = 2.0 * v * v;
    }
    return r;
  }();
  return rule;
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TruncGauss1D::TruncGauss1D(double sigma)
    : sigma_(sigma), uniform_(std::isinf(sigma)), m_sigma_(0.5), z_lo_(0.0), z_span_(1.0) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (uniform_) return;
  z_lo_ = std_normal_cdf(-1.0 / sigma);
  z_span_ = std::erf(1.0 / (sigma * std::sqrt(2.0)));
  m_sigma_ = 1.0 / (sigma * std::sqrt(2.0 * M_PI) * z_span_);
}

double TruncGauss1D::pdf(double x) const {
  if (x < -1.0 || x > 1.0) return 0.0;
  if (uniform_) return 0.5;
  return m_sigma_ * std::exp(-x * x / (2.0 * sigma_ * sigma_));
}

double TruncGauss1D::cdf(double x) const {
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  if (uniform_) return 0.5 * (x + 1.0);
  if (x > 0.0) return 1.0 - cdf(-x);
  return (std_normal_cdf(x / sigma_) - z_lo_) / z_span_;
}

double TruncGauss1D::quantile(double t) const {
  if (t <= 0.0) return -1.0;
  if (t >= 1.0) return 1.0;
  if (uniform_) return 2.0 * t - 1.0;
  if (t > 0.5) return -quantile(1.0 - t);
  double lo = -1.0, hi = 0.0;
  double x = -0.5;
  for (int it = 0; it < 200; ++it) {
    const double f = cdf(x) - t;
    if (f == 0.0) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double p = pdf(x);
    double next = p > 0.0 ? x - f / p : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-16 * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

double TruncGauss1D::mass(double a, double b) const { return cdf(b) - cdf(a); }

double TruncGauss1D::first_moment(double a, double b) const {
  if (uniform_) return 0.25 * (b - a) * (b + a);
  const double s2 = sigma_ * sigma_;
  // σ²(e^{−a²/2σ²} − e^{−b²/2σ²}) without cancellation for nearby a, b
  return -m_sigma_ * s2 * std::exp(-a * a / (2.0 * s2)) *
         std::expm1(-(b - a) * (b + a) / (2.0 * s2));
}

double TruncGauss1D::central_second_moment(double a, double b, double c) const {
  if (uniform_) return ((b - c) * (b - c) * (b - c) - (a - c) * (a - c) * (a - c)) / 6.0;
  const auto& gl = gauss_legendre();
  const int pieces = std::max(1, static_cast<int>(std::ceil(2.0 * (b - a) / sigma_)));
  const double h = (b - a) / pieces;
  double total = 0.0;
  for (int p = 0; p < pieces; ++p) {
    const double mid = a + (p + 0.5) * h;
    double s = 0.0;
    for (int k = 0; k < kNodes; ++k) {
      const double x = mid + 0.5 * h * gl.x[k];
      s += gl.w[k] * (x - c) * (x - c) * pdf(x);
    }
    total += 0.5 * h * s;
  }
  return total;
}

Cells1D quantile_cells(const TruncGauss1D& rho, int n) {
  if (n < 1) throw std::invalid_argument("need at least one cell");
  Cells1D cells;
  cells.breakpoints.resize(static_cast<std::size_t>(n) + 1);
  cells.breakpoints.front() = -1.0;
  cells.breakpoints.back() = 1.0;
  for (int i = 1; i < n; ++i) {
    cells.breakpoints[static_cast<std::size_t>(i)] = rho.quantile(static_cast<double>(i) / n);
  }
  cells.barycenters.resize(static_cast<std::size_t>(n));
  cells.masses.resize(static_cast<std::size_t>(n));
  double cost = 0.0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    const double a = cells.breakpoints[i];
    const double b = cells.breakpoints[i + 1];
    const double m = rho.mass(a, b);
    const double bary = rho.first_moment(a, b) / m;
    cells.masses[i] = m;
    cells.barycenters[i] = bary;
    cost += rho.central_second_moment(a, b, bary);
  }
  cells.cost = cost;
  return cells;
}

double sigma_for_alpha(double n, double alpha) {
  if (!(n >= 2.0)) throw std::invalid_argument("N must be at least 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  return 1.0 / std::sqrt(2.0 * alpha * std::log(n));
}

GaussianSweep gaussian_lower_bound_check(const std::vector<int>& ns, double delta) {
  if (ns.empty()) throw std::invalid_argument("empty sweep");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  GaussianSweep sweep;
  sweep.delta = delta;
  sweep.alpha = 0.5 * (1.0 + delta) + 0.05;
  const double p = 2.0 - delta;
  for (int n : ns) {
    GaussianSweepPoint pt;
    pt.n = n;
    pt.sigma = sigma_for_alpha(n, sweep.alpha);
    pt.cost = quantile_cells(TruncGauss1D(pt.sigma), n).cost;
    pt.scaled = pt.cost * std::pow(static_cast<double>(n), p);
    sweep.points.push_back(pt);
  }
  sweep.constant = sweep.points.front().scaled;
  sweep.satisfied = true;
  sweep.scaled_nondecreasing = true;
  for (std::size_t k = 0; k < sweep.points.size(); ++k) {
    auto& pt = sweep.points[k];
    pt.check = BoundCheck::of(sweep.constant * std::pow(static_cast<double>(pt.n), -p), pt.cost);
    sweep.satisfied = sweep.satisfied && pt.check.satisfied;
    if (k > 0 && pt.scaled < sweep.points[k - 1].scaled) sweep.scaled_nondecreasing = false;
  }
  return sweep;
}

double separable_grid_cost(const std::vector<TruncGauss1D>& axes, int n_per_axis) {
  if (axes.empty()) throw std::invalid_argument("need at least one axis");
  double total = 0.0;
  for (const auto& rho : axes) total += quantile_cells(rho, n_per_axis).cost;
  return total;
}

}  // namespace otq
