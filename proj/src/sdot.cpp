#include "otq/sdot.hpp"

#include "otq/parallel.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>

namespace otq {

namespace {

double residual_of(const Eigen::VectorXd& masses) {
  const double n = static_cast<double>(masses.size());
  return (masses.array() - 1.0 / n).abs().maxCoeff() * n;
}

// Allowed round-off loss in the dual when accepting a step.
double dual_slack(double dual) { return 1e-14 + 1e-12 * std::abs(dual); }

// Weighted graph Laplacian of ∂masses/∂φ: off-diagonal −w_ij,
// w_ij = ∫_{P_i∩P_j} ρ ds / (2‖y_i − y_j‖).
Eigen::SparseMatrix<double> mass_jacobian(const PointCloud& sites, const CellState& s,
                                          const Density& rho) {
  const auto n = static_cast<Eigen::Index>(sites.rows());
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    for (const auto& f : s.diagram.neighbors[i]) {
      if (f.neighbor < static_cast<int>(i)) continue;
      const double seg = (f.b - f.a).norm();
      double integral = rho.segment_integral(f.a, f.b);
      if (seg > 0.0) integral *= f.length / seg;
      const double dist = (sites.row(f.neighbor) - sites.row(static_cast<Eigen::Index>(i))).norm();
      rows[i].emplace_back(f.neighbor, integral / (2.0 * dist));
    }
  });
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto& [j, w] : rows[static_cast<std::size_t>(i)]) {
      if (w <= 0.0) continue;
      trip.emplace_back(i, j, -w);
      trip.emplace_back(j, i, -w);
      trip.emplace_back(i, i, w);
      trip.emplace_back(j, j, w);
    }
  }
  Eigen::SparseMatrix<double> lap(n, n);
  lap.setFromTriplets(trip.begin(), trip.end());
  return lap;
}

// Solves L δ = g with the gauge row/column 0 removed; false if singular.
bool newton_direction(const Eigen::SparseMatrix<double>& lap, const Eigen::VectorXd& g,
                      Eigen::VectorXd& delta) {
  const Eigen::Index n = lap.rows();
  Eigen::SparseMatrix<double> reduced = lap.bottomRightCorner(n - 1, n - 1);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(reduced);
  if (ldlt.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  if (!(d.minCoeff() > 1e-14 * dmax)) return false;
  Eigen::VectorXd x = ldlt.solve(g.tail(n - 1));
  if (ldlt.info() != Eigen::Success || !x.allFinite()) return false;
  delta.setZero(n);
  delta.tail(n - 1) = x;
  return true;
}

Eigen::VectorXd preconditioned_gradient(const Eigen::SparseMatrix<double>& lap,
                                        const Eigen::VectorXd& g) {
  Eigen::VectorXd diag = lap.diagonal();
  double fill = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) fill = std::max(fill, diag[i]);
  if (!(fill > 0.0)) fill = static_cast<double>(g.size());
  Eigen::VectorXd step(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    step[i] = g[i] / (diag[i] > 0.0 ? diag[i] : fill);
  }
  return step;
}

}  // namespace

CellState evaluate_cells(const PointCloud& sites, const Potentials& phi, const Density& rho,
                         const PowerDiagram* hint) {
  CellState s;
  s.diagram = power_diagram(sites, phi, rho.domain(), hint);
  const std::size_t n = s.diagram.size();
  s.moments.resize(n);
  parallel_for(n, [&](std::size_t i) { s.moments[i] = rho.moments(s.diagram.cells[i]); });
  s.masses.resize(static_cast<Eigen::Index>(n));
  double dual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const PolygonMoments& m = s.moments[i];
    s.masses[k] = m.mass;
    const double cost = transport_cost_to_point(m, sites.row(k).transpose());
    dual += phi[k] / static_cast<double>(n) + cost - phi[k] * m.mass;
  }
  s.dual = dual;
  return s;
}

double dual_value(const PointCloud& sites, const Potentials& phi, const Density& rho) {
  return evaluate_cells(sites, phi, rho).dual;
}

Eigen::VectorXd mass_gradient(const PointCloud& sites, const Potentials& phi, const Density& rho) {
  const CellState s = evaluate_cells(sites, phi, rho);
  const double n = static_cast<double>(sites.rows());
  return (1.0 / n) - s.masses.array();
}

PotentialSolution solve_potentials(const PointCloud& sites, const Density& rho,
                                   const SolveOptions& opts, const Potentials* warm,
                                   const PowerDiagram* hint) {
  const auto n = static_cast<Eigen::Index>(sites.rows());
  if (n == 0) throw std::invalid_argument("empty point cloud");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  check_distinct(sites);
  const double target = 1.0 / static_cast<double>(n);

  PotentialSolution sol;
  sol.phi = (warm != nullptr && warm->size() == n) ? *warm : Potentials::Zero(n);
  sol.phi.array() -= sol.phi[0];
  sol.state = evaluate_cells(sites, sol.phi, rho, hint);
  if (warm != nullptr && !(sol.state.masses.minCoeff() > 0.0)) {
    // a stale warm start that empties cells is worse than the Voronoi start
    sol.phi.setZero();
    sol.state = evaluate_cells(sites, sol.phi, rho);
  }
  SolveReport& rep = sol.report;

  // Masses must stay positive for Newton; grow empty cells first.
  double mass_floor = -1.0;
  auto update_floor = [&] {
    if (mass_floor < 0.0 && sol.state.masses.minCoeff() > 0.0) {
      mass_floor = 0.5 * std::min(sol.state.masses.minCoeff(), target);
    }
  };
  update_floor();

  while (true) {
    rep.final_residual = residual_of(sol.state.masses);
    if (mass_floor > 0.0 && rep.final_residual <= opts.tol) return sol;
    if (rep.iterations >= opts.max_iter) throw NotConverged(rep);
    ++rep.iterations;

    const Eigen::VectorXd g = target - sol.state.masses.array();
    const Eigen::SparseMatrix<double> lap = mass_jacobian(sites, sol.state, rho);
    Eigen::VectorXd delta;
    bool newton = mass_floor > 0.0 && n > 1 && newton_direction(lap, g, delta);
    if (!newton) delta = preconditioned_gradient(lap, g);

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double alpha = 1.0;
      for (int halving = 0; halving < 40; ++halving, alpha *= 0.5) {
        Potentials trial = sol.phi + alpha * delta;
        trial.array() -= trial[0];
        CellState next = evaluate_cells(sites, trial, rho, &sol.state.diagram);
        // Near the optimum the dual gain drops below its round-off, so a
        // sufficient residual decrease also counts as progress.
        const bool ascent = next.dual >= sol.state.dual - dual_slack(sol.state.dual) ||
                            residual_of(next.masses) <= (1.0 - 0.5 * alpha) * rep.final_residual;
        const bool massive = mass_floor < 0.0 || next.masses.minCoeff() >= mass_floor;
        if (ascent && massive) {
          sol.phi = std::move(trial);
          sol.state = std::move(next);
          accepted = true;
          break;
        }
      }
      if (!accepted && newton) {
        newton = false;
        delta = preconditioned_gradient(lap, g);
      } else {
        break;
      }
    }
    if (!accepted) {
      rep.final_residual = residual_of(sol.state.masses);
      throw NotConverged(rep);
    }
    if (newton) {
      ++rep.newton_steps;
    } else {
      ++rep.fallback_steps;
    }
    update_floor();
  }
}

Quantization quantization(const PointCloud& sites, const Density& rho, const SolveOptions& opts,
                          const Quantization* warm) {
  const bool use_warm = warm != nullptr && warm->size() == sites.rows();
  PotentialSolution sol = solve_potentials(sites, rho, opts, use_warm ? &warm->phi : nullptr,
                                           use_warm ? &warm->diagram : nullptr);
  const auto n = static_cast<Eigen::Index>(sites.rows());
  Quantization q;
  q.sites = sites;
  q.phi = std::move(sol.phi);
  q.masses = sol.state.masses;
  q.barycenters.resize(n, 2);
  double cost = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const PolygonMoments& m = sol.state.moments[static_cast<std::size_t>(i)];
    if (!(m.mass > 0.0)) throw EmptyCell(static_cast<int>(i));
    q.barycenters.row(i) = m.barycenter().transpose();
    cost += transport_cost_to_point(m, sites.row(i).transpose());
  }
  q.diagram = std::move(sol.state.diagram);
  q.cost = cost;
  q.f_value = 0.5 * cost;
  q.report = sol.report;
  return q;
}

}  // namespace otq
