#pragma once

#include "otq/density.hpp"
#include "otq/errors.hpp"
#include "otq/geom2d.hpp"

#include <Eigen/Core>

#include <vector>

namespace otq {

/// Kantorovich potentials, one per site, gauge-fixed so that phi[0] = 0.
using Potentials = Eigen::VectorXd;

struct SolveReport {
  int iterations = 0;
  /// max_i |mass_i − 1/N| · N
  double final_residual = 0.0;
  int newton_steps = 0;
  int fallback_steps = 0;
};

class NotConverged : public Error {
 public:
  explicit NotConverged(const SolveReport& r)
      : Error("potential solve did not converge (residual " + std::to_string(r.final_residual) +
              " after " + std::to_string(r.iterations) + " iterations)"),
        report(r) {}
  SolveReport report;
};

struct SolveOptions {
  /// Stop once max_i |mass_i − 1/N| ≤ tol / N.
  double tol = 1e-6;
  int max_iter = 200;
};

/// Diagram and per-cell moments for a fixed potential vector.
struct CellState {
  PowerDiagram diagram;
  std::vector<PolygonMoments> moments;
  Eigen::VectorXd masses;
  double dual = 0.0;
};

CellState evaluate_cells(const PointCloud& sites, const Potentials& phi, const Density& rho,
                         const PowerDiagram* hint = nullptr);

/// Σ_i φ_i/N + ∫_{P_i} (‖x−y_i‖² − φ_i) dρ. Concave in φ.
double dual_value(const PointCloud& sites, const Potentials& phi, const Density& rho);

/// Gradient of the dual: 1/N − ρ(P_i).
Eigen::VectorXd mass_gradient(const PointCloud& sites, const Potentials& phi, const Density& rho);

struct PotentialSolution {
  Potentials phi;
  SolveReport report;
  CellState state;
};

/// Damped Newton ascent on the dual until every cell carries mass 1/N.
/// `warm` seeds the iteration (any constant shift is irrelevant); `hint` is a
/// nearby diagram used to speed up cell construction.
PotentialSolution solve_potentials(const PointCloud& sites, const Density& rho,
                                   const SolveOptions& opts = {},
                                   const Potentials* warm = nullptr,
                                   const PowerDiagram* hint = nullptr);

/// Solved equal-mass transport from ρ to the uniform measure on the sites.
struct Quantization {
  PointCloud sites;
  Potentials phi;
  PowerDiagram diagram;
  Eigen::VectorXd masses;
  PointCloud barycenters;
  /// W₂²(ρ, δ_Y)
  double cost = 0.0;
  /// F_N = cost / 2
  double f_value = 0.0;
  SolveReport report;

  int size() const { return static_cast<int>(sites.rows()); }
};

/// Throws NotConverged, EmptyCell, DuplicateSites.
Quantization quantization(const PointCloud& sites, const Density& rho,
                          const SolveOptions& opts = {}, const Quantization* warm = nullptr);

}  // namespace otq
