#pragma once

#include "density.hpp"
#include "flownet.hpp"
#include "link_cost.hpp"

#include <cmath>

namespace wasn {

struct CostBreakdown {
  double H = 0.0;       // sensing uncertainty
  double P_bar = 0.0;   // average communication power
  double D = 0.0;       // H + lambda * P_bar
  double lambda = 0.0;
};

/// Density-weighted squared distance from every cell to its owning sensor.
inline double sensing_uncertainty(const NodeDeployment& P, const CellAssignment& assignment,
                                  const DensityGrid& grid) {
  if (assignment.nx != grid.nx() || assignment.ny != grid.ny())
    throw std::invalid_argument("sensing_uncertainty: assignment does not match grid");
  double h = 0.0;
  for (std::size_t k = 0; k < grid.cell_count(); ++k) {
    const auto i = assignment.owner[k];
    if (i >= P.n_sensors) throw std::out_of_range("sensing_uncertainty: owner is not a sensor");
    h += (P[i] - grid.cell_center(k)).squaredNorm() * grid.mass(k);
  }
  return h;
}

/// Link-sum form: transmit power on every link plus receive power on
/// sensor-to-sensor links.
inline double total_power(const NodeDeployment& P, const FlowMatrix& F, const PhysicalParams& params) {
  if (F.f.rows() != static_cast<Eigen::Index>(P.n_sensors) || F.f.cols() != static_cast<Eigen::Index>(P.size()))
    throw std::invalid_argument("total_power: flow matrix does not match deployment");
  double tx = 0.0;
  double rx = 0.0;
  for (std::size_t i = 0; i < P.n_sensors; ++i)
    for (std::size_t j = 0; j < P.size(); ++j) {
      const double fij = F(i, j);
      if (fij == 0.0) continue;
      tx += (P[i] - P[j]).squaredNorm() * fij;
      if (j < P.n_sensors) rx += fij;
    }
  return params.beta * tx + params.rho * rx;
}

inline CostBreakdown lagrangian_cost(const NodeDeployment& P, const CellAssignment& assignment,
                                     const DensityGrid& grid, const FlowMatrix& F,
                                     const PhysicalParams& params, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lagrangian_cost: lambda must be >= 0");
  CostBreakdown c;
  c.H = sensing_uncertainty(P, assignment, grid);
  c.P_bar = total_power(P, F, params);
  c.lambda = lambda;
  c.D = c.H + lambda * c.P_bar;
  return c;
}

/// |H - sum_i (scatter about c_i + |p_i - c_i|^2 v_i)|. Zero up to
/// rounding for any input; a self-test of the moment accumulation.
inline double parallel_axis_check(const NodeDeployment& P, const CellAssignment& assignment,
                                  const DensityGrid& grid) {
  const double h = sensing_uncertainty(P, assignment, grid);
  const auto m = cell_moments(grid, assignment, P.n_sensors);
  double split = 0.0;
  for (std::size_t k = 0; k < grid.cell_count(); ++k) {
    const auto i = assignment.owner[k];
    if (m.centroid[i]) split += (*m.centroid[i] - grid.cell_center(k)).squaredNorm() * grid.mass(k);
  }
  for (std::size_t i = 0; i < P.n_sensors; ++i)
    if (m.centroid[i]) split += (P[i] - *m.centroid[i]).squaredNorm() * m.volume[i];
  return std::abs(h - split);
}

}  // namespace wasn
