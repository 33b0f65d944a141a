#pragma once

#include "cell_assignment.hpp"
#include "density.hpp"
#include "flownet.hpp"

#include <limits>
#include <span>

namespace wasn {

/// Assigns each cell center to the site minimizing |site - w|^2 + offset.
/// Ties go to the lowest site index.
inline CellAssignment weighted_partition(std::span<const Point> sites, std::span<const double> offsets,
                                         const DensityGrid& grid) {
  if (sites.empty()) throw std::invalid_argument("weighted_partition: no sites");
  if (offsets.size() != sites.size()) throw std::invalid_argument("weighted_partition: one offset per site");
  std::vector<std::uint32_t> owner(grid.cell_count());
  for (std::size_t k = 0; k < grid.cell_count(); ++k) {
    const Point w = grid.cell_center(k);
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t arg = 0;
    for (std::size_t i = 0; i < sites.size(); ++i) {
      const double score = (sites[i] - w).squaredNorm() + offsets[i];
      if (score < best) {
        best = score;
        arg = static_cast<std::uint32_t>(i);
      }
    }
    owner[k] = arg;
  }
  return {grid.nx(), grid.ny(), std::move(owner)};
}

/// Cost-optimal partition for fixed positions and routing: sensor i's
/// score is offset by lambda * kappa * g_i.
inline CellAssignment power_diagram(const NodeDeployment& P, const PowerCoefficients& g, double lambda,
                                    double kappa, const DensityGrid& grid) {
  if (g.size() != P.n_sensors) throw std::invalid_argument("power_diagram: one coefficient per sensor");
  if (!(lambda >= 0.0)) throw std::invalid_argument("power_diagram: lambda must be >= 0");
  std::vector<double> offsets(P.n_sensors);
  for (std::size_t i = 0; i < P.n_sensors; ++i) {
    if (!(g[i] >= 0.0) || !std::isfinite(g[i]))
      throw std::invalid_argument("power_diagram: coefficients must be finite and >= 0");
    offsets[i] = lambda * kappa * g[i];
  }
  return weighted_partition(std::span<const Point>(P.positions.data(), P.n_sensors), offsets, grid);
}

inline CellAssignment voronoi(std::span<const Point> points, const DensityGrid& grid) {
  const std::vector<double> zeros(points.size(), 0.0);
  return weighted_partition(points, zeros, grid);
}

}  // namespace wasn
