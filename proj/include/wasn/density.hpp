#pragma once

#include "cell_assignment.hpp"
#include "geometry.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace wasn {

/// Density f sampled at the centers of a regular nx-by-ny grid over a
/// region. Integrals are evaluated with the midpoint rule.
class DensityGrid {
 public:
  DensityGrid() = default;

  /// `values` is row-major (iy * nx + ix). Throws on a negative or
  /// non-finite sample, naming the offending cell. When `normalize` is set
  /// the samples are rescaled so that the density integrates to one.
  DensityGrid(const Region& region, std::size_t nx, std::size_t ny, std::vector<double> values,
              bool normalize = true)
      : region_(region), nx_(nx), ny_(ny), values_(std::move(values)) {
    if (nx_ == 0 || ny_ == 0) throw std::invalid_argument("DensityGrid: nx and ny must be >= 1");
    if (values_.size() != nx_ * ny_)
      throw std::invalid_argument("DensityGrid: expected " + std::to_string(nx_ * ny_) +
                                  " samples, got " + std::to_string(values_.size()));
    dx_ = region_.width() / static_cast<double>(nx_);
    dy_ = region_.height() / static_cast<double>(ny_);
    cell_area_ = dx_ * dy_;
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!(values_[k] >= 0.0) || !std::isfinite(values_[k]))
        throw std::invalid_argument("DensityGrid: invalid density sample at cell " +
                                    std::to_string(k) + " (ix=" + std::to_string(k % nx_) +
                                    ", iy=" + std::to_string(k / nx_) + ")");
    }
    integral_ = raw_integral();
    if (normalize) {
      if (!(integral_ > 0.0)) throw std::invalid_argument("DensityGrid: cannot normalize a zero density");
      const double scale = 1.0 / integral_;
      for (auto& v : values_) v *= scale;
      integral_ = raw_integral();
    }
  }

  const Region& region() const { return region_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t cell_count() const { return values_.size(); }
  double cell_area() const { return cell_area_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  double cell_diagonal() const { return std::hypot(dx_, dy_); }
  /// Integral of the stored samples; 1 after normalization.
  double integral() const { return integral_; }

  const std::vector<double>& values() const { return values_; }
  double value(std::size_t k) const { return values_[k]; }
  /// Probability mass f * cell_area of cell k.
  double mass(std::size_t k) const { return values_[k] * cell_area_; }

  Point cell_center(std::size_t k) const {
    const auto ix = k % nx_;
    const auto iy = k / nx_;
    return {region_.x_min + (static_cast<double>(ix) + 0.5) * dx_,
            region_.y_min + (static_cast<double>(iy) + 0.5) * dy_};
  }

 private:
  double raw_integral() const {
    double s = 0.0;
    for (double v : values_) s += v * cell_area_;
    return s;
  }

  Region region_;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<double> values_;
  double dx_ = 0.0;
  double dy_ = 0.0;
  double cell_area_ = 0.0;
  double integral_ = 0.0;
};

struct UniformDensity {};

/// Explicit samples, row-major with ny rows of nx values.
struct DensityTable {
  std::vector<double> values;
  bool normalize = true;
};

using DensitySpec = std::variant<UniformDensity, DensityTable>;

inline DensityGrid build_grid(const Region& region, std::size_t nx, std::size_t ny,
                              const DensitySpec& spec) {
  if (std::holds_alternative<UniformDensity>(spec))
    return DensityGrid(region, nx, ny, std::vector<double>(nx * ny, 1.0 / region.area()), false);
  const auto& table = std::get<DensityTable>(spec);
  return DensityGrid(region, nx, ny, table.values, table.normalize);
}

/// Per-sensor mass and centroid of the assigned cells. A sensor with no
/// mass has no centroid.
struct CellMoments {
  std::vector<double> volume;
  std::vector<std::optional<Point>> centroid;

  std::size_t size() const { return volume.size(); }
};

inline CellMoments cell_moments(const DensityGrid& grid, const CellAssignment& assignment,
                                std::size_t n_sensors) {
  if (assignment.nx != grid.nx() || assignment.ny != grid.ny())
    throw std::invalid_argument("cell_moments: assignment does not match grid");
  std::vector<double> vol(n_sensors, 0.0);
  std::vector<Point> first(n_sensors, Point::Zero());
  for (std::size_t k = 0; k < grid.cell_count(); ++k) {
    const auto i = assignment.owner[k];
    if (i >= n_sensors) throw std::out_of_range("cell_moments: owner index out of range");
    const double m = grid.mass(k);
    vol[i] += m;
    first[i] += m * grid.cell_center(k);
  }
  CellMoments out;
  out.volume = vol;
  out.centroid.resize(n_sensors);
  for (std::size_t i = 0; i < n_sensors; ++i)
    if (vol[i] > 0.0) out.centroid[i] = first[i] / vol[i];
  return out;
}

/// Data generation rate of each sensor, kappa times its cell mass.
inline Vector data_rates(const CellMoments& moments, double kappa) {
  if (!(kappa > 0.0)) throw std::invalid_argument("data_rates: kappa must be positive");
  Vector rates(static_cast<Eigen::Index>(moments.size()));
  for (std::size_t i = 0; i < moments.size(); ++i)
    rates[static_cast<Eigen::Index>(i)] = kappa * moments.volume[i];
  return rates;
}

}  // namespace wasn
