#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace wasn {

using Point = Eigen::Vector2d;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Axis-aligned target region.
struct Region {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  Region() = default;
  Region(double x0, double x1, double y0, double y1)
      : x_min(x0), x_max(x1), y_min(y0), y_max(y1) {
    if (!(x1 > x0) || !(y1 > y0))
      throw std::invalid_argument("Region: max must exceed min on both axes");
  }

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
  Point center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }

  bool contains(const Point& p) const {
    return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
  }

  Point clamp(const Point& p) const {
    return {std::clamp(p.x(), x_min, x_max), std::clamp(p.y(), y_min, y_max)};
  }
};

/// Node positions. Indices [0, n_sensors) are sensors, the remaining
/// n_fcs entries are fusion centers.
struct NodeDeployment {
  std::size_t n_sensors = 0;
  std::size_t n_fcs = 0;
  std::vector<Point> positions;

  NodeDeployment() = default;
  NodeDeployment(std::size_t n, std::size_t m, std::vector<Point> pos)
      : n_sensors(n), n_fcs(m), positions(std::move(pos)) {
    if (positions.size() != n + m)
      throw std::invalid_argument("NodeDeployment: expected N+M positions");
    for (const auto& p : positions)
      if (!p.allFinite())
        throw std::invalid_argument("NodeDeployment: non-finite position");
  }

  std::size_t size() const { return n_sensors + n_fcs; }
  bool is_sensor(std::size_t i) const { return i < n_sensors; }
  bool is_fc(std::size_t i) const { return i >= n_sensors && i < size(); }

  const Point& operator[](std::size_t i) const { return positions[i]; }
  Point& operator[](std::size_t i) { return positions[i]; }
};

}  // namespace wasn
