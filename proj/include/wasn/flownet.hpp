#pragma once

#include "geometry.hpp"
#include "link_cost.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace wasn {

/// Ratios at or below this are structural zeros (no edge).
inline constexpr double kStructuralZero = 1e-12;

/// Row-stochastic N x (N+M) matrix of forwarding ratios. Column j < N is
/// sensor j, column N + k is FC k.
struct NormalizedFlowMatrix {
  std::size_t n_sensors = 0;
  std::size_t n_fcs = 0;
  Matrix s;

  NormalizedFlowMatrix() = default;
  NormalizedFlowMatrix(std::size_t n, std::size_t m, Matrix ratios)
      : n_sensors(n), n_fcs(m), s(std::move(ratios)) {
    if (s.rows() != static_cast<Eigen::Index>(n) || s.cols() != static_cast<Eigen::Index>(n + m))
      throw std::invalid_argument("NormalizedFlowMatrix: expected N x (N+M) ratios");
  }

  /// 0/1 matrix with one successor per sensor.
  static NormalizedFlowMatrix tree(std::size_t n, std::size_t m,
                                   const std::vector<std::size_t>& successor) {
    if (successor.size() != n) throw std::invalid_argument("tree: need one successor per sensor");
    Matrix s = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n + m));
    for (std::size_t i = 0; i < n; ++i) {
      if (successor[i] >= n + m) throw std::out_of_range("tree: successor out of range");
      s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(successor[i])) = 1.0;
    }
    return {n, m, std::move(s)};
  }

  std::size_t nodes() const { return n_sensors + n_fcs; }
  double operator()(std::size_t i, std::size_t j) const {
    return s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  bool edge(std::size_t i, std::size_t j) const { return (*this)(i, j) > kStructuralZero; }

  /// Successor of every sensor when the matrix is a 0/1 tree.
  std::optional<std::vector<std::size_t>> successors() const {
    std::vector<std::size_t> out(n_sensors);
    for (std::size_t i = 0; i < n_sensors; ++i) {
      std::size_t count = 0;
      for (std::size_t j = 0; j < nodes(); ++j) {
        const double v = (*this)(i, j);
        if (v > kStructuralZero) {
          if (std::abs(v - 1.0) > kStructuralZero) return std::nullopt;
          out[i] = j;
          ++count;
        }
      }
      if (count != 1) return std::nullopt;
    }
    return out;
  }
};

/// Absolute data rates per link, same layout as NormalizedFlowMatrix.
struct FlowMatrix {
  std::size_t n_sensors = 0;
  std::size_t n_fcs = 0;
  Matrix f;

  double operator()(std::size_t i, std::size_t j) const {
    return f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  /// Total rate leaving sensor i.
  double out_flow(std::size_t i) const { return f.row(static_cast<Eigen::Index>(i)).sum(); }
  /// Total rate arriving at node j from sensors.
  double in_flow(std::size_t j) const { return f.col(static_cast<Eigen::Index>(j)).sum(); }
};

/// Energy per bit from each sensor to the FCs along the routing DAG.
struct PowerCoefficients {
  Vector g;

  std::size_t size() const { return static_cast<std::size_t>(g.size()); }
  double operator[](std::size_t i) const { return g[static_cast<Eigen::Index>(i)]; }
};

struct FlowViolation {
  enum class Property { shape, range, row_sum, cycle };
  Property property = Property::shape;
  std::size_t row = 0;
  std::size_t col = 0;
  std::vector<std::size_t> cycle;
  std::string message;
};

namespace detail {

// Kahn's algorithm over sensor->sensor edges, smallest ready index first.
// Returns the sensors that could be ordered; fewer than N means a cycle.
inline std::vector<std::size_t> kahn_order(const NormalizedFlowMatrix& S) {
  const std::size_t n = S.n_sensors;
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && S.edge(i, j)) ++indegree[j];
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push(i);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const auto i = ready.top();
    ready.pop();
    order.push_back(i);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && S.edge(i, j) && --indegree[j] == 0) ready.push(j);
  }
  return order;
}

inline std::vector<std::size_t> find_cycle(const NormalizedFlowMatrix& S,
                                           const std::vector<std::size_t>& ordered) {
  const std::size_t n = S.n_sensors;
  std::vector<bool> done(n, false);
  for (auto i : ordered) done[i] = true;
  // Every unordered node has an unordered predecessor; walk backwards.
  std::size_t start = 0;
  while (start < n && done[start]) ++start;
  std::vector<std::size_t> seen_at(n, n);
  std::vector<std::size_t> walk;
  std::size_t cur = start;
  while (seen_at[cur] == n) {
    seen_at[cur] = walk.size();
    walk.push_back(cur);
    for (std::size_t p = 0; p < n; ++p) {
      if (!done[p] && S.edge(p, cur)) {
        cur = p;
        break;
      }
    }
  }
  std::vector<std::size_t> cycle(walk.begin() + static_cast<std::ptrdiff_t>(seen_at[cur]), walk.end());
  std::reverse(cycle.begin(), cycle.end());
  return cycle;
}

}  // namespace detail

/// Checks ratio range, row sums and acyclicity. Returns the first
/// violation found, or nothing when the matrix is a valid routing.
inline std::optional<FlowViolation> validate(const NormalizedFlowMatrix& S) {
  using P = FlowViolation::Property;
  const auto n = S.n_sensors;
  if (S.s.rows() != static_cast<Eigen::Index>(n) || S.s.cols() != static_cast<Eigen::Index>(S.nodes()))
    return FlowViolation{P::shape, 0, 0, {}, "matrix is not N x (N+M)"};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < S.nodes(); ++j) {
      const double v = S(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        return FlowViolation{P::range, i, j, {},
                             "ratio s(" + std::to_string(i) + "," + std::to_string(j) + ") outside [0,1]"};
    }
  for (std::size_t i = 0; i < n; ++i) {
    const double sum = S.s.row(static_cast<Eigen::Index>(i)).sum();
    if (std::abs(sum - 1.0) > 1e-12)
      return FlowViolation{P::row_sum, i, 0, {},
                           "row " + std::to_string(i) + " sums to " + std::to_string(sum)};
  }
  for (std::size_t i = 0; i < n; ++i)
    if (S.edge(i, i))
      return FlowViolation{P::cycle, i, i, {i}, "sensor " + std::to_string(i) + " routes to itself"};
  const auto order = detail::kahn_order(S);
  if (order.size() != n) {
    auto cycle = detail::find_cycle(S, order);
    std::string msg = "routing cycle:";
    for (auto c : cycle) msg += " " + std::to_string(c);
    const auto row = cycle.front();
    const auto col = cycle.size() > 1 ? cycle[1] : cycle.front();
    return FlowViolation{P::cycle, row, col, std::move(cycle), msg};
  }
  return std::nullopt;
}

inline void require_valid(const NormalizedFlowMatrix& S) {
  if (auto v = validate(S)) throw std::invalid_argument("invalid normalized flow matrix: " + v->message);
}

/// Sensors ordered so that every sensor precedes the sensors it forwards to.
inline std::vector<std::size_t> topological_order(const NormalizedFlowMatrix& S) {
  require_valid(S);
  return detail::kahn_order(S);
}

/// Absolute link rates induced by S when sensor i generates rates[i].
inline FlowMatrix propagate_flows(const NormalizedFlowMatrix& S, const Vector& rates) {
  const auto order = topological_order(S);
  if (rates.size() != static_cast<Eigen::Index>(S.n_sensors))
    throw std::invalid_argument("propagate_flows: need one rate per sensor");
  for (Eigen::Index i = 0; i < rates.size(); ++i)
    if (!(rates[i] >= 0.0)) throw std::invalid_argument("propagate_flows: negative data rate");

  FlowMatrix F{S.n_sensors, S.n_fcs, Matrix::Zero(S.s.rows(), S.s.cols())};
  std::vector<double> through(S.n_sensors);
  for (std::size_t i = 0; i < S.n_sensors; ++i) through[i] = rates[static_cast<Eigen::Index>(i)];
  for (auto i : order) {
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < S.nodes(); ++j) {
      if (!S.edge(i, j)) continue;
      const double x = S(i, j) * through[i];
      F.f(r, static_cast<Eigen::Index>(j)) = x;
      if (j < S.n_sensors) through[j] += x;
    }
  }
  return F;
}

/// Per-bit delivery cost of every sensor, by dynamic programming from the
/// FCs backwards: g_i = sum_j s_ij (e_ij + g_j), g = 0 at FCs.
inline PowerCoefficients power_coefficients(const NodeDeployment& P, const NormalizedFlowMatrix& S,
                                            const PhysicalParams& params) {
  if (P.n_sensors != S.n_sensors || P.n_fcs != S.n_fcs)
    throw std::invalid_argument("power_coefficients: deployment and routing sizes differ");
  const auto order = topological_order(S);
  Vector g = Vector::Zero(static_cast<Eigen::Index>(S.nodes()));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const auto i = *it;
    double acc = 0.0;
    for (std::size_t j = 0; j < S.nodes(); ++j)
      if (S.edge(i, j)) acc += S(i, j) * (link_cost(P, i, j, params) + g[static_cast<Eigen::Index>(j)]);
    g[static_cast<Eigen::Index>(i)] = acc;
  }
  return PowerCoefficients{g.head(static_cast<Eigen::Index>(S.n_sensors))};
}

struct RoutePath {
  std::vector<std::size_t> nodes;  // starts at the sensor, ends at an FC
  double ratio = 0.0;              // product of forwarding ratios
  double cost = 0.0;               // summed link costs, energy per bit
};

struct PathSet {
  std::size_t sensor = 0;
  std::vector<RoutePath> paths;
};

struct PathOverflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every positive-ratio path from `sensor` to an FC. Exponential in the
/// worst case; throws PathOverflow beyond `max_paths`.
inline PathSet enumerate_paths(const NormalizedFlowMatrix& S, const NodeDeployment& P,
                               std::size_t sensor, const PhysicalParams& params,
                               std::size_t max_paths = 1'000'000) {
  require_valid(S);
  if (sensor >= S.n_sensors) throw std::out_of_range("enumerate_paths: not a sensor");
  PathSet out{sensor, {}};
  std::vector<std::size_t> stack{sensor};
  std::function<void(double, double)> dfs = [&](double ratio, double cost) {
    const auto i = stack.back();
    for (std::size_t j = 0; j < S.nodes(); ++j) {
      if (!S.edge(i, j)) continue;
      const double r = ratio * S(i, j);
      const double c = cost + link_cost(P, i, j, params);
      stack.push_back(j);
      if (j >= S.n_sensors) {
        if (out.paths.size() >= max_paths)
          throw PathOverflow("enumerate_paths: more than " + std::to_string(max_paths) + " paths");
        out.paths.push_back({stack, r, c});
      } else {
        dfs(r, c);
      }
      stack.pop_back();
    }
  };
  dfs(1.0, 0.0);
  return out;
}

}  // namespace wasn
