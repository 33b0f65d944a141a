#pragma once

#include "flownet.hpp"
#include "link_cost.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace wasn {

/// Single-successor routing with the per-bit path cost of every sensor.
struct RoutingTree {
  NormalizedFlowMatrix S;
  std::vector<std::size_t> successor;
  std::vector<double> path_cost;
};

namespace detail {

inline Matrix link_cost_table(const NodeDeployment& P, const PhysicalParams& params) {
  const auto n = P.n_sensors;
  Matrix e = Matrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(P.size()),
                              std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < P.size(); ++j)
      if (i != j) e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = link_cost(P, i, j, params);
  return e;
}

}  // namespace detail

/// Minimum-energy routes from every sensor to the nearest-in-cost FC.
///
/// Distances come from Bellman-Ford relaxation towards a virtual sink
/// joined to every FC at zero cost. Successors are then fixed in order of
/// increasing distance, each sensor choosing among FCs and already-fixed
/// sensors the lowest-index node that attains its minimum. This keeps the
/// result acyclic even when zero-cost links exist (collocated sensors with
/// rho = 0).
inline RoutingTree bellman_ford(const NodeDeployment& P, const PhysicalParams& params) {
  const auto n = P.n_sensors;
  const auto total = P.size();
  if (n == 0 || P.n_fcs == 0) throw std::invalid_argument("bellman_ford: need at least one sensor and one FC");
  const Matrix e = detail::link_cost_table(P, params);
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<double> dist(total, 0.0);
  std::fill(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(n), inf);
  for (std::size_t round = 0; round + 1 < total; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < total; ++j) {
        if (j == i) continue;
        const double cand = e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) + dist[j];
        if (cand < dist[i]) {
          dist[i] = cand;
          changed = true;
        }
      }
    if (!changed) break;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dist[a] < dist[b]; });

  RoutingTree out;
  out.successor.assign(n, 0);
  out.path_cost.assign(n, inf);
  std::vector<bool> fixed(total, false);
  for (std::size_t j = n; j < total; ++j) fixed[j] = true;
  std::vector<double> settled(total, 0.0);
  for (auto i : order) {
    double best = inf;
    std::size_t arg = n;
    for (std::size_t j = 0; j < total; ++j) {
      if (j == i || !fixed[j]) continue;
      const double cand = e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) + settled[j];
      if (cand < best) {
        best = cand;
        arg = j;
      }
    }
    out.successor[i] = arg;
    out.path_cost[i] = best;
    settled[i] = best;
    fixed[i] = true;
  }
  out.S = NormalizedFlowMatrix::tree(n, P.n_fcs, out.successor);
  return out;
}

inline NormalizedFlowMatrix bellman_ford_routing(const NodeDeployment& P, const PhysicalParams& params) {
  return bellman_ford(P, params).S;
}

/// Every sensor sends straight to its cheapest FC (lowest index on ties).
inline NormalizedFlowMatrix one_hop_routing(const NodeDeployment& P, const PhysicalParams& params) {
  std::vector<std::size_t> succ(P.n_sensors);
  for (std::size_t i = 0; i < P.n_sensors; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = P.n_sensors; j < P.size(); ++j) {
      const double c = link_cost(P, i, j, params);
      if (c < best) {
        best = c;
        succ[i] = j;
      }
    }
  }
  return NormalizedFlowMatrix::tree(P.n_sensors, P.n_fcs, succ);
}

/// Per-bit cost of each sensor's unique route in a tree routing.
inline std::vector<double> route_cost_of(const NormalizedFlowMatrix& S, const NodeDeployment& P,
                                         const PhysicalParams& params) {
  require_valid(S);
  const auto succ = S.successors();
  if (!succ) throw std::invalid_argument("route_cost_of: routing is not a single-successor tree");
  std::vector<double> cost(S.n_sensors, 0.0);
  for (std::size_t i = 0; i < S.n_sensors; ++i) {
    std::size_t cur = i;
    double acc = 0.0;
    while (cur < S.n_sensors) {
      const auto next = (*succ)[cur];
      acc += link_cost(P, cur, next, params);
      cur = next;
    }
    cost[i] = acc;
  }
  return cost;
}

}  // namespace wasn
