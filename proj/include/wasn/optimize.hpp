#pragma once

#include "cost.hpp"
#include "density.hpp"
#include "flownet.hpp"
#include "partition.hpp"
#include "routing.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace wasn {

/// Which routings the optimizer may choose from.
enum class RoutingPolicy {
  multi_hop,  // Bellman-Ford over all sensor-to-node links
  one_hop,    // each sensor straight to its cheapest FC
};

struct OptimizerConfig {
  std::size_t n_sensors = 40;
  std::size_t n_fcs = 4;
  double lambda = 0.25;
  PhysicalParams params;
  double epsilon = 1e-6;
  std::size_t max_iterations = 500;
  std::size_t lloyd_max_iterations = 100;
  std::uint64_t seed = 0;
  /// Also require that the last sweep left partition and routing unchanged.
  bool require_stable_partition = true;

  void check() const {
    params.check();
    if (n_sensors == 0 || n_fcs == 0) throw std::invalid_argument("OptimizerConfig: need N >= 1 and M >= 1");
    if (!(lambda >= 0.0)) throw std::invalid_argument("OptimizerConfig: lambda must be >= 0");
    if (!(epsilon > 0.0)) throw std::invalid_argument("OptimizerConfig: epsilon must be > 0");
    if (max_iterations == 0) throw std::invalid_argument("OptimizerConfig: max_iterations must be >= 1");
  }
};

struct IterationRecord {
  std::size_t iteration = 0;
  std::vector<Point> positions;
  std::vector<std::size_t> successor;  // empty for non-tree routings
  CostBreakdown cost;
};

/// Everything needed to score a deployment: positions, routing, the
/// partition and the quantities derived from them.
struct NetworkState {
  NodeDeployment P;
  NormalizedFlowMatrix S;
  PowerCoefficients g;
  CellAssignment W;
  CellMoments moments;
  FlowMatrix F;
  CostBreakdown cost;
};

struct Trajectory {
  std::vector<IterationRecord> records;
  NetworkState final_state;
  std::size_t iterations = 0;
  bool truncated = false;
};

/// Closed-form minimizer of the cost in sensor i's position with the
/// partition, routing and all other nodes held fixed. Returns the current
/// position when the sensor covers no mass and carries no flow.
inline Point sensor_update(std::size_t i, const CellMoments& moments, const FlowMatrix& F,
                           const NodeDeployment& P, double lambda, double beta) {
  const double lb = lambda * beta;
  Point num = Point::Zero();
  double den = 0.0;
  if (moments.volume[i] > 0.0) {
    num += *moments.centroid[i] * moments.volume[i];
    den += moments.volume[i];
  }
  if (lb > 0.0) {
    for (std::size_t j = 0; j < P.size(); ++j) {
      const double out = F(i, j);
      if (out != 0.0) {
        num += lb * out * P[j];
        den += lb * out;
      }
      if (j < P.n_sensors) {
        const double in = F(j, i);
        if (in != 0.0) {
          num += lb * in * P[j];
          den += lb * in;
        }
      }
    }
  }
  if (!(den > 0.0)) return P[i];
  return num / den;
}

/// Flow-weighted mean of the FC's predecessors; unchanged without inflow.
inline Point fc_update(std::size_t i, const FlowMatrix& F, const NodeDeployment& P) {
  Point num = Point::Zero();
  double den = 0.0;
  for (std::size_t j = 0; j < P.n_sensors; ++j) {
    const double in = F(j, i);
    if (in != 0.0) {
      num += in * P[j];
      den += in;
    }
  }
  if (!(den > 0.0)) return P[i];
  return num / den;
}

template <class Rng>
std::vector<Point> random_points(const Region& region, std::size_t count, Rng& rng) {
  std::uniform_real_distribution<double> ux(region.x_min, region.x_max);
  std::uniform_real_distribution<double> uy(region.y_min, region.y_max);
  std::vector<Point> pts(count);
  for (auto& p : pts) {
    const double x = ux(rng);
    p = Point(x, uy(rng));
  }
  return pts;
}

/// Plain Lloyd quantizer of the grid density. Stops once the relative
/// distortion improvement of a sweep drops below `epsilon`.
inline std::vector<Point> lloyd(const DensityGrid& grid, std::vector<Point> points, double epsilon,
                                std::size_t max_iterations) {
  auto W = voronoi(points, grid);
  double d_old = sensing_uncertainty(NodeDeployment(points.size(), 0, points), W, grid);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const auto m = cell_moments(grid, W, points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      if (m.centroid[i]) points[i] = *m.centroid[i];
    W = voronoi(points, grid);
    const double d_new = sensing_uncertainty(NodeDeployment(points.size(), 0, points), W, grid);
    const bool done = !(d_old > 0.0) || (d_old - d_new) / d_old < epsilon;
    d_old = d_new;
    if (done) break;
  }
  return points;
}

/// Sensors and FCs placed independently as Lloyd quantizers of the
/// density, each from a seeded uniform-random start.
inline NodeDeployment lloyd_init(const DensityGrid& grid, std::size_t n_sensors, std::size_t n_fcs,
                                 std::uint64_t seed, double epsilon = 1e-6,
                                 std::size_t max_iterations = 100) {
  if (n_sensors == 0 || n_fcs == 0) throw std::invalid_argument("lloyd_init: need N >= 1 and M >= 1");
  std::mt19937_64 rng(seed);
  auto sensors = random_points(grid.region(), n_sensors, rng);
  auto fcs = random_points(grid.region(), n_fcs, rng);
  sensors = lloyd(grid, std::move(sensors), epsilon, max_iterations);
  fcs = lloyd(grid, std::move(fcs), epsilon, max_iterations);
  std::vector<Point> all = std::move(sensors);
  all.insert(all.end(), fcs.begin(), fcs.end());
  return {n_sensors, n_fcs, std::move(all)};
}

inline NormalizedFlowMatrix choose_routing(const NodeDeployment& P, const PhysicalParams& params,
                                           RoutingPolicy policy) {
  return policy == RoutingPolicy::multi_hop ? bellman_ford_routing(P, params) : one_hop_routing(P, params);
}

/// Recomputes flows and cost for a state whose P, S and W are set.
inline void refresh(NetworkState& st, const DensityGrid& grid, const PhysicalParams& params, double lambda) {
  st.moments = cell_moments(grid, st.W, st.P.n_sensors);
  st.F = propagate_flows(st.S, data_rates(st.moments, params.kappa));
  st.cost = lagrangian_cost(st.P, st.W, grid, st.F, params, lambda);
}

/// Scores a deployment the way the baselines do: a plain Voronoi partition
/// of the sensors and the given routing policy.
inline NetworkState evaluate_voronoi(const NodeDeployment& P, const DensityGrid& grid,
                                     const PhysicalParams& params, double lambda, RoutingPolicy policy) {
  NetworkState st;
  st.P = P;
  st.S = choose_routing(P, params, policy);
  st.g = power_coefficients(P, st.S, params);
  st.W = voronoi(std::span<const Point>(P.positions.data(), P.n_sensors), grid);
  refresh(st, grid, params, lambda);
  return st;
}

/// Alternating minimization over node positions, routing and partition.
///
/// One step moves every sensor (ascending index) and then every FC to its
/// closed-form minimizer, using positions already updated in the same
/// sweep, clamps each move to the region, reroutes, and finally recomputes
/// the power-diagram partition. Each of these sub-steps is an exact
/// minimizer of the discretized cost over one block of variables, so the
/// cost never increases.
class RoutingAwareLloyd {
 public:
  RoutingAwareLloyd(const DensityGrid& grid, OptimizerConfig config,
                    RoutingPolicy policy = RoutingPolicy::multi_hop)
      : grid_(grid), cfg_(std::move(config)), policy_(policy) {
    cfg_.check();
  }

  /// Starts from `P0`, or from a Lloyd initialization when absent. The
  /// first routing comes straight from the router; no placeholder routing
  /// is ever scored.
  void initialize(std::optional<NodeDeployment> P0 = std::nullopt) {
    NodeDeployment P = P0 ? std::move(*P0)
                          : lloyd_init(grid_, cfg_.n_sensors, cfg_.n_fcs, cfg_.seed, cfg_.epsilon,
                                       cfg_.lloyd_max_iterations);
    if (P.n_sensors != cfg_.n_sensors || P.n_fcs != cfg_.n_fcs)
      throw std::invalid_argument("RoutingAwareLloyd: initial deployment size does not match config");
    for (auto& p : P.positions) p = grid_.region().clamp(p);
    st_.P = std::move(P);
    route_and_partition();
  }

  /// One full sweep; returns the cost after it.
  const CostBreakdown& step() {
    const auto& region = grid_.region();
    const double lambda = cfg_.lambda;
    const double beta = cfg_.params.beta;
    for (std::size_t i = 0; i < st_.P.n_sensors; ++i)
      st_.P[i] = region.clamp(sensor_update(i, st_.moments, st_.F, st_.P, lambda, beta));
    for (std::size_t i = st_.P.n_sensors; i < st_.P.size(); ++i)
      st_.P[i] = region.clamp(fc_update(i, st_.F, st_.P));
    const auto old_W = st_.W;
    const Matrix old_S = st_.S.s;
    route_and_partition();
    structure_changed_ = !(old_W == st_.W) || old_S != st_.S.s;
    return st_.cost;
  }

  const NetworkState& state() const { return st_; }
  const OptimizerConfig& config() const { return cfg_; }
  /// Whether the last step changed any cell owner or route.
  bool last_step_changed_structure() const { return structure_changed_; }

 private:
  void route_and_partition() {
    st_.S = choose_routing(st_.P, cfg_.params, policy_);
    st_.g = power_coefficients(st_.P, st_.S, cfg_.params);
    st_.W = power_diagram(st_.P, st_.g, cfg_.lambda, cfg_.params.kappa, grid_);
    refresh(st_, grid_, cfg_.params, cfg_.lambda);
  }

  const DensityGrid& grid_;
  OptimizerConfig cfg_;
  RoutingPolicy policy_;
  NetworkState st_;
  bool structure_changed_ = true;
};

inline IterationRecord make_record(std::size_t iteration, const NetworkState& st) {
  IterationRecord r;
  r.iteration = iteration;
  r.positions = st.P.positions;
  if (auto succ = st.S.successors()) r.successor = std::move(*succ);
  r.cost = st.cost;
  return r;
}

/// Runs the optimizer until the relative cost improvement of a sweep falls
/// below epsilon. Record 0 is the initial state.
inline Trajectory rl_algorithm(const DensityGrid& grid, const OptimizerConfig& config,
                               std::optional<NodeDeployment> P0 = std::nullopt,
                               RoutingPolicy policy = RoutingPolicy::multi_hop) {
  RoutingAwareLloyd opt(grid, config, policy);
  opt.initialize(std::move(P0));
  Trajectory t;
  t.records.push_back(make_record(0, opt.state()));
  t.truncated = true;
  for (std::size_t it = 1; it <= config.max_iterations; ++it) {
    const double d_old = opt.state().cost.D;
    const double d_new = opt.step().D;
    t.records.push_back(make_record(it, opt.state()));
    t.iterations = it;
    const bool small = !(d_old > 0.0) || (d_old - d_new) / d_old < config.epsilon;
    if (small && !(config.require_stable_partition && opt.last_step_changed_structure())) {
      t.truncated = false;
      break;
    }
  }
  t.final_state = opt.state();
  return t;
}

/// Same iteration restricted to one-hop routing (sensor straight to FC).
inline Trajectory baseline_cl_onehop(const DensityGrid& grid, const OptimizerConfig& config,
                                     std::optional<NodeDeployment> P0 = std::nullopt) {
  return rl_algorithm(grid, config, std::move(P0), RoutingPolicy::one_hop);
}

/// Lloyd deployment of sensors and FCs, then Bellman-Ford routing. The
/// partition is the plain Voronoi one, so the result does not depend on
/// lambda except through the reported D.
inline Trajectory baseline_lbf(const DensityGrid& grid, const OptimizerConfig& config) {
  config.check();
  const auto P = lloyd_init(grid, config.n_sensors, config.n_fcs, config.seed, config.epsilon,
                            config.lloyd_max_iterations);
  Trajectory t;
  t.final_state = evaluate_voronoi(P, grid, config.params, config.lambda, RoutingPolicy::multi_hop);
  t.records.push_back(make_record(0, t.final_state));
  return t;
}

/// Best of `trials` uniform-random deployments, each scored with a Voronoi
/// partition and Bellman-Ford routing. Record k holds trial k.
inline Trajectory baseline_rbf(const DensityGrid& grid, const OptimizerConfig& config,
                               std::size_t trials = 100) {
  config.check();
  if (trials == 0) throw std::invalid_argument("baseline_rbf: trials must be >= 1");
  std::mt19937_64 rng(config.seed);
  Trajectory t;
  for (std::size_t k = 0; k < trials; ++k) {
    NodeDeployment P(config.n_sensors, config.n_fcs,
                     random_points(grid.region(), config.n_sensors + config.n_fcs, rng));
    auto st = evaluate_voronoi(P, grid, config.params, config.lambda, RoutingPolicy::multi_hop);
    t.records.push_back(make_record(k, st));
    if (k == 0 || st.cost.D < t.final_state.cost.D) t.final_state = std::move(st);
  }
  return t;
}

/// Cost as a function of positions alone, with partition and flows frozen.
inline double frozen_cost(const NodeDeployment& P, const CellAssignment& W, const DensityGrid& grid,
                          const FlowMatrix& F, const PhysicalParams& params, double lambda) {
  return lagrangian_cost(P, W, grid, F, params, lambda).D;
}

/// Analytic gradient of the frozen cost with respect to every node.
inline std::vector<Point> analytic_gradient(const NodeDeployment& P, const CellMoments& moments,
                                            const FlowMatrix& F, double lambda, double beta) {
  const double lb = lambda * beta;
  std::vector<Point> grad(P.size(), Point::Zero());
  for (std::size_t i = 0; i < P.n_sensors; ++i) {
    if (moments.volume[i] > 0.0) grad[i] += 2.0 * (P[i] - *moments.centroid[i]) * moments.volume[i];
    for (std::size_t j = 0; j < P.size(); ++j) {
      const double fij = F(i, j);
      if (fij == 0.0) continue;
      // Link i -> j pulls both endpoints towards each other.
      grad[i] += 2.0 * lb * fij * (P[i] - P[j]);
      grad[j] += 2.0 * lb * fij * (P[j] - P[i]);
    }
  }
  return grad;
}

/// Central differences of `cost(P)` in every coordinate of every node.
template <class CostFn>
std::vector<Point> finite_diff_gradient(const NodeDeployment& P, CostFn&& cost, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h must be > 0");
  std::vector<Point> grad(P.size());
  NodeDeployment probe = P;
  for (std::size_t i = 0; i < P.size(); ++i)
    for (int c = 0; c < 2; ++c) {
      const double x0 = P[i][c];
      probe[i][c] = x0 + h;
      const double up = cost(probe);
      probe[i][c] = x0 - h;
      const double down = cost(probe);
      probe[i][c] = x0;
      grad[i][c] = (up - down) / (2.0 * h);
    }
  return grad;
}

inline double gradient_norm(const std::vector<Point>& grad) {
  double s = 0.0;
  for (const auto& g : grad) s += g.squaredNorm();
  return std::sqrt(s);
}

}  // namespace wasn
