#pragma once

#include "io.hpp"
#include "optimize.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <map>
#include <mutex>
#include <set>
#include <thread>

namespace wasn {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Algorithm { rl, cl, lbf, rbf };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::rl: return "rl";
    case Algorithm::cl: return "cl";
    case Algorithm::lbf: return "lbf";
    case Algorithm::rbf: return "rbf";
  }
  return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "rl") return Algorithm::rl;
  if (s == "cl") return Algorithm::cl;
  if (s == "lbf") return Algorithm::lbf;
  if (s == "rbf") return Algorithm::rbf;
  throw ConfigError("algorithms: unknown algorithm '" + s + "' (expected rl, cl, lbf or rbf)");
}

inline constexpr const char* kOutputDirEnv = "WASN_OUTPUT_DIR";

/// One experiment: every (algorithm, lambda, seed) combination is a run.
/// Defaults reproduce the 40-sensor, 4-FC setup on the uniform 10x10 square.
struct ExperimentConfig {
  Region region{0.0, 10.0, 0.0, 10.0};
  std::size_t nx = 100;
  std::size_t ny = 100;
  DensitySpec density = UniformDensity{};
  std::size_t n_sensors = 40;
  std::size_t n_fcs = 4;
  std::vector<double> lambdas{0.25};
  PhysicalParams params;
  double epsilon = 1e-6;
  std::size_t max_iterations = 500;
  std::vector<std::uint64_t> seeds{0};
  std::vector<Algorithm> algorithms{Algorithm::rl};
  std::size_t rbf_trials = 100;
  std::filesystem::path output_dir = "wasn_output";
  std::size_t snapshot_stride = 0;

  OptimizerConfig optimizer(double lambda, std::uint64_t seed) const {
    OptimizerConfig c;
    c.n_sensors = n_sensors;
    c.n_fcs = n_fcs;
    c.lambda = lambda;
    c.params = params;
    c.epsilon = epsilon;
    c.max_iterations = max_iterations;
    c.seed = seed;
    return c;
  }

  DensityGrid grid() const { return build_grid(region, nx, ny, density); }
};

namespace detail {

template <class T>
T get_field(const nlohmann::json& j, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(name) + ": missing or wrong type");
  }
}

inline double positive(const nlohmann::json& j, const char* name) {
  const auto v = get_field<double>(j, name);
  if (!(v > 0.0)) throw ConfigError(std::string(name) + ": must be > 0");
  return v;
}

inline std::size_t count_at_least_one(const nlohmann::json& j, const char* name) {
  const auto& v = j.at(name);
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw ConfigError(std::string(name) + ": must be an integer >= 1");
  return v.get<std::size_t>();
}

}  // namespace detail

/// Parses and validates a JSON config. Relative density paths resolve
/// against `base_dir`. Throws ConfigError naming the offending field.
inline ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  static const std::set<std::string> known{
      "region", "grid",      "density", "n_sensors", "n_fcs",      "lambda",     "beta",
      "rho",    "kappa",     "epsilon", "max_iterations", "seeds", "algorithms", "rbf_trials",
      "output_dir", "snapshot_stride"};
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError(key + ": unknown field");

  ExperimentConfig c;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) c.output_dir = env;

  if (j.contains("region")) {
    const auto& r = j["region"];
    try {
      c.region = Region(detail::get_field<double>(r, "x_min"), detail::get_field<double>(r, "x_max"),
                        detail::get_field<double>(r, "y_min"), detail::get_field<double>(r, "y_max"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("region: ") + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("region.") + e.what());
    }
  }
  if (j.contains("grid")) {
    c.nx = detail::count_at_least_one(j["grid"], "nx");
    c.ny = detail::count_at_least_one(j["grid"], "ny");
  }
  if (j.contains("density")) {
    const auto& d = j["density"];
    if (d.is_string() && d.get<std::string>() == "uniform") {
      c.density = UniformDensity{};
    } else if (d.is_object() && d.contains("csv")) {
      std::filesystem::path p = d["csv"].get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      DensityCsv table;
      try {
        table = read_density_csv(p);
      } catch (const IoError& e) {
        throw ConfigError(std::string("density.csv: ") + e.what());
      }
      if (table.nx != c.nx || table.ny != c.ny)
        throw ConfigError("density.csv: table is " + std::to_string(table.nx) + "x" + std::to_string(table.ny) +
                          " but grid is " + std::to_string(c.nx) + "x" + std::to_string(c.ny));
      c.density = DensityTable{std::move(table.values), d.value("normalize", true)};
    } else {
      throw ConfigError("density: expected \"uniform\" or {\"csv\": path}");
    }
  }
  if (j.contains("n_sensors")) c.n_sensors = detail::count_at_least_one(j, "n_sensors");
  if (j.contains("n_fcs")) c.n_fcs = detail::count_at_least_one(j, "n_fcs");
  if (j.contains("lambda")) {
    const auto& l = j["lambda"];
    c.lambdas.clear();
    if (l.is_number()) {
      c.lambdas.push_back(l.get<double>());
    } else if (l.is_array() && !l.empty()) {
      for (const auto& v : l) {
        if (!v.is_number()) throw ConfigError("lambda: entries must be numbers");
        c.lambdas.push_back(v.get<double>());
      }
    } else {
      throw ConfigError("lambda: expected a number or a non-empty list");
    }
    for (double v : c.lambdas)
      if (!(v >= 0.0)) throw ConfigError("lambda: values must be >= 0");
  }
  if (j.contains("beta")) c.params.beta = detail::positive(j, "beta");
  if (j.contains("rho")) {
    c.params.rho = detail::get_field<double>(j, "rho");
    if (!(c.params.rho >= 0.0)) throw ConfigError("rho: must be >= 0");
  }
  if (j.contains("kappa")) c.params.kappa = detail::positive(j, "kappa");
  if (j.contains("epsilon")) c.epsilon = detail::positive(j, "epsilon");
  if (j.contains("max_iterations")) c.max_iterations = detail::count_at_least_one(j, "max_iterations");
  if (j.contains("seeds")) {
    const auto& s = j["seeds"];
    if (!s.is_array() || s.empty()) throw ConfigError("seeds: expected a non-empty list");
    c.seeds.clear();
    for (const auto& v : s) {
      if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("seeds: entries must be non-negative integers");
      c.seeds.push_back(v.get<std::uint64_t>());
    }
  }
  if (j.contains("algorithms")) {
    const auto& a = j["algorithms"];
    if (!a.is_array() || a.empty()) throw ConfigError("algorithms: expected a non-empty list");
    c.algorithms.clear();
    for (const auto& v : a) {
      if (!v.is_string()) throw ConfigError("algorithms: entries must be strings");
      c.algorithms.push_back(algorithm_from_string(v.get<std::string>()));
    }
  }
  if (j.contains("rbf_trials")) c.rbf_trials = detail::count_at_least_one(j, "rbf_trials");
  if (j.contains("output_dir")) c.output_dir = detail::get_field<std::string>(j, "output_dir");
  if (j.contains("snapshot_stride")) {
    const auto& v = j["snapshot_stride"];
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("snapshot_stride: must be a non-negative integer");
    c.snapshot_stride = v.get<std::size_t>();
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config: no such file " + path.string());
  auto in = open_input(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(j, path.parent_path());
}

struct SummaryRow {
  std::string algorithm;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double H = 0.0;
  double P_bar = 0.0;
  double D = 0.0;
  std::size_t iterations = 0;
  double wall_time = 0.0;
};

inline constexpr const char* kSummaryHeader = "algorithm,lambda,seed,H,P_bar,D,iterations,wall_time";

inline std::string to_csv(const SummaryRow& r) {
  return r.algorithm + ',' + format_double(r.lambda) + ',' + std::to_string(r.seed) + ',' + format_double(r.H) +
         ',' + format_double(r.P_bar) + ',' + format_double(r.D) + ',' + std::to_string(r.iterations) + ',' +
         format_double(r.wall_time);
}

inline std::vector<SummaryRow> read_summary_csv(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such summary file: " + path.string());
  auto in = open_input(path);
  std::string line;
  std::vector<SummaryRow> rows;
  if (!std::getline(in, line)) return rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto c = split_csv_line(line);
    if (c.size() != 8) throw IoError(path.string() + ": expected 8 columns, got " + std::to_string(c.size()));
    rows.push_back({c[0], parse_double(c[1]), static_cast<std::uint64_t>(std::stoull(c[2])), parse_double(c[3]),
                    parse_double(c[4]), parse_double(c[5]), static_cast<std::size_t>(std::stoull(c[6])),
                    parse_double(c[7])});
  }
  return rows;
}

/// Base name of a run's artifacts, e.g. "rl_lam0.25_seed3".
inline std::string run_stem(Algorithm a, double lambda, std::uint64_t seed) {
  return to_string(a) + "_lam" + format_double(lambda) + "_seed" + std::to_string(seed);
}

inline Trajectory run_algorithm(Algorithm a, const DensityGrid& grid, const ExperimentConfig& cfg, double lambda,
                                std::uint64_t seed) {
  const auto oc = cfg.optimizer(lambda, seed);
  switch (a) {
    case Algorithm::rl: return rl_algorithm(grid, oc);
    case Algorithm::cl: return baseline_cl_onehop(grid, oc);
    case Algorithm::lbf: return baseline_lbf(grid, oc);
    case Algorithm::rbf: return baseline_rbf(grid, oc, cfg.rbf_trials);
  }
  throw std::logic_error("run_algorithm: unhandled algorithm");
}

struct RunOptions {
  std::size_t jobs = 1;
  bool force = false;
};

/// Executes every run of the experiment and writes, per run, a trajectory
/// CSV, a final-state JSON, a routing edge list and optional snapshots,
/// then a summary.csv with one row per run in config order.
inline std::vector<SummaryRow> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
  namespace fs = std::filesystem;
  if (fs::exists(cfg.output_dir) && !fs::is_empty(cfg.output_dir) && !opts.force)
    throw IoError("output directory " + cfg.output_dir.string() + " is not empty (use --force to overwrite)");
  fs::create_directories(cfg.output_dir);
  const auto grid = cfg.grid();

  struct Task {
    Algorithm algorithm;
    double lambda;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (auto a : cfg.algorithms)
    for (double l : cfg.lambdas)
      for (auto s : cfg.seeds) tasks.push_back({a, l, s});

  std::vector<SummaryRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      try {
        const auto& task = tasks[k];
        const auto t0 = std::chrono::steady_clock::now();
        const auto traj = run_algorithm(task.algorithm, grid, cfg, task.lambda, task.seed);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        const auto stem = run_stem(task.algorithm, task.lambda, task.seed);
        const auto state_name = stem + "_final.json";
        write_trajectory_csv(cfg.output_dir / (stem + "_trajectory.csv"), traj);
        write_final_state(cfg.output_dir / state_name,
                          make_final_state(to_string(task.algorithm), task.seed, cfg.region, traj));
        const auto& st = traj.final_state;
        if (auto succ = st.S.successors()) {
          RoutingTree tree{st.S, *succ, route_cost_of(st.S, st.P, cfg.params)};
          write_route_csv(cfg.output_dir / (stem + "_routes.csv"), tree);
        }
        if (cfg.snapshot_stride > 0)
          write_snapshots_json(cfg.output_dir / (stem + "_snapshots.json"), traj, cfg.snapshot_stride, state_name);

        const auto iterations = task.algorithm == Algorithm::rl || task.algorithm == Algorithm::cl
                                    ? traj.iterations
                                    : traj.records.size();
        rows[k] = {to_string(task.algorithm), task.lambda, task.seed, st.cost.H, st.cost.P_bar, st.cost.D,
                   iterations, wall};
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(opts.jobs, tasks.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  auto out = open_output(cfg.output_dir / "summary.csv");
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) out << to_csv(r) << '\n';
  return rows;
}

struct TradeoffRow {
  std::string algorithm;
  double lambda = 0.0;
  std::size_t runs = 0;
  double H_mean = 0.0, H_min = 0.0, H_max = 0.0;
  double Pbar_mean = 0.0, Pbar_min = 0.0, Pbar_max = 0.0;
  double D_mean = 0.0;
};

inline constexpr const char* kTradeoffHeader =
    "algorithm,lambda,H_mean,Pbar_mean,runs,H_min,H_max,Pbar_min,Pbar_max,D_mean";

/// Aggregates summary rows per (algorithm, lambda), sorted by algorithm
/// name and then lambda.
inline std::vector<TradeoffRow> sweep_summary(const std::vector<SummaryRow>& rows) {
  std::map<std::pair<std::string, double>, std::vector<const SummaryRow*>> groups;
  for (const auto& r : rows) groups[{r.algorithm, r.lambda}].push_back(&r);
  std::vector<TradeoffRow> out;
  for (const auto& [key, members] : groups) {
    TradeoffRow t;
    t.algorithm = key.first;
    t.lambda = key.second;
    t.runs = members.size();
    t.H_min = t.Pbar_min = std::numeric_limits<double>::infinity();
    t.H_max = t.Pbar_max = -std::numeric_limits<double>::infinity();
    for (const auto* r : members) {
      t.H_mean += r->H;
      t.Pbar_mean += r->P_bar;
      t.D_mean += r->D;
      t.H_min = std::min(t.H_min, r->H);
      t.H_max = std::max(t.H_max, r->H);
      t.Pbar_min = std::min(t.Pbar_min, r->P_bar);
      t.Pbar_max = std::max(t.Pbar_max, r->P_bar);
    }
    const double n = static_cast<double>(members.size());
    t.H_mean /= n;
    t.Pbar_mean /= n;
    t.D_mean /= n;
    out.push_back(t);
  }
  return out;
}

inline std::string to_csv(const TradeoffRow& t) {
  return t.algorithm + ',' + format_double(t.lambda) + ',' + format_double(t.H_mean) + ',' +
         format_double(t.Pbar_mean) + ',' + std::to_string(t.runs) + ',' + format_double(t.H_min) + ',' +
         format_double(t.H_max) + ',' + format_double(t.Pbar_min) + ',' + format_double(t.Pbar_max) + ',' +
         format_double(t.D_mean);
}

}  // namespace wasn
