#include "wasn/experiment.hpp"
#include "wasn/io.hpp"

#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace wasn;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("wasn_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

nlohmann::json small_config_json(const fs::path& out) {
  return {{"grid", {{"nx", 30}, {"ny", 30}}},
          {"n_sensors", 8},
          {"n_fcs", 2},
          {"lambda", {0.1, 0.5}},
          {"seeds", {0, 1}},
          {"algorithms", {"rl", "cl", "lbf", "rbf"}},
          {"rbf_trials", 5},
          {"output_dir", out.string()}};
}

}  // namespace

TEST(Csv, MatrixRoundTripIsBitwise) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  Matrix m(4, 7);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = u(rng) / 3.0;
  m(0, 0) = 1e-300;
  m(1, 1) = 0.1;
  const auto dir = fresh_dir("matrix");
  write_matrix_csv(dir / "m.csv", m);
  const auto back = read_matrix_csv(dir / "m.csv");
  ASSERT_EQ(back.rows(), m.rows());
  ASSERT_EQ(back.cols(), m.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) EXPECT_EQ(back(i), m(i));
}

TEST(Csv, AssignmentRoundTrip) {
  const CellAssignment W(3, 2, {0, 1, 2, 2, 1, 0});
  const auto dir = fresh_dir("assign");
  write_assignment_csv(dir / "w.csv", W);
  EXPECT_EQ(read_assignment_csv(dir / "w.csv"), W);
  EXPECT_EQ(count_lines(dir / "w.csv"), 3u);
}

TEST(Csv, DensityFileFirstRowIsBottom) {
  const auto dir = fresh_dir("density");
  {
    std::ofstream out(dir / "f.csv");
    out << "1,2,3\n4,5,6\n";
  }
  const auto d = read_density_csv(dir / "f.csv");
  EXPECT_EQ(d.nx, 3u);
  EXPECT_EQ(d.ny, 2u);
  EXPECT_EQ(d.values[0], 1.0);
  EXPECT_EQ(d.values[5], 6.0);
}

TEST(Csv, MissingFileNamesPath) {
  const fs::path p = "/nonexistent/dir/nothing.csv";
  try {
    read_matrix_csv(p);
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find(p.string()), std::string::npos);
  }
}

TEST(Export, ExampleFixtureTables) {
  const auto S = fixture::example_routing();
  FinalState s;
  s.algorithm = "rl";
  s.region = Region(0, 1, 0, 1);
  s.P = fixture::example_positions();
  s.S = S;
  s.F = propagate_flows(S, fixture::example_rates());
  s.W = CellAssignment(2, 2, {0, 1, 2, 0});
  const auto dir = fresh_dir("export");
  const auto paths = export_deployment(s, (dir / "ex").string());
  EXPECT_EQ(count_lines(paths.nodes), 1u + 4u);
  EXPECT_EQ(count_lines(paths.flows), 1u + 5u);
  const auto nodes = read_nodes_csv(paths.nodes);
  EXPECT_EQ(nodes.n_sensors, 3u);
  EXPECT_EQ(nodes.n_fcs, 1u);
  EXPECT_EQ(nodes.positions, s.P.positions);
  const auto f = read_flows_csv(paths.flows, 3, 4);
  EXPECT_EQ(f, s.F.f);
  EXPECT_EQ(read_assignment_csv(paths.partition), s.W);
}

TEST(Export, EmptyFlowsGiveHeaderOnly) {
  FinalState s;
  s.region = Region(0, 1, 0, 1);
  s.P = NodeDeployment(2, 1, {{0, 0}, {1, 0}, {0, 1}});
  s.S = NormalizedFlowMatrix::tree(2, 1, {2, 2});
  s.F = FlowMatrix{2, 1, Matrix::Zero(2, 3)};
  s.W = CellAssignment(1, 1, {0});
  const auto dir = fresh_dir("empty");
  const auto paths = export_deployment(s, (dir / "e").string());
  EXPECT_EQ(count_lines(paths.flows), 1u);
}

TEST(Export, FinalStateJsonRoundTrip) {
  const auto grid = build_grid(Region(0, 10, 0, 10), 20, 20, UniformDensity{});
  OptimizerConfig cfg;
  cfg.n_sensors = 6;
  cfg.n_fcs = 2;
  const auto t = rl_algorithm(grid, cfg);
  const auto s = make_final_state("rl", 0, grid.region(), t);
  const auto dir = fresh_dir("state");
  write_final_state(dir / "s.json", s);
  const auto back = read_final_state(dir / "s.json");
  EXPECT_EQ(back.P.positions, s.P.positions);
  EXPECT_EQ(back.S.s, s.S.s);
  EXPECT_EQ(back.F.f, s.F.f);
  EXPECT_EQ(back.W, s.W);
  EXPECT_EQ(back.cost.D, s.cost.D);
  const auto paths = export_deployment(dir / "s.json", (dir / "x").string());
  EXPECT_EQ(read_flows_csv(paths.flows, 6, 8), s.F.f);
}

TEST(Config, Defaults) {
  const auto c = parse_config(nlohmann::json::object());
  EXPECT_EQ(c.n_sensors, 40u);
  EXPECT_EQ(c.n_fcs, 4u);
  EXPECT_EQ(c.nx, 100u);
  EXPECT_EQ(c.lambdas, std::vector<double>{0.25});
  EXPECT_EQ(c.rbf_trials, 100u);
}

TEST(Config, FieldLevelErrors) {
  auto expect_field = [](const nlohmann::json& j, const std::string& field) {
    try {
      parse_config(j);
      ADD_FAILURE() << j.dump();
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
    }
  };
  expect_field({{"n_sensors", 0}}, "n_sensors");
  expect_field({{"lambda", -1.0}}, "lambda");
  expect_field({{"beta", 0.0}}, "beta");
  expect_field({{"epsilon", "x"}}, "epsilon");
  expect_field({{"algorithms", {"rl", "simplex"}}}, "algorithms");
  expect_field({{"grid", {{"nx", 0}, {"ny", 4}}}}, "nx");
  expect_field({{"region", {{"x_min", 1}, {"x_max", 0}, {"y_min", 0}, {"y_max", 1}}}}, "region");
  expect_field({{"bogus", 1}}, "bogus");
  expect_field({{"density", {{"csv", "/no/such/density.csv"}}}}, "density");
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/no/such/config.json"), ConfigError); }

TEST(Experiment, RunsAreDeterministicAndConsistent) {
  const auto dir_a = fresh_dir("run_a");
  const auto dir_b = fresh_dir("run_b");
  auto ca = parse_config(small_config_json(dir_a));
  auto cb = parse_config(small_config_json(dir_b));
  const auto a = run_experiment(ca, {1, false});
  const auto b = run_experiment(cb, {3, false});
  ASSERT_EQ(a.size(), 16u);
  ASSERT_EQ(b.size(), a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].algorithm, b[k].algorithm);
    EXPECT_EQ(a[k].lambda, b[k].lambda);
    EXPECT_EQ(a[k].seed, b[k].seed);
    EXPECT_EQ(a[k].H, b[k].H);
    EXPECT_EQ(a[k].P_bar, b[k].P_bar);
    EXPECT_EQ(a[k].D, b[k].D);
    EXPECT_EQ(a[k].iterations, b[k].iterations);
    EXPECT_NEAR(a[k].D, a[k].H + a[k].lambda * a[k].P_bar, 1e-12 * a[k].D);
  }
  const auto rows = read_summary_csv(dir_a / "summary.csv");
  ASSERT_EQ(rows.size(), a.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(rows[k].D, a[k].D);
  EXPECT_TRUE(fs::exists(dir_a / "rl_lam0.1_seed0_trajectory.csv"));
  EXPECT_TRUE(fs::exists(dir_a / "rl_lam0.1_seed0_final.json"));
  EXPECT_TRUE(fs::exists(dir_a / "lbf_lam0.5_seed1_routes.csv"));
}

TEST(Experiment, RefusesNonEmptyOutputUnlessForced) {
  const auto dir = fresh_dir("collide");
  { std::ofstream(dir / "keep.txt") << "x"; }
  auto j = small_config_json(dir);
  j["algorithms"] = {"lbf"};
  j["seeds"] = {0};
  j["lambda"] = 0.2;
  const auto cfg = parse_config(j);
  EXPECT_THROW(run_experiment(cfg), IoError);
  EXPECT_EQ(run_experiment(cfg, {1, true}).size(), 1u);
}

TEST(SweepSummary, SingleRowIsIdentity) {
  const SummaryRow r{"rl", 0.25, 0, 0.8, 0.9, 0.8 + 0.25 * 0.9, 10, 0.1};
  const auto t = sweep_summary({r});
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].runs, 1u);
  EXPECT_EQ(t[0].H_mean, r.H);
  EXPECT_EQ(t[0].H_min, r.H);
  EXPECT_EQ(t[0].H_max, r.H);
  EXPECT_EQ(t[0].Pbar_mean, r.P_bar);
  EXPECT_EQ(t[0].D_mean, r.D);
}

TEST(SweepSummary, EmptyInput) { EXPECT_TRUE(sweep_summary({}).empty()); }

TEST(SweepSummary, GroupsAndAverages) {
  const std::vector<SummaryRow> rows{{"rl", 0.5, 0, 1.0, 2.0, 2.0, 1, 0},
                                     {"rl", 0.5, 1, 3.0, 4.0, 5.0, 1, 0},
                                     {"cl", 0.5, 0, 5.0, 6.0, 8.0, 1, 0}};
  const auto t = sweep_summary(rows);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].algorithm, "cl");
  EXPECT_EQ(t[1].H_mean, 2.0);
  EXPECT_EQ(t[1].Pbar_min, 2.0);
  EXPECT_EQ(t[1].Pbar_max, 4.0);
  EXPECT_EQ(t[1].runs, 2u);
}

TEST(SweepSummary, LbfIsFlatAcrossLambda) {
  const auto dir = fresh_dir("lbf_flat");
  auto j = small_config_json(dir);
  j["algorithms"] = {"lbf"};
  j["lambda"] = {0.1, 1.0, 3.0};
  const auto t = sweep_summary(run_experiment(parse_config(j)));
  ASSERT_EQ(t.size(), 3u);
  for (const auto& row : t) {
    EXPECT_EQ(row.H_mean, t[0].H_mean);
    EXPECT_EQ(row.Pbar_mean, t[0].Pbar_mean);
  }
}
