#pragma once

#include "cost.hpp"
#include "optimize.hpp"

#include "json.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace wasn {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw IoError("not a number: '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

namespace detail {

inline bool all_numeric(const std::vector<std::string>& cells) {
  for (const auto& c : cells) {
    try {
      parse_double(c);
    } catch (const IoError&) {
      return false;
    }
  }
  return true;
}

// Rows of numbers; a non-numeric first line is taken as a header.
inline std::vector<std::vector<double>> read_numeric_rows(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (first && !all_numeric(cells)) {
      first = false;
      continue;
    }
    first = false;
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c));
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(path.string() + ": ragged row " + std::to_string(rows.size() + 1));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

/// Dense matrix as CSV with a header row c0,c1,... naming column indices.
inline void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << 'c' << j;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

inline void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_output(path);
  write_matrix_csv(out, m);
}

inline Matrix read_matrix_csv(const std::filesystem::path& path) {
  const auto rows = detail::read_numeric_rows(path);
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

/// Density samples: ny rows of nx values, first row at y_min.
struct DensityCsv {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<double> values;
};

inline DensityCsv read_density_csv(const std::filesystem::path& path) {
  const auto rows = detail::read_numeric_rows(path);
  if (rows.empty()) throw IoError(path.string() + ": empty density table");
  DensityCsv d{rows.front().size(), rows.size(), {}};
  for (const auto& r : rows) d.values.insert(d.values.end(), r.begin(), r.end());
  return d;
}

/// Owner matrix, ny rows of nx sensor indices, first row at y_min.
inline void write_assignment_csv(std::ostream& out, const CellAssignment& W) {
  for (std::size_t ix = 0; ix < W.nx; ++ix) out << (ix ? "," : "") << "x" << ix;
  out << '\n';
  for (std::size_t iy = 0; iy < W.ny; ++iy) {
    for (std::size_t ix = 0; ix < W.nx; ++ix) out << (ix ? "," : "") << W(ix, iy);
    out << '\n';
  }
}

inline void write_assignment_csv(const std::filesystem::path& path, const CellAssignment& W) {
  auto out = open_output(path);
  write_assignment_csv(out, W);
}

inline CellAssignment read_assignment_csv(const std::filesystem::path& path) {
  const auto rows = detail::read_numeric_rows(path);
  if (rows.empty()) return {};
  std::vector<std::uint32_t> owner;
  for (const auto& r : rows)
    for (double v : r) {
      if (!(v >= 0.0) || v != static_cast<double>(static_cast<std::uint32_t>(v)))
        throw IoError(path.string() + ": owner entries must be non-negative integers");
      owner.push_back(static_cast<std::uint32_t>(v));
    }
  return {rows.front().size(), rows.size(), std::move(owner)};
}

/// Routing tree as an edge list: sensor_index,successor_index,path_cost.
inline void write_route_csv(const std::filesystem::path& path, const RoutingTree& tree) {
  auto out = open_output(path);
  out << "sensor_index,successor_index,path_cost\n";
  for (std::size_t i = 0; i < tree.successor.size(); ++i)
    out << i << ',' << tree.successor[i] << ',' << format_double(tree.path_cost[i]) << '\n';
}

inline nlohmann::json to_json(const CostBreakdown& c) {
  return {{"H", c.H}, {"P_bar", c.P_bar}, {"D", c.D}, {"lambda", c.lambda}};
}

inline CostBreakdown cost_from_json(const nlohmann::json& j) {
  return {j.at("H").get<double>(), j.at("P_bar").get<double>(), j.at("D").get<double>(),
          j.at("lambda").get<double>()};
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j, std::size_t rows, std::size_t cols) {
  if (j.size() != rows) throw IoError("matrix has " + std::to_string(j.size()) + " rows, expected " + std::to_string(rows));
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (j[i].size() != cols) throw IoError("matrix row " + std::to_string(i) + " has wrong length");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = j[i][c].get<double>();
  }
  return m;
}

inline nlohmann::json positions_to_json(const std::vector<Point>& pts) {
  auto arr = nlohmann::json::array();
  for (const auto& p : pts) arr.push_back({p.x(), p.y()});
  return arr;
}

/// Terminal state of one run, self-contained enough to re-derive every
/// exported table.
struct FinalState {
  std::string algorithm;
  std::uint64_t seed = 0;
  Region region;
  NodeDeployment P;
  NormalizedFlowMatrix S;
  FlowMatrix F;
  CellAssignment W;
  CostBreakdown cost;
  std::size_t iterations = 0;
  bool truncated = false;
};

inline FinalState make_final_state(std::string algorithm, std::uint64_t seed, const Region& region,
                                   const Trajectory& t) {
  const auto& st = t.final_state;
  return {std::move(algorithm), seed, region, st.P, st.S, st.F, st.W, st.cost, t.iterations, t.truncated};
}

inline nlohmann::json to_json(const FinalState& s) {
  nlohmann::json j;
  j["algorithm"] = s.algorithm;
  j["seed"] = s.seed;
  j["region"] = {{"x_min", s.region.x_min}, {"x_max", s.region.x_max},
                 {"y_min", s.region.y_min}, {"y_max", s.region.y_max}};
  j["n_sensors"] = s.P.n_sensors;
  j["n_fcs"] = s.P.n_fcs;
  j["positions"] = positions_to_json(s.P.positions);
  j["routing"] = matrix_to_json(s.S.s);
  j["flows"] = matrix_to_json(s.F.f);
  j["grid"] = {{"nx", s.W.nx}, {"ny", s.W.ny}};
  j["assignment"] = s.W.owner;
  j["cost"] = to_json(s.cost);
  j["iterations"] = s.iterations;
  j["truncated"] = s.truncated;
  return j;
}

inline FinalState final_state_from_json(const nlohmann::json& j) {
  FinalState s;
  s.algorithm = j.at("algorithm").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  const auto& r = j.at("region");
  s.region = Region(r.at("x_min").get<double>(), r.at("x_max").get<double>(), r.at("y_min").get<double>(),
                    r.at("y_max").get<double>());
  const auto n = j.at("n_sensors").get<std::size_t>();
  const auto m = j.at("n_fcs").get<std::size_t>();
  std::vector<Point> pts;
  for (const auto& p : j.at("positions")) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  s.P = NodeDeployment(n, m, std::move(pts));
  s.S = NormalizedFlowMatrix(n, m, matrix_from_json(j.at("routing"), n, n + m));
  s.F = FlowMatrix{n, m, matrix_from_json(j.at("flows"), n, n + m)};
  s.W = CellAssignment(j.at("grid").at("nx").get<std::size_t>(), j.at("grid").at("ny").get<std::size_t>(),
                       j.at("assignment").get<std::vector<std::uint32_t>>());
  s.cost = cost_from_json(j.at("cost"));
  s.iterations = j.at("iterations").get<std::size_t>();
  s.truncated = j.at("truncated").get<bool>();
  return s;
}

inline FinalState read_final_state(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such state file: " + path.string());
  auto in = open_input(path);
  try {
    return final_state_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline void write_final_state(const std::filesystem::path& path, const FinalState& s) {
  auto out = open_output(path);
  out << to_json(s).dump(1) << '\n';
}

/// Per-iteration cost trace: iteration,H,P_bar,D.
inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& t) {
  auto out = open_output(path);
  out << "iteration,H,P_bar,D\n";
  for (const auto& r : t.records)
    out << r.iteration << ',' << format_double(r.cost.H) << ',' << format_double(r.cost.P_bar) << ','
        << format_double(r.cost.D) << '\n';
}

/// Positions and routing edges of every `stride`-th record, plus the last.
inline void write_snapshots_json(const std::filesystem::path& path, const Trajectory& t, std::size_t stride,
                                 const std::string& final_state_ref) {
  auto arr = nlohmann::json::array();
  for (std::size_t k = 0; k < t.records.size(); ++k) {
    if (k % stride != 0 && k + 1 != t.records.size()) continue;
    const auto& r = t.records[k];
    auto edges = nlohmann::json::array();
    for (std::size_t i = 0; i < r.successor.size(); ++i) edges.push_back({i, r.successor[i]});
    arr.push_back({{"iteration", r.iteration},
                   {"positions", positions_to_json(r.positions)},
                   {"routes", edges},
                   {"cost", to_json(r.cost)}});
  }
  auto out = open_output(path);
  out << nlohmann::json{{"assignment_ref", final_state_ref}, {"snapshots", arr}}.dump(1) << '\n';
}

/// Node table (index,kind,x,y), positive flows (i,j,F_ij) and the owner
/// grid of a final state, written to <prefix>_nodes.csv, _flows.csv and
/// _partition.csv.
struct ExportPaths {
  std::filesystem::path nodes, flows, partition;
};

inline ExportPaths export_paths(const std::string& prefix) {
  return {prefix + "_nodes.csv", prefix + "_flows.csv", prefix + "_partition.csv"};
}

inline ExportPaths export_deployment(const FinalState& s, const std::string& prefix) {
  const auto paths = export_paths(prefix);
  {
    auto out = open_output(paths.nodes);
    out << "index,kind,x,y\n";
    for (std::size_t i = 0; i < s.P.size(); ++i)
      out << i << ',' << (s.P.is_sensor(i) ? "sensor" : "fc") << ',' << format_double(s.P[i].x()) << ','
          << format_double(s.P[i].y()) << '\n';
  }
  {
    auto out = open_output(paths.flows);
    out << "i,j,F_ij\n";
    for (std::size_t i = 0; i < s.P.n_sensors; ++i)
      for (std::size_t j = 0; j < s.P.size(); ++j)
        if (s.F(i, j) > 0.0) out << i << ',' << j << ',' << format_double(s.F(i, j)) << '\n';
  }
  write_assignment_csv(paths.partition, s.W);
  return paths;
}

inline ExportPaths export_deployment(const std::filesystem::path& state_json, const std::string& prefix) {
  return export_deployment(read_final_state(state_json), prefix);
}

inline NodeDeployment read_nodes_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  std::getline(in, line);
  std::size_t n = 0, m = 0;
  std::vector<Point> pts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 4) throw IoError(path.string() + ": expected index,kind,x,y");
    (c[1] == "sensor" ? n : m) += 1;
    pts.emplace_back(parse_double(c[2]), parse_double(c[3]));
  }
  return {n, m, std::move(pts)};
}

inline Matrix read_flows_csv(const std::filesystem::path& path, std::size_t n_sensors, std::size_t n_nodes) {
  auto in = open_input(path);
  std::string line;
  std::getline(in, line);
  Matrix f = Matrix::Zero(static_cast<Eigen::Index>(n_sensors), static_cast<Eigen::Index>(n_nodes));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv_line(line);
    if (c.size() != 3) throw IoError(path.string() + ": expected i,j,F_ij");
    const auto i = static_cast<Eigen::Index>(parse_double(c[0]));
    const auto j = static_cast<Eigen::Index>(parse_double(c[1]));
    if (i < 0 || j < 0 || i >= f.rows() || j >= f.cols()) throw IoError(path.string() + ": index out of range");
    f(i, j) = parse_double(c[2]);
  }
  return f;
}

}  // namespace wasn
