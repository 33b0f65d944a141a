#include "wasn/experiment.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Joint sensor/fusion-center placement and routing experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::size_t jobs = 1;
  bool force = false;
  auto* run = app.add_subcommand("run", "Run every (algorithm, lambda, seed) combination of a config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--jobs,-j", jobs, "Parallel runs")->check(CLI::PositiveNumber);
  run->add_flag("--force", force, "Write into a non-empty output directory");

  std::string summary_path;
  std::string summary_out;
  auto* sweep = app.add_subcommand("sweep-summary", "Aggregate a summary.csv per algorithm and lambda");
  sweep->add_option("summary", summary_path, "summary.csv from a run")->required();
  sweep->add_option("-o,--output", summary_out, "Write the table here instead of stdout");

  std::string state_path;
  std::string prefix;
  auto* exp = app.add_subcommand("export", "Write node, flow and partition CSVs from a final-state JSON");
  exp->add_option("state", state_path, "<run>_final.json")->required();
  exp->add_option("prefix", prefix, "Output path prefix")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = wasn::load_config(config_path);
      const auto rows = wasn::run_experiment(cfg, {jobs, force});
      std::cout << "wrote " << rows.size() << " runs to " << (cfg.output_dir / "summary.csv").string() << '\n';
    } else if (*sweep) {
      const auto table = wasn::sweep_summary(wasn::read_summary_csv(summary_path));
      if (table.empty()) {
        std::cerr << "sweep-summary: " << summary_path << " has no rows\n";
        return 3;
      }
      std::ofstream file;
      if (!summary_out.empty()) file = wasn::open_output(summary_out);
      std::ostream& out = summary_out.empty() ? std::cout : file;
      out << wasn::kTradeoffHeader << '\n';
      for (const auto& t : table) out << wasn::to_csv(t) << '\n';
    } else if (*exp) {
      const auto paths = wasn::export_deployment(std::filesystem::path(state_path), prefix);
      std::cout << paths.nodes.string() << '\n' << paths.flows.string() << '\n' << paths.partition.string() << '\n';
    }
  } catch (const wasn::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
