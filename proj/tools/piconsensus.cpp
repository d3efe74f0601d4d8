// piconsensus: command-line front end.
//
// Exit codes:
//   0  success
//   1  bad command line
//   2  file could not be read or written
//   3  scenario or trajectory failed validation (including a graph that is
//      not strongly connected)
//   4  the simulation diverged
//   5  unexpected internal error

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "piconsensus/analysis.hpp"
#include "piconsensus/graph.hpp"
#include "piconsensus/scenario.hpp"
#include "piconsensus/sim.hpp"
#include "piconsensus/trajectory_io.hpp"

namespace fs = std::filesystem;
using namespace piconsensus;

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIo = 2,
  kValidation = 3,
  kDivergence = 4,
  kInternal = 5,
};

struct SimulateOptions {
  std::string scenario;
  std::string out;
  std::string report;
  std::string batch;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<int> decimation;
  bool seedless = false;
};

fs::path report_path_for(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".report");
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Scenario with_overrides(Scenario s, const SimulateOptions& o) {
  if (o.dt) s.sim.dt = *o.dt;
  if (o.horizon) s.sim.horizon = *o.horizon;
  if (o.decimation) s.sim.decimation = *o.decimation;
  s.validate();
  return s;
}

// Simulates one scenario, writing <csv> and its report. Returns the report text.
std::string run_one(const fs::path& scenario_path, const fs::path& csv, const fs::path& report,
                    const SimulateOptions& o) {
  const Scenario s = with_overrides(load_scenario(scenario_path), o);
  const Trajectory traj = simulate(s);
  save_trajectory_csv(csv, traj);
  const std::string text = format_report(analyze(traj, s));
  write_text(report, text);
  return text;
}

int cmd_simulate(const SimulateOptions& o) {
  if (o.batch.empty()) {
    if (o.scenario.empty()) {
      std::cerr << "simulate: a scenario file or --batch is required\n";
      return kUsage;
    }
    const fs::path csv = o.out;
    const fs::path report = o.report.empty() ? report_path_for(csv) : fs::path(o.report);
    std::cout << run_one(o.scenario, csv, report, o);
    return kOk;
  }

  // Batch: every *.scenario in the directory, runs are independent.
  const fs::path out_dir = o.out;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "'");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(o.batch)) {
    if (entry.is_regular_file() && entry.path().extension() == ".scenario") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::future<void>> jobs;
  for (const auto& f : files) {
    const fs::path csv = out_dir / f.stem().concat(".csv");
    jobs.push_back(std::async(std::launch::async, [f, csv, &o] {
      run_one(f, csv, report_path_for(csv), o);
    }));
  }
  int status = kOk;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    try {
      jobs[k].get();
      std::cout << files[k].filename().string() << ": ok\n";
    } catch (const std::exception& e) {
      std::cerr << files[k].filename().string() << ": " << e.what() << "\n";
      status = kValidation;
    }
  }
  return status;
}

int cmd_analyze(const std::string& csv, const std::string& scenario_path, const std::string& report) {
  const Scenario s = load_scenario(scenario_path);
  const Trajectory traj = load_trajectory_csv(csv, s);
  const std::string text = format_report(analyze(traj, s));
  if (!report.empty()) write_text(report, text);
  std::cout << text;
  return kOk;
}

int cmd_graph_check(const std::string& scenario_path) {
  const DirectedGraph g = load_scenario_graph(scenario_path);
  const bool connected = is_strongly_connected(g);
  std::printf("strongly connected: %s", connected ? "true" : "false");
  if (connected) {
    const LeftEigenvector omega = left_eigenvector(laplacian(g));
    std::printf("; omega =");
    for (std::size_t i = 0; i < omega.size(); ++i) std::printf(" %.4f", omega[i]);
  }
  std::printf("\nlaplacian:\n");
  const Laplacian lap = laplacian(g);
  const Eigen::MatrixXd& L = lap.matrix();
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    for (Eigen::Index j = 0; j < L.cols(); ++j) std::printf("%s%g", j ? " " : "  ", L(i, j) + 0.0);
    std::printf("\n");
  }
  return connected ? kOk : kValidation;
}

int cmd_predict(const std::string& scenario_path) {
  const Scenario s = load_scenario(scenario_path);
  const LeftEigenvector omega = left_eigenvector(laplacian(s.graph));
  std::printf("%.6f\n", predict_consensus(omega, s.gains.xbar));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive PI-consensus simulator for agents with unknown control directions"};
  app.require_subcommand(1);

  SimulateOptions sim_opts;
  auto* simulate_cmd = app.add_subcommand("simulate", "Integrate a scenario and write CSV + report");
  simulate_cmd->add_option("scenario", sim_opts.scenario, "Scenario file");
  simulate_cmd->add_option("--out,-o", sim_opts.out, "Output CSV (directory with --batch)")->required();
  simulate_cmd->add_option("--report", sim_opts.report, "Report path (default: <out>.report)");
  simulate_cmd->add_option("--batch", sim_opts.batch, "Run every *.scenario in a directory")
      ->excludes(simulate_cmd->get_option("scenario"));
  simulate_cmd->add_option("--dt", sim_opts.dt, "Override the integration step");
  simulate_cmd->add_option("--horizon", sim_opts.horizon, "Override the horizon");
  simulate_cmd->add_option("--decimation", sim_opts.decimation, "Override the recording decimation");
  simulate_cmd->add_flag("--seedless", sim_opts.seedless,
                         "Accepted for compatibility; runs are always deterministic");

  std::string csv, analyze_scenario, analyze_report;
  auto* analyze_cmd = app.add_subcommand("analyze", "Recompute the report from a stored trajectory");
  analyze_cmd->add_option("csv", csv, "Trajectory CSV")->required();
  analyze_cmd->add_option("scenario", analyze_scenario, "Scenario file")->required();
  analyze_cmd->add_option("--report", analyze_report, "Also write the report here");

  std::string graph_scenario;
  auto* graph_cmd = app.add_subcommand("graph-check", "Print connectivity, Laplacian and omega");
  graph_cmd->add_option("scenario", graph_scenario, "Scenario file")->required();

  std::string predict_scenario;
  auto* predict_cmd = app.add_subcommand("predict", "Print the predicted consensus point");
  predict_cmd->add_option("scenario", predict_scenario, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(sim_opts);
    if (*analyze_cmd) return cmd_analyze(csv, analyze_scenario, analyze_report);
    if (*graph_cmd) return cmd_graph_check(graph_scenario);
    if (*predict_cmd) return cmd_predict(predict_scenario);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kDivergence;
  } catch (const ScenarioError& e) {
    std::cerr << e.what() << "\n";
    return kValidation;
  } catch (const GraphError& e) {
    std::cerr << "graph: " << e.what() << "\n";
    return kValidation;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
