#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "piconsensus/controller.hpp"
#include "piconsensus/graph.hpp"
#include "piconsensus/plant.hpp"

namespace piconsensus {

struct SimSettings {
  double dt = 1e-3;
  double horizon = 100.0;
  int decimation = 10;
};

enum class XbarPolicy { Explicit, Initial };

/// A complete experiment. `gains.xbar` is always resolved: under
/// XbarPolicy::Initial it equals x0.
struct Scenario {
  std::string name;
  int order = 1;
  DirectedGraph graph;
  std::vector<AgentParams> agents;
  ControllerGains gains;
  XbarPolicy xbar_policy = XbarPolicy::Explicit;
  Eigen::VectorXd x0;
  Eigen::VectorXd v0;  // second order only
  SimSettings sim;
  NussbaumFunction nussbaum;

  std::size_t size() const noexcept { return graph.size(); }

  /// Every problem with the scenario, empty when it is valid. Covers
  /// dimensions, nonzero high-frequency gains, strong connectivity,
  /// gain signs and integration settings.
  std::vector<std::string> problems() const;

  /// Throws ScenarioError listing every problem.
  void validate() const;

  /// Regressors as seen by the controller.
  std::vector<Regressor> regressors() const;
};

/// Variables available to regressor expressions of the given agent order.
std::vector<std::string> regressor_variables(int order);

/// Parses and validates a scenario document (JSON). Collects every validation
/// issue into one ScenarioError; a syntax error reports line and column.
Scenario parse_scenario(std::string_view text);

/// Reads `path` and calls parse_scenario. Throws IoError when unreadable.
Scenario load_scenario(const std::filesystem::path& path);

/// Reads only the graph section, without requiring strong connectivity.
DirectedGraph parse_scenario_graph(std::string_view text);
DirectedGraph load_scenario_graph(const std::filesystem::path& path);

/// Serializes back into the document format.
std::string dump_scenario(const Scenario& s);

}  // namespace piconsensus
