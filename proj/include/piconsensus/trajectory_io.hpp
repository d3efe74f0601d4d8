#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "piconsensus/scenario.hpp"
#include "piconsensus/sim.hpp"

namespace piconsensus {

/// CSV header for a layout: t, x_*, [v_*], w_*, z_*, [s_*], zeta_*, u_*,
/// theta_hat_<agent>_<component> grouped by agent. Indices are 1-based.
std::vector<std::string> csv_columns(const StateLayout& layout);

/// Writes the trajectory with 17 significant digits per value.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void save_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Reads a CSV produced by write_trajectory_csv for `scenario`. States are
/// restored exactly; derived records are recomputed and must agree with the
/// stored z and u columns. Throws IoError or InvalidArgument.
Trajectory read_trajectory_csv(std::istream& in, const Scenario& scenario);
Trajectory load_trajectory_csv(const std::filesystem::path& path, const Scenario& scenario);

}  // namespace piconsensus
