#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "piconsensus/graph.hpp"
#include "piconsensus/scenario.hpp"
#include "piconsensus/sim.hpp"

namespace piconsensus {

/// Finite-horizon boundedness verdict for one signal family: the running max
/// of |signal| (over agents and components) at mid-horizon and at the end.
struct BoundednessCheck {
  double running_max_mid = 0.0;
  double running_max_end = 0.0;
  bool bounded = true;
};

struct ConsensusReport {
  int order = 1;
  double predicted_consensus = 0.0;
  Eigen::VectorXd final_positions;
  double final_time = 0.0;
  double final_spread = 0.0;
  double final_velocity_norm = 0.0;  // max_i |v_i(T)|, zero for first order
  double z_sup_tail = 0.0;           // sup ||z||_inf over the last 10% of the run
  double z_norm_mid = 0.0;           // ||z||_inf at the 50% sample
  std::map<std::string, BoundednessCheck> bounded;  // keys: x, v, zeta, theta_hat, u
  std::vector<double> lyapunov_residuals;           // empty until certified
};

/// Relative growth allowed for a running max over the second half of the run.
inline constexpr double kBoundedGrowth = 0.01;

/// Consensus metrics and boundedness flags for a completed trajectory.
/// Throws InvalidArgument on an empty trajectory.
ConsensusReport consensus_metrics(const Trajectory& traj, const LeftEigenvector& omega,
                                  const Eigen::VectorXd& xbar);

/// Per-agent value of the Lyapunov-like function at sample k:
/// 1/2 z_i^2 (or 1/2 s_i^2) + ||theta_hat_i - theta_i||^2 / (2 gamma_i).
Eigen::VectorXd lyapunov_values(const Trajectory& traj, const Scenario& scenario, std::size_t k);

/// Residual of the integrated identity
///   Vbar_i(t) = Vbar_i(0) - nu int e_i^2 + int (b_i N(zeta_i) + 1) zeta_dot_i
/// with e = z (first order) or s (second order), maximized over the recorded
/// grid. Integrals use the trapezoid rule on recorded samples.
std::vector<double> lyapunov_certificate(const Trajectory& traj, const Scenario& scenario);

/// max_i |v_i(T)|. Throws InvalidArgument for first-order trajectories.
double second_order_velocity_check(const Trajectory& traj);

/// max over samples of ||v - (s - rho xi - lambda z)||_inf.
double velocity_identity_error(const Trajectory& traj, const Scenario& scenario);

/// consensus_metrics plus the Lyapunov certificate.
ConsensusReport analyze(const Trajectory& traj, const Scenario& scenario);

/// Flat `key = value` text, doubles with 17 significant digits.
void write_report(std::ostream& out, const ConsensusReport& report);
std::string format_report(const ConsensusReport& report);

}  // namespace piconsensus
