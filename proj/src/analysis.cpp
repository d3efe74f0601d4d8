#include "piconsensus/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace piconsensus {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::size_t mid_sample(const Trajectory& traj) {
  const double half = 0.5 * traj.time.back();
  const auto it = std::upper_bound(traj.time.begin(), traj.time.end(), half);
  return static_cast<std::size_t>(it - traj.time.begin()) - 1;
}

template <typename Magnitude>
BoundednessCheck running_max(const Trajectory& traj, std::size_t mid, Magnitude magnitude) {
  BoundednessCheck c;
  double m = 0.0;
  for (std::size_t k = 0; k < traj.samples(); ++k) {
    m = std::max(m, magnitude(k));
    if (k == mid) c.running_max_mid = m;
  }
  c.running_max_end = m;
  c.bounded = c.running_max_end <= (1.0 + kBoundedGrowth) * c.running_max_mid;
  return c;
}

const Eigen::VectorXd& regulated_error(const Trajectory& traj, std::size_t k) {
  const SampleRecord& r = traj.records[k];
  return traj.layout.order() == 2 ? r.s : r.z;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ConsensusReport consensus_metrics(const Trajectory& traj, const LeftEigenvector& omega,
                                  const Eigen::VectorXd& xbar) {
  if (traj.empty()) throw InvalidArgument("consensus_metrics: empty trajectory");
  ConsensusReport rep;
  rep.order = traj.layout.order();
  rep.predicted_consensus = predict_consensus(omega, xbar);

  const std::size_t last = traj.samples() - 1;
  rep.final_time = traj.time.back();
  rep.final_positions = traj.positions(last);
  rep.final_spread = rep.final_positions.maxCoeff() - rep.final_positions.minCoeff();
  rep.final_velocity_norm = traj.velocities(last).cwiseAbs().maxCoeff();

  const double tail_start = 0.9 * rep.final_time;
  for (std::size_t k = 0; k < traj.samples(); ++k) {
    if (traj.time[k] >= tail_start) {
      rep.z_sup_tail = std::max(rep.z_sup_tail, traj.records[k].z.cwiseAbs().maxCoeff());
    }
  }
  const std::size_t mid = mid_sample(traj);
  rep.z_norm_mid = traj.records[mid].z.cwiseAbs().maxCoeff();

  const std::size_t n = traj.layout.agents();
  rep.bounded["x"] = running_max(traj, mid, [&](std::size_t k) {
    return traj.positions(k).cwiseAbs().maxCoeff();
  });
  rep.bounded["v"] = running_max(traj, mid, [&](std::size_t k) {
    return traj.velocities(k).cwiseAbs().maxCoeff();
  });
  rep.bounded["zeta"] = running_max(traj, mid, [&](std::size_t k) {
    return traj.zeta(k).cwiseAbs().maxCoeff();
  });
  rep.bounded["theta_hat"] = running_max(traj, mid, [&](std::size_t k) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, traj.theta_hat(k, i).norm());
    return m;
  });
  rep.bounded["u"] = running_max(traj, mid, [&](std::size_t k) {
    return traj.records[k].u.cwiseAbs().maxCoeff();
  });
  return rep;
}

Eigen::VectorXd lyapunov_values(const Trajectory& traj, const Scenario& scenario, std::size_t k) {
  const std::size_t n = traj.layout.agents();
  if (scenario.agents.size() != n) throw InvalidArgument("lyapunov: missing truth parameters");
  const Eigen::VectorXd& e = regulated_error(traj, k);
  Eigen::VectorXd out(idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd& theta = scenario.agents[i].theta;
    if (static_cast<std::size_t>(theta.size()) != traj.layout.theta_hat_size(i)) {
      throw InvalidArgument("lyapunov: theta dimension mismatch for agent " + std::to_string(i + 1));
    }
    const double mismatch = (traj.theta_hat(k, i) - theta).squaredNorm();
    out(idx(i)) = 0.5 * e(idx(i)) * e(idx(i)) + mismatch / (2.0 * scenario.gains.gamma[i]);
  }
  return out;
}

std::vector<double> lyapunov_certificate(const Trajectory& traj, const Scenario& scenario) {
  if (traj.empty()) throw InvalidArgument("lyapunov_certificate: empty trajectory");
  const std::size_t n = traj.layout.agents();
  const double nu = scenario.gains.nu;
  const NussbaumFunction& N = scenario.nussbaum;

  const Eigen::VectorXd v0 = lyapunov_values(traj, scenario, 0);
  std::vector<double> residual(n, 0.0);
  std::vector<double> dissipated(n, 0.0), injected(n, 0.0);

  auto dissipation_rate = [&](std::size_t k, std::size_t i) {
    const double e = regulated_error(traj, k)(idx(i));
    return nu * e * e;
  };
  auto injection_rate = [&](std::size_t k, std::size_t i) {
    const double zeta = traj.value(k, traj.layout.zeta(i));
    return (scenario.agents[i].b * N(zeta) + 1.0) * traj.records[k].zeta_rate(idx(i));
  };

  for (std::size_t k = 1; k < traj.samples(); ++k) {
    const double h = traj.time[k] - traj.time[k - 1];
    const Eigen::VectorXd vk = lyapunov_values(traj, scenario, k);
    for (std::size_t i = 0; i < n; ++i) {
      dissipated[i] += 0.5 * h * (dissipation_rate(k - 1, i) + dissipation_rate(k, i));
      injected[i] += 0.5 * h * (injection_rate(k - 1, i) + injection_rate(k, i));
      const double r = std::abs(vk(idx(i)) - v0(idx(i)) + dissipated[i] - injected[i]);
      residual[i] = std::max(residual[i], r);
    }
  }
  return residual;
}

double second_order_velocity_check(const Trajectory& traj) {
  if (traj.layout.order() != 2) {
    throw InvalidArgument("velocity check requires a second-order trajectory");
  }
  if (traj.empty()) throw InvalidArgument("velocity check: empty trajectory");
  return traj.velocities(traj.samples() - 1).cwiseAbs().maxCoeff();
}

double velocity_identity_error(const Trajectory& traj, const Scenario& scenario) {
  if (traj.layout.order() != 2) {
    throw InvalidArgument("velocity identity requires a second-order trajectory");
  }
  const double rho = scenario.gains.rho;
  const double lambda = *scenario.gains.lambda;
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.samples(); ++k) {
    const SampleRecord& r = traj.records[k];
    const Eigen::VectorXd recovered = r.s - rho * r.xi - lambda * r.z;
    worst = std::max(worst, (traj.velocities(k) - recovered).cwiseAbs().maxCoeff());
  }
  return worst;
}

ConsensusReport analyze(const Trajectory& traj, const Scenario& scenario) {
  const LeftEigenvector omega = left_eigenvector(laplacian(scenario.graph));
  ConsensusReport rep = consensus_metrics(traj, omega, scenario.gains.xbar);
  rep.lyapunov_residuals = lyapunov_certificate(traj, scenario);
  return rep;
}

void write_report(std::ostream& out, const ConsensusReport& r) {
  out << "order = " << r.order << "\n";
  out << "predicted_consensus = " << fmt(r.predicted_consensus) << "\n";
  out << "final_time = " << fmt(r.final_time) << "\n";
  for (Eigen::Index i = 0; i < r.final_positions.size(); ++i) {
    out << "final_position_" << i + 1 << " = " << fmt(r.final_positions(i)) << "\n";
  }
  out << "final_spread = " << fmt(r.final_spread) << "\n";
  out << "final_velocity_norm = " << fmt(r.final_velocity_norm) << "\n";
  out << "z_sup_tail = " << fmt(r.z_sup_tail) << "\n";
  out << "z_norm_mid = " << fmt(r.z_norm_mid) << "\n";
  for (const auto& [name, c] : r.bounded) {
    out << "bounded_" << name << " = " << (c.bounded ? "true" : "false") << "\n";
    out << "running_max_mid_" << name << " = " << fmt(c.running_max_mid) << "\n";
    out << "running_max_end_" << name << " = " << fmt(c.running_max_end) << "\n";
  }
  for (std::size_t i = 0; i < r.lyapunov_residuals.size(); ++i) {
    out << "lyapunov_residual_" << i + 1 << " = " << fmt(r.lyapunov_residuals[i]) << "\n";
  }
}

std::string format_report(const ConsensusReport& report) {
  std::ostringstream os;
  write_report(os, report);
  return os.str();
}

}  // namespace piconsensus
