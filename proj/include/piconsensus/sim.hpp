#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "piconsensus/controller.hpp"
#include "piconsensus/errors.hpp"
#include "piconsensus/scenario.hpp"

namespace piconsensus {

/// Where each agent's signals live in the flat augmented state. Per agent, in
/// order: x_i, v_i (second order only), w_i, theta_hat_i (l_i entries), zeta_i.
class StateLayout {
 public:
  StateLayout() = default;
  StateLayout(int order, const std::vector<std::size_t>& regressor_sizes);

  int order() const noexcept { return order_; }
  std::size_t agents() const noexcept { return offsets_.size(); }
  std::size_t size() const noexcept { return size_; }

  std::size_t x(std::size_t i) const { return offsets_.at(i); }
  /// Only valid for second-order layouts.
  std::size_t v(std::size_t i) const { return offsets_.at(i) + 1; }
  std::size_t w(std::size_t i) const { return offsets_.at(i) + static_cast<std::size_t>(order_); }
  std::size_t theta_hat(std::size_t i) const { return w(i) + 1; }
  std::size_t theta_hat_size(std::size_t i) const { return theta_sizes_.at(i); }
  std::size_t zeta(std::size_t i) const { return theta_hat(i) + theta_sizes_[i]; }

  /// Agent owning a flat index.
  std::size_t agent_of(std::size_t index) const;

  friend bool operator==(const StateLayout&, const StateLayout&) = default;

 private:
  int order_ = 1;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> theta_sizes_;
  std::size_t size_ = 0;
};

/// Signals derived from one augmented state. `s` is empty for first-order runs.
struct SampleRecord {
  Eigen::VectorXd u;
  Eigen::VectorXd z;
  Eigen::VectorXd xi;
  Eigen::VectorXd s;
  Eigen::VectorXd zeta_rate;
};

/// The closed-loop right-hand side for a validated scenario.
class ClosedLoop {
 public:
  explicit ClosedLoop(const Scenario& scenario);

  const StateLayout& layout() const noexcept { return layout_; }
  const DistributedController& controller() const noexcept { return controller_; }
  std::size_t agents() const noexcept { return layout_.agents(); }
  int order() const noexcept { return layout_.order(); }

  /// x(0), v(0) from the scenario, w = theta_hat = zeta = 0.
  Eigen::VectorXd initial_state() const;

  Eigen::VectorXd positions(const Eigen::VectorXd& state) const;
  Eigen::VectorXd velocities(const Eigen::VectorXd& state) const;
  ControllerState controller_state(const Eigen::VectorXd& state) const;

  /// Full closed-loop rate. Throws DivergenceError naming the agent whose rate
  /// is not finite.
  Eigen::VectorXd rate(const Eigen::VectorXd& state) const;

  /// Plant and controller-state rates under an externally supplied input
  /// vector `u`, with the adaptive laws evaluated as usual.
  Eigen::VectorXd rate_with_inputs(const Eigen::VectorXd& state, const Eigen::VectorXd& u) const;

  /// d/dt of the regulated error under inputs `u`: z_dot for first-order
  /// agents, s_dot for second-order agents.
  Eigen::VectorXd error_rate(const Eigen::VectorXd& state, const Eigen::VectorXd& u) const;

  SampleRecord derive(const Eigen::VectorXd& state) const;

 private:
  struct Evaluation {
    Eigen::VectorXd u;
    std::vector<AgentControl> controls;
  };
  Evaluation evaluate_controls(const Eigen::VectorXd& state) const;
  Eigen::VectorXd assemble(const Eigen::VectorXd& state, const Eigen::VectorXd& u,
                           const std::vector<AgentControl>& controls) const;

  StateLayout layout_;
  DistributedController controller_;
  std::vector<AgentParams> agents_;
  Eigen::VectorXd x0_;
  Eigen::VectorXd v0_;
};

/// One classical Runge-Kutta step of ydot = f(y). Throws DivergenceError when
/// a stage or the result is not finite.
template <typename RateFn>
Eigen::VectorXd rk4_step(const RateFn& f, const Eigen::VectorXd& y, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("rk4_step: dt must be positive");
  auto checked = [](Eigen::VectorXd k) {
    if (!k.allFinite()) throw DivergenceError("non-finite Runge-Kutta stage");
    return k;
  };
  const Eigen::VectorXd k1 = checked(f(y));
  const Eigen::VectorXd k2 = checked(f(Eigen::VectorXd(y + 0.5 * dt * k1)));
  const Eigen::VectorXd k3 = checked(f(Eigen::VectorXd(y + 0.5 * dt * k2)));
  const Eigen::VectorXd k4 = checked(f(Eigen::VectorXd(y + dt * k3)));
  return checked(y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Recorded run on a uniform grid t_k = k * decimation * dt.
struct Trajectory {
  StateLayout layout;
  std::vector<double> time;
  std::vector<Eigen::VectorXd> states;
  std::vector<SampleRecord> records;

  std::size_t samples() const noexcept { return time.size(); }
  bool empty() const noexcept { return time.empty(); }
  double value(std::size_t k, std::size_t index) const {
    return states.at(k)(static_cast<Eigen::Index>(index));
  }
  Eigen::VectorXd positions(std::size_t k) const;
  Eigen::VectorXd velocities(std::size_t k) const;
  Eigen::VectorXd w(std::size_t k) const;
  Eigen::VectorXd zeta(std::size_t k) const;
  Eigen::VectorXd theta_hat(std::size_t k, std::size_t agent) const;
};

inline constexpr double kOverflowGuard = 1e12;

/// Number of integration steps for a horizon, tolerant of the rounding in
/// horizon / dt.
std::size_t step_count(const SimSettings& sim);

/// Integrates the scenario with fixed-step RK4. Validates the scenario first.
/// Throws DivergenceError when a state entry becomes non-finite or exceeds
/// kOverflowGuard in magnitude.
Trajectory simulate(const Scenario& scenario);

/// Rebuilds a trajectory from recorded times and states, recomputing the
/// derived records exactly as simulate() does.
Trajectory rebuild_trajectory(const Scenario& scenario, std::vector<double> time,
                              std::vector<Eigen::VectorXd> states);

}  // namespace piconsensus
