#include "piconsensus/sim.hpp"

#include <algorithm>
#include <cmath>

namespace piconsensus {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::vector<std::size_t> regressor_sizes(const Scenario& s) {
  std::vector<std::size_t> out;
  for (const auto& a : s.agents) out.push_back(a.phi.size());
  return out;
}

DistributedController make_controller(const Scenario& s) {
  s.validate();
  return DistributedController(s.graph, s.gains, s.regressors(), s.nussbaum);
}

}  // namespace

StateLayout::StateLayout(int order, const std::vector<std::size_t>& regressor_sizes)
    : order_(order), theta_sizes_(regressor_sizes) {
  if (order != 1 && order != 2) throw InvalidArgument("agent order must be 1 or 2");
  std::size_t offset = 0;
  for (std::size_t l : regressor_sizes) {
    offsets_.push_back(offset);
    offset += static_cast<std::size_t>(order) + 1 + l + 1;
  }
  size_ = offset;
}

std::size_t StateLayout::agent_of(std::size_t index) const {
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), index);
  return static_cast<std::size_t>(it - offsets_.begin()) - 1;
}

ClosedLoop::ClosedLoop(const Scenario& scenario)
    : layout_(scenario.order, regressor_sizes(scenario)),
      controller_(make_controller(scenario)),
      agents_(scenario.agents),
      x0_(scenario.x0),
      v0_(scenario.v0) {}

Eigen::VectorXd ClosedLoop::initial_state() const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(idx(layout_.size()));
  for (std::size_t i = 0; i < agents(); ++i) {
    y(idx(layout_.x(i))) = x0_(idx(i));
    if (order() == 2) y(idx(layout_.v(i))) = v0_(idx(i));
  }
  return y;
}

Eigen::VectorXd ClosedLoop::positions(const Eigen::VectorXd& state) const {
  Eigen::VectorXd x(idx(agents()));
  for (std::size_t i = 0; i < agents(); ++i) x(idx(i)) = state(idx(layout_.x(i)));
  return x;
}

Eigen::VectorXd ClosedLoop::velocities(const Eigen::VectorXd& state) const {
  if (order() != 2) return Eigen::VectorXd::Zero(idx(agents()));
  Eigen::VectorXd v(idx(agents()));
  for (std::size_t i = 0; i < agents(); ++i) v(idx(i)) = state(idx(layout_.v(i)));
  return v;
}

ControllerState ClosedLoop::controller_state(const Eigen::VectorXd& state) const {
  ControllerState c;
  const auto n = idx(agents());
  c.w.resize(n);
  c.zeta.resize(n);
  for (std::size_t i = 0; i < agents(); ++i) {
    c.w(idx(i)) = state(idx(layout_.w(i)));
    c.zeta(idx(i)) = state(idx(layout_.zeta(i)));
    c.theta_hat.push_back(
        state.segment(idx(layout_.theta_hat(i)), idx(layout_.theta_hat_size(i))));
  }
  return c;
}

ClosedLoop::Evaluation ClosedLoop::evaluate_controls(const Eigen::VectorXd& state) const {
  const Eigen::VectorXd x = positions(state);
  const Eigen::VectorXd v = velocities(state);
  const ControllerState cs = controller_state(state);
  const std::span<const double> xs(x.data(), x.size());
  const std::span<const double> vs(v.data(), v.size());

  Evaluation ev;
  ev.u.resize(idx(agents()));
  ev.controls.reserve(agents());
  for (std::size_t i = 0; i < agents(); ++i) {
    ev.controls.push_back(order() == 1 ? controller_.first_order(i, xs, cs)
                                       : controller_.second_order(i, xs, vs, cs));
    ev.u(idx(i)) = ev.controls.back().u;
  }
  return ev;
}

Eigen::VectorXd ClosedLoop::assemble(const Eigen::VectorXd& state, const Eigen::VectorXd& u,
                                     const std::vector<AgentControl>& controls) const {
  const Eigen::VectorXd x = positions(state);
  const std::span<const double> xs(x.data(), x.size());
  Eigen::VectorXd rate(idx(layout_.size()));
  for (std::size_t i = 0; i < agents(); ++i) {
    try {
      if (order() == 1) {
        rate(idx(layout_.x(i))) = first_order_rate(x(idx(i)), u(idx(i)), agents_[i]);
      } else {
        const auto [xd, vd] =
            second_order_rate(x(idx(i)), state(idx(layout_.v(i))), u(idx(i)), agents_[i]);
        rate(idx(layout_.x(i))) = xd;
        rate(idx(layout_.v(i))) = vd;
      }
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " (agent " + std::to_string(i + 1) + ")", i);
    }
    rate(idx(layout_.w(i))) = controller_.local_disagreement(i, xs);
    rate.segment(idx(layout_.theta_hat(i)), idx(layout_.theta_hat_size(i))) =
        controls[i].theta_hat_rate;
    rate(idx(layout_.zeta(i))) = controls[i].zeta_rate;
  }
  for (std::size_t k = 0; k < layout_.size(); ++k) {
    if (!std::isfinite(rate(idx(k)))) {
      const std::size_t agent = layout_.agent_of(k);
      throw DivergenceError("closed-loop rate is not finite (agent " + std::to_string(agent + 1) + ")",
                            agent);
    }
  }
  return rate;
}

Eigen::VectorXd ClosedLoop::rate(const Eigen::VectorXd& state) const {
  const Evaluation ev = evaluate_controls(state);
  return assemble(state, ev.u, ev.controls);
}

Eigen::VectorXd ClosedLoop::rate_with_inputs(const Eigen::VectorXd& state,
                                             const Eigen::VectorXd& u) const {
  if (u.size() != idx(agents())) throw InvalidArgument("rate_with_inputs: wrong input dimension");
  const Evaluation ev = evaluate_controls(state);
  return assemble(state, u, ev.controls);
}

Eigen::VectorXd ClosedLoop::error_rate(const Eigen::VectorXd& state, const Eigen::VectorXd& u) const {
  const Eigen::VectorXd r = rate_with_inputs(state, u);
  const double rho = controller_.gains().rho;
  Eigen::VectorXd out(idx(agents()));
  if (order() == 1) {
    // z = x - xbar + rho w
    for (std::size_t i = 0; i < agents(); ++i) {
      out(idx(i)) = r(idx(layout_.x(i))) + rho * r(idx(layout_.w(i)));
    }
    return out;
  }
  // s = v + rho L x + lambda z, so s_dot = v_dot + rho L v + lambda z_dot.
  const double lambda = *controller_.gains().lambda;
  const Eigen::VectorXd v = velocities(state);
  const std::span<const double> vs(v.data(), v.size());
  for (std::size_t i = 0; i < agents(); ++i) {
    const double zdot = r(idx(layout_.x(i))) + rho * r(idx(layout_.w(i)));
    out(idx(i)) = r(idx(layout_.v(i))) + rho * controller_.local_disagreement(i, vs) + lambda * zdot;
  }
  return out;
}

SampleRecord ClosedLoop::derive(const Eigen::VectorXd& state) const {
  const Evaluation ev = evaluate_controls(state);
  const Eigen::VectorXd x = positions(state);
  const ControllerState cs = controller_state(state);
  SampleRecord rec;
  rec.u = ev.u;
  rec.xi = consensus_error(controller_.graph(), x);
  rec.z = pi_error(x, cs.w, controller_.gains());
  if (order() == 2) rec.s = filtered_error(rec.z, velocities(state), rec.xi, controller_.gains());
  rec.zeta_rate.resize(idx(agents()));
  for (std::size_t i = 0; i < agents(); ++i) rec.zeta_rate(idx(i)) = ev.controls[i].zeta_rate;
  return rec;
}

Eigen::VectorXd Trajectory::positions(std::size_t k) const {
  Eigen::VectorXd x(idx(layout.agents()));
  for (std::size_t i = 0; i < layout.agents(); ++i) x(idx(i)) = value(k, layout.x(i));
  return x;
}

Eigen::VectorXd Trajectory::velocities(std::size_t k) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(idx(layout.agents()));
  if (layout.order() != 2) return v;
  for (std::size_t i = 0; i < layout.agents(); ++i) v(idx(i)) = value(k, layout.v(i));
  return v;
}

Eigen::VectorXd Trajectory::w(std::size_t k) const {
  Eigen::VectorXd out(idx(layout.agents()));
  for (std::size_t i = 0; i < layout.agents(); ++i) out(idx(i)) = value(k, layout.w(i));
  return out;
}

Eigen::VectorXd Trajectory::zeta(std::size_t k) const {
  Eigen::VectorXd out(idx(layout.agents()));
  for (std::size_t i = 0; i < layout.agents(); ++i) out(idx(i)) = value(k, layout.zeta(i));
  return out;
}

Eigen::VectorXd Trajectory::theta_hat(std::size_t k, std::size_t agent) const {
  return states.at(k).segment(idx(layout.theta_hat(agent)), idx(layout.theta_hat_size(agent)));
}

std::size_t step_count(const SimSettings& sim) {
  return static_cast<std::size_t>(std::floor(sim.horizon / sim.dt * (1.0 + 1e-12)));
}

Trajectory simulate(const Scenario& scenario) {
  const ClosedLoop loop(scenario);
  const std::size_t steps = step_count(scenario.sim);
  const auto decimation = static_cast<std::size_t>(scenario.sim.decimation);
  const double dt = scenario.sim.dt;

  Trajectory traj;
  traj.layout = loop.layout();
  const std::size_t expected = steps / decimation + 1;
  traj.time.reserve(expected);
  traj.states.reserve(expected);
  traj.records.reserve(expected);

  auto f = [&loop](const Eigen::VectorXd& y) { return loop.rate(y); };
  Eigen::VectorXd y = loop.initial_state();
  traj.time.push_back(0.0);
  traj.states.push_back(y);
  traj.records.push_back(loop.derive(y));

  for (std::size_t step = 1; step <= steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    try {
      y = rk4_step(f, y, dt);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " at t = " + std::to_string(t), e.agent(), t);
    }
    for (Eigen::Index k = 0; k < y.size(); ++k) {
      if (!(std::abs(y(k)) <= kOverflowGuard)) {
        const std::size_t agent = loop.layout().agent_of(static_cast<std::size_t>(k));
        throw DivergenceError("state of agent " + std::to_string(agent + 1) +
                                  " left the overflow guard at t = " + std::to_string(t),
                              agent, t);
      }
    }
    if (step % decimation == 0) {
      traj.time.push_back(t);
      traj.states.push_back(y);
      traj.records.push_back(loop.derive(y));
    }
  }
  return traj;
}

Trajectory rebuild_trajectory(const Scenario& scenario, std::vector<double> time,
                              std::vector<Eigen::VectorXd> states) {
  const ClosedLoop loop(scenario);
  if (time.size() != states.size()) throw InvalidArgument("time and state counts differ");
  Trajectory traj;
  traj.layout = loop.layout();
  traj.time = std::move(time);
  traj.states = std::move(states);
  traj.records.reserve(traj.states.size());
  for (const auto& y : traj.states) {
    if (static_cast<std::size_t>(y.size()) != loop.layout().size()) {
      throw InvalidArgument("recorded state does not match the scenario layout");
    }
    traj.records.push_back(loop.derive(y));
  }
  return traj;
}

}  // namespace piconsensus
