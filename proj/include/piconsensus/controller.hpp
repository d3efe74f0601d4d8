#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "piconsensus/graph.hpp"
#include "piconsensus/plant.hpp"

namespace piconsensus {

/// N(k) = k^2 cos k.
double nussbaum(double k);

/// (1/k) * integral_0^k N(tau) dtau for N(k) = k^2 cos k, closed form.
/// Throws InvalidArgument for k == 0.
double nussbaum_mean(double k);

/// Gain function used to search the unknown control direction.
///
/// `SquareCosine` is the default k^2 cos k. `SquareSine` (k^2 sin k) is kept
/// for robustness experiments. `Constant` replaces N by a fixed value and turns
/// the loop into a plain known-direction PI consensus controller; it exists for
/// sanity tests and is not a Nussbaum function.
class NussbaumFunction {
 public:
  enum class Kind { SquareCosine, SquareSine, Constant };

  NussbaumFunction() = default;
  static NussbaumFunction square_cosine() { return NussbaumFunction(Kind::SquareCosine, 0.0); }
  static NussbaumFunction square_sine() { return NussbaumFunction(Kind::SquareSine, 0.0); }
  static NussbaumFunction constant(double value) { return NussbaumFunction(Kind::Constant, value); }

  /// "k2cos" or "k2sin". Throws InvalidArgument otherwise.
  static NussbaumFunction from_name(std::string_view name);
  std::string name() const;

  Kind kind() const noexcept { return kind_; }
  double operator()(double k) const;

  /// integral_0^k N(tau) dtau.
  double integral(double k) const;

  /// integral(k) / k.
  double mean(double k) const;

 private:
  NussbaumFunction(Kind kind, double c) : kind_(kind), constant_(c) {}

  Kind kind_ = Kind::SquareCosine;
  double constant_ = 0.0;
};

/// Design parameters. `lambda` is only present for second-order agents.
struct ControllerGains {
  double rho = 0.1;
  double nu = 0.1;
  std::optional<double> lambda;
  std::vector<double> gamma;
  Eigen::VectorXd xbar;

  /// Throws InvalidArgument when a gain is not positive or a dimension does
  /// not match `agents`.
  void validate(std::size_t agents, int order) const;
};

/// Internal controller signals: w_i, theta_hat_i and zeta_i for every agent.
struct ControllerState {
  Eigen::VectorXd w;
  std::vector<Eigen::VectorXd> theta_hat;
  Eigen::VectorXd zeta;

  /// w = 0, theta_hat = 0, zeta = 0.
  static ControllerState zero(std::span<const Regressor> regressors);
};

/// Output of one agent's local controller.
struct AgentControl {
  double u = 0.0;
  double zeta_rate = 0.0;
  Eigen::VectorXd theta_hat_rate;
};

/// xi = L x, evaluated as sum_j a_ij (x_i - x_j).
Eigen::VectorXd consensus_error(const DirectedGraph& g, const Eigen::VectorXd& x);

/// z = x - xbar + rho w.
Eigen::VectorXd pi_error(const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                         const ControllerGains& gains);

/// s = v + rho xi + lambda z. Throws InvalidArgument when gains carry no lambda.
Eigen::VectorXd filtered_error(const Eigen::VectorXd& z, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& xi, const ControllerGains& gains);

/// The per-agent adaptive laws. Each call reads only agent i's own signals and
/// the positions (and velocities) of its in-neighbors.
class DistributedController {
 public:
  DistributedController(DirectedGraph graph, ControllerGains gains,
                        std::vector<Regressor> regressors,
                        NussbaumFunction nussbaum = NussbaumFunction::square_cosine());

  std::size_t size() const noexcept { return graph_.size(); }
  const DirectedGraph& graph() const noexcept { return graph_; }
  const ControllerGains& gains() const noexcept { return gains_; }
  const NussbaumFunction& nussbaum() const noexcept { return nussbaum_; }
  const Regressor& regressor(std::size_t i) const { return regressors_.at(i); }

  /// xi_i = sum_{j in N_i} a_ij (s_i - s_j) for any per-agent signal s.
  double local_disagreement(std::size_t i, std::span<const double> signal) const;

  /// z_i = x_i - xbar_i + rho w_i.
  double pi_error(std::size_t i, double x_i, const ControllerState& state) const;

  /// u_i = N(zeta_i)[theta_hat^T phi + rho xi_i + nu z_i],
  /// zeta_dot_i = nu z_i^2 + z_i[theta_hat^T phi + rho xi_i],
  /// theta_hat_dot_i = gamma_i phi z_i.
  AgentControl first_order(std::size_t i, std::span<const double> x,
                           const ControllerState& state) const;

  /// With q_i = theta_hat^T phi + lambda v_i + rho (Lv)_i + lambda rho (Lx)_i:
  /// u_i = N(zeta_i)[q_i + nu s_i], zeta_dot_i = nu s_i^2 + s_i q_i,
  /// theta_hat_dot_i = gamma_i phi s_i.
  AgentControl second_order(std::size_t i, std::span<const double> x,
                            std::span<const double> v, const ControllerState& state) const;

 private:
  void check_agent(std::size_t i, std::size_t n_signals) const;

  DirectedGraph graph_;
  ControllerGains gains_;
  std::vector<Regressor> regressors_;
  NussbaumFunction nussbaum_;
};

}  // namespace piconsensus
