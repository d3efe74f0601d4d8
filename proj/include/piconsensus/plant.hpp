#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "piconsensus/exprlang.hpp"

namespace piconsensus {

/// Known regressor phi_i of one agent: one expression per component, each over
/// the variables (x) for first-order agents or (x, v) for second-order agents.
class Regressor {
 public:
  Regressor() = default;
  explicit Regressor(std::vector<Expr> components);

  /// Parses every component against `variables`.
  static Regressor parse(const std::vector<std::string>& sources,
                         const std::vector<std::string>& variables);

  std::size_t size() const noexcept { return components_.size(); }
  const std::vector<Expr>& components() const noexcept { return components_; }

  /// phi_i(x, v). `v` is ignored by components that do not use it.
  Eigen::VectorXd evaluate(double x, double v = 0.0) const;

 private:
  std::vector<Expr> components_;
};

/// Ground truth of one agent: high-frequency gain b_i, parameters theta_i and
/// regressor phi_i. Only the plant and the analysis see b and theta.
struct AgentParams {
  double b = 1.0;
  Eigen::VectorXd theta;
  Regressor phi;
};

/// xdot_i = b_i u_i + theta_i^T phi_i(x_i). Throws DivergenceError on a
/// non-finite result.
double first_order_rate(double x, double u, const AgentParams& p);

/// (xdot_i, vdot_i) = (v_i, b_i u_i + theta_i^T phi_i(x_i, v_i)).
std::pair<double, double> second_order_rate(double x, double v, double u, const AgentParams& p);

}  // namespace piconsensus
