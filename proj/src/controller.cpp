#include "piconsensus/controller.hpp"

#include <cmath>

#include "piconsensus/errors.hpp"

namespace piconsensus {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_size(const Eigen::VectorXd& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw InvalidArgument(std::string(what) + ": expected " + std::to_string(n) +
                          " entries, got " + std::to_string(v.size()));
  }
}

// Antiderivatives vanishing at 0.
double square_cosine_integral(double k) {
  return k * k * std::sin(k) + 2.0 * k * std::cos(k) - 2.0 * std::sin(k);
}

double square_sine_integral(double k) {
  return -k * k * std::cos(k) + 2.0 * k * std::sin(k) + 2.0 * std::cos(k) - 2.0;
}

}  // namespace

double nussbaum(double k) { return k * k * std::cos(k); }

double nussbaum_mean(double k) { return NussbaumFunction::square_cosine().mean(k); }

NussbaumFunction NussbaumFunction::from_name(std::string_view name) {
  if (name == "k2cos") return square_cosine();
  if (name == "k2sin") return square_sine();
  throw InvalidArgument("unknown Nussbaum function '" + std::string(name) +
                        "' (expected k2cos or k2sin)");
}

std::string NussbaumFunction::name() const {
  switch (kind_) {
    case Kind::SquareCosine: return "k2cos";
    case Kind::SquareSine: return "k2sin";
    case Kind::Constant: return "constant";
  }
  return "?";
}

double NussbaumFunction::operator()(double k) const {
  switch (kind_) {
    case Kind::SquareCosine: return k * k * std::cos(k);
    case Kind::SquareSine: return k * k * std::sin(k);
    case Kind::Constant: return constant_;
  }
  return 0.0;
}

double NussbaumFunction::integral(double k) const {
  switch (kind_) {
    case Kind::SquareCosine: return square_cosine_integral(k);
    case Kind::SquareSine: return square_sine_integral(k);
    case Kind::Constant: return constant_ * k;
  }
  return 0.0;
}

double NussbaumFunction::mean(double k) const {
  if (k == 0.0) throw InvalidArgument("Nussbaum mean is undefined at k = 0");
  return integral(k) / k;
}

void ControllerGains::validate(std::size_t agents, int order) const {
  auto positive = [](double g) { return std::isfinite(g) && g > 0.0; };
  if (!positive(rho)) throw InvalidArgument("rho must be positive");
  if (!positive(nu)) throw InvalidArgument("nu must be positive");
  if (order == 2 && !(lambda && positive(*lambda))) {
    throw InvalidArgument("second-order agents require a positive lambda");
  }
  if (gamma.size() != agents) {
    throw InvalidArgument("gamma has " + std::to_string(gamma.size()) + " entries, expected " +
                          std::to_string(agents));
  }
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (!positive(gamma[i])) {
      throw InvalidArgument("gamma_" + std::to_string(i + 1) + " must be positive");
    }
  }
  require_size(xbar, idx(agents), "xbar");
  if (!xbar.allFinite()) throw InvalidArgument("xbar must be finite");
}

ControllerState ControllerState::zero(std::span<const Regressor> regressors) {
  const auto n = idx(regressors.size());
  ControllerState s;
  s.w = Eigen::VectorXd::Zero(n);
  s.zeta = Eigen::VectorXd::Zero(n);
  for (const auto& r : regressors) s.theta_hat.push_back(Eigen::VectorXd::Zero(idx(r.size())));
  return s;
}

Eigen::VectorXd consensus_error(const DirectedGraph& g, const Eigen::VectorXd& x) {
  require_size(x, idx(g.size()), "consensus_error");
  Eigen::VectorXd xi(x.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double sum = 0.0;
    for (const Neighbor& nb : g.in_neighbors(i)) sum += nb.weight * (x(idx(i)) - x(idx(nb.index)));
    xi(idx(i)) = sum;
  }
  return xi;
}

Eigen::VectorXd pi_error(const Eigen::VectorXd& x, const Eigen::VectorXd& w,
                         const ControllerGains& gains) {
  require_size(w, x.size(), "pi_error: w");
  require_size(gains.xbar, x.size(), "pi_error: xbar");
  return x - gains.xbar + gains.rho * w;
}

Eigen::VectorXd filtered_error(const Eigen::VectorXd& z, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& xi, const ControllerGains& gains) {
  if (!gains.lambda) {
    throw InvalidArgument("filtered error is only defined for second-order agents (no lambda)");
  }
  require_size(v, z.size(), "filtered_error: v");
  require_size(xi, z.size(), "filtered_error: xi");
  return v + gains.rho * xi + *gains.lambda * z;
}

DistributedController::DistributedController(DirectedGraph graph, ControllerGains gains,
                                             std::vector<Regressor> regressors,
                                             NussbaumFunction nussbaum)
    : graph_(std::move(graph)),
      gains_(std::move(gains)),
      regressors_(std::move(regressors)),
      nussbaum_(nussbaum) {
  if (regressors_.size() != graph_.size()) {
    throw InvalidArgument("controller needs one regressor per agent");
  }
  require_size(gains_.xbar, idx(graph_.size()), "controller xbar");
  if (gains_.gamma.size() != graph_.size()) {
    throw InvalidArgument("controller needs one gamma per agent");
  }
}

void DistributedController::check_agent(std::size_t i, std::size_t n_signals) const {
  if (i >= size()) throw InvalidArgument("agent index " + std::to_string(i) + " out of range");
  if (n_signals != size()) {
    throw InvalidArgument("signal vector has " + std::to_string(n_signals) + " entries, expected " +
                          std::to_string(size()));
  }
}

double DistributedController::local_disagreement(std::size_t i,
                                                 std::span<const double> signal) const {
  double sum = 0.0;
  for (const Neighbor& nb : graph_.in_neighbors(i)) sum += nb.weight * (signal[i] - signal[nb.index]);
  return sum;
}

double DistributedController::pi_error(std::size_t i, double x_i,
                                       const ControllerState& state) const {
  return x_i - gains_.xbar(idx(i)) + gains_.rho * state.w(idx(i));
}

AgentControl DistributedController::first_order(std::size_t i, std::span<const double> x,
                                                const ControllerState& state) const {
  check_agent(i, x.size());
  const double z = pi_error(i, x[i], state);
  const double xi = local_disagreement(i, x);
  const Eigen::VectorXd phi = regressors_[i].evaluate(x[i]);
  const Eigen::VectorXd& theta_hat = state.theta_hat.at(i);
  const double estimate = phi.size() == 0 ? 0.0 : theta_hat.dot(phi);

  const double q = estimate + gains_.rho * xi;
  AgentControl out;
  out.u = nussbaum_(state.zeta(idx(i))) * (q + gains_.nu * z);
  out.zeta_rate = gains_.nu * z * z + z * q;
  out.theta_hat_rate = gains_.gamma[i] * phi * z;
  return out;
}

AgentControl DistributedController::second_order(std::size_t i, std::span<const double> x,
                                                 std::span<const double> v,
                                                 const ControllerState& state) const {
  check_agent(i, x.size());
  check_agent(i, v.size());
  if (!gains_.lambda) throw InvalidArgument("second-order control requires lambda");
  const double lambda = *gains_.lambda;
  const double rho = gains_.rho;

  const double z = pi_error(i, x[i], state);
  const double xi = local_disagreement(i, x);
  const double vel_disagreement = local_disagreement(i, v);
  const double s = v[i] + rho * xi + lambda * z;
  const Eigen::VectorXd phi = regressors_[i].evaluate(x[i], v[i]);
  const Eigen::VectorXd& theta_hat = state.theta_hat.at(i);
  const double estimate = phi.size() == 0 ? 0.0 : theta_hat.dot(phi);

  const double q = estimate + lambda * v[i] + rho * vel_disagreement + lambda * rho * xi;
  AgentControl out;
  out.u = nussbaum_(state.zeta(idx(i))) * (q + gains_.nu * s);
  out.zeta_rate = gains_.nu * s * s + s * q;
  out.theta_hat_rate = gains_.gamma[i] * phi * s;
  return out;
}

}  // namespace piconsensus
