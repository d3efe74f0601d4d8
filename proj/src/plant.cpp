#include "piconsensus/plant.hpp"

#include <array>
#include <cmath>

#include "piconsensus/errors.hpp"

namespace piconsensus {

Regressor::Regressor(std::vector<Expr> components) : components_(std::move(components)) {}

Regressor Regressor::parse(const std::vector<std::string>& sources,
                           const std::vector<std::string>& variables) {
  std::vector<Expr> comps;
  comps.reserve(sources.size());
  for (const auto& s : sources) comps.push_back(Expr::parse(s, variables));
  return Regressor(std::move(comps));
}

Eigen::VectorXd Regressor::evaluate(double x, double v) const {
  const std::array<double, 2> args{x, v};
  Eigen::VectorXd out(static_cast<Eigen::Index>(components_.size()));
  for (std::size_t k = 0; k < components_.size(); ++k) {
    out(static_cast<Eigen::Index>(k)) = components_[k].evaluate(std::span<const double>(args));
  }
  return out;
}

namespace {

double drift(double x, double v, const AgentParams& p) {
  if (p.theta.size() == 0) return 0.0;
  return p.theta.dot(p.phi.evaluate(x, v));
}

}  // namespace

double first_order_rate(double x, double u, const AgentParams& p) {
  const double rate = p.b * u + drift(x, 0.0, p);
  if (!std::isfinite(rate)) throw DivergenceError("first-order agent rate is not finite");
  return rate;
}

std::pair<double, double> second_order_rate(double x, double v, double u, const AgentParams& p) {
  const double accel = p.b * u + drift(x, v, p);
  if (!std::isfinite(accel) || !std::isfinite(v)) {
    throw DivergenceError("second-order agent rate is not finite");
  }
  return {v, accel};
}

}  // namespace piconsensus
