#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "piconsensus/controller.hpp"
#include "test_support.hpp"

using namespace piconsensus;
using piconsensus::testing::four_cycle;
using piconsensus::testing::load_case;

namespace {

constexpr double kPi = std::numbers::pi;

DistributedController controller_for(const Scenario& s) {
  return DistributedController(s.graph, s.gains, s.regressors(), s.nussbaum);
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("nussbaum values") {
  CHECK(nussbaum(0.0) == 0.0);
  CHECK(nussbaum(kPi) == doctest::Approx(-kPi * kPi).epsilon(1e-15));
  CHECK(std::abs(nussbaum(kPi / 2)) < 1e-15);
  CHECK(nussbaum(2 * kPi) == doctest::Approx(4 * kPi * kPi).epsilon(1e-15));
}

TEST_CASE("nussbaum is even") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-100.0, 100.0);
  for (int k = 0; k < 1000; ++k) {
    const double x = d(rng);
    CHECK(nussbaum(x) == nussbaum(-x));
  }
}

TEST_CASE("nussbaum mean closed form") {
  for (int n = 1; n <= 5; ++n) {
    CHECK(nussbaum_mean(2 * kPi * n) == doctest::Approx(2.0).epsilon(1e-12));
  }
  CHECK(nussbaum_mean(kPi / 2) == doctest::Approx(kPi / 2 - 4 / kPi).epsilon(1e-14));
  CHECK_THROWS_AS(nussbaum_mean(0.0), InvalidArgument);

  // against composite Simpson quadrature
  for (double k : {0.3, 1.7, 5.0, 12.5, -7.25}) {
    const int m = 20000;
    const double h = k / m;
    double acc = nussbaum(0.0) + nussbaum(k);
    for (int j = 1; j < m; ++j) acc += (j % 2 ? 4.0 : 2.0) * nussbaum(j * h);
    const double simpson = acc * h / 3.0;
    CHECK(nussbaum_mean(k) == doctest::Approx(simpson / k).epsilon(1e-9));
  }
}

TEST_CASE("mean swings past +-M along the witness sequences") {
  const double M = 10.0;
  bool above = false, below = false;
  for (int n = 0; n <= 10; ++n) {
    if (nussbaum_mean(kPi / 2 + 2 * kPi * n) > M) above = true;
    if (nussbaum_mean(3 * kPi / 2 + 2 * kPi * n) < -M) below = true;
  }
  CHECK(above);
  CHECK(below);
  // mean(k) = k - 2/k on the first sequence, -(k - 2/k) on the second
  const double k = kPi / 2 + 4 * kPi;
  CHECK(nussbaum_mean(k) == doctest::Approx(k - 2 / k).epsilon(1e-13));
  CHECK(nussbaum_mean(k + kPi) == doctest::Approx(-(k + kPi - 2 / (k + kPi))).epsilon(1e-13));
}

TEST_CASE("nussbaum function variants") {
  const auto cosine = NussbaumFunction::from_name("k2cos");
  const auto sine = NussbaumFunction::from_name("k2sin");
  CHECK(cosine.name() == "k2cos");
  CHECK(sine.name() == "k2sin");
  CHECK_THROWS_AS(NussbaumFunction::from_name("exp"), InvalidArgument);
  CHECK(cosine(1.3) == nussbaum(1.3));
  CHECK(sine(1.3) == 1.3 * 1.3 * std::sin(1.3));
  for (double k : {0.5, 2.0, 9.0}) {
    // derivative of the antiderivative reproduces the function
    const double h = 1e-5;
    CHECK((sine.integral(k + h) - sine.integral(k - h)) / (2 * h) == doctest::Approx(sine(k)).epsilon(1e-7));
    CHECK((cosine.integral(k + h) - cosine.integral(k - h)) / (2 * h) ==
          doctest::Approx(cosine(k)).epsilon(1e-7));
  }
  CHECK(sine.integral(0.0) == 0.0);
  CHECK(cosine.mean(kPi / 2) == nussbaum_mean(kPi / 2));
  const auto c = NussbaumFunction::constant(-1.0);
  CHECK(c(123.0) == -1.0);
  CHECK(c.integral(4.0) == -4.0);
}

TEST_CASE("consensus error on the 4-cycle") {
  const auto g = four_cycle();
  const Eigen::VectorXd x{{1.0, 2.0, 3.0, -1.0}};
  const Eigen::VectorXd xi = consensus_error(g, x);
  CHECK(xi == Eigen::VectorXd{{6.0, 3.0, 3.0, -8.0}});
  CHECK(consensus_error(g, Eigen::VectorXd::Constant(4, 7.5)).isZero(0.0));
}

TEST_CASE("consensus error is orthogonal to omega and equals L x") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> ival(-50, 50);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const auto g = piconsensus::testing::random_strongly_connected(rng, n);
    const Laplacian L = laplacian(g);
    const LeftEigenvector omega = left_eigenvector(L);
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    for (auto& e : x) e = ival(rng);
    const Eigen::VectorXd xi = consensus_error(g, x);
    CHECK(std::abs(omega.omega().dot(xi)) <= 1e-10 * (1.0 + xi.lpNorm<Eigen::Infinity>()));
    CHECK((xi - L.matrix() * x).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + xi.lpNorm<Eigen::Infinity>()));
  }
  // integer weights and data: exact
  const std::vector<Edge> e{{1, 2, 2.0}, {2, 3, 1.0}, {3, 1, 4.0}, {1, 3, 3.0}};
  const auto g = build_graph(3, e);
  const Eigen::VectorXd x{{5.0, -2.0, 7.0}};
  CHECK(consensus_error(g, x) == laplacian(g).matrix() * x);
}

TEST_CASE("pi and filtered errors") {
  ControllerGains gains;
  gains.rho = 0.1;
  gains.xbar = Eigen::VectorXd{{1.0, 2.0, 3.0, 4.0}};
  const Eigen::VectorXd x{{1.0, 2.0, 3.0, -1.0}};
  CHECK(pi_error(x, Eigen::VectorXd::Zero(4), gains) == Eigen::VectorXd{{0.0, 0.0, 0.0, -5.0}});
  const Eigen::VectorXd z = pi_error(x, Eigen::VectorXd::Constant(4, 10.0), gains);
  CHECK(z.isApprox(Eigen::VectorXd{{1.0, 1.0, 1.0, -4.0}}, 1e-15));

  const Eigen::VectorXd xi{{6.0, 3.0, 3.0, -8.0}};
  CHECK_THROWS_AS(filtered_error(z, Eigen::VectorXd::Zero(4), xi, gains), InvalidArgument);
  gains.lambda = 1.5;
  const Eigen::VectorXd s =
      filtered_error(Eigen::VectorXd{{0.0, 0.0, 0.0, -5.0}}, Eigen::VectorXd::Zero(4), xi, gains);
  CHECK(s.isApprox(Eigen::VectorXd{{0.6, 0.3, 0.3, -8.3}}, 1e-15));
}

TEST_CASE("gains validation") {
  ControllerGains g;
  g.gamma = {0.1, 0.1};
  g.xbar = Eigen::VectorXd::Zero(2);
  CHECK_NOTHROW(g.validate(2, 1));
  CHECK_THROWS_AS(g.validate(2, 2), InvalidArgument);  // no lambda
  CHECK_THROWS_AS(g.validate(3, 1), InvalidArgument);
  g.rho = 0.0;
  CHECK_THROWS_AS(g.validate(2, 1), InvalidArgument);
  g.rho = 0.1;
  g.gamma[1] = -1.0;
  CHECK_THROWS_AS(g.validate(2, 1), InvalidArgument);
}

TEST_CASE("first-order laws at the start of case 1") {
  const Scenario s = load_case("case1.scenario");
  const auto c = controller_for(s);
  const ControllerState st = ControllerState::zero(s.regressors());
  const auto x = to_vec(s.x0);
  const AgentControl a4 = c.first_order(3, x, st);
  CHECK(a4.zeta_rate == doctest::Approx(6.5).epsilon(1e-14));
  CHECK(a4.u == 0.0);  // N(0) = 0
  // theta_hat_dot = gamma phi z with phi_4 = x sin x at x = -1
  CHECK(a4.theta_hat_rate.size() == 1);
  CHECK(a4.theta_hat_rate(0) == doctest::Approx(0.1 * (-1.0 * std::sin(-1.0)) * -5.0).epsilon(1e-14));
  for (std::size_t i = 0; i < 3; ++i) {
    const AgentControl a = c.first_order(i, x, st);
    CHECK(a.zeta_rate == 0.0);  // z_i = 0
    CHECK(a.theta_hat_rate.isZero(0.0));
  }
}

TEST_CASE("second-order laws at the start of case 2") {
  const Scenario s = load_case("case2.scenario");
  const auto c = controller_for(s);
  const ControllerState st = ControllerState::zero(s.regressors());
  const auto x = to_vec(s.x0), v = to_vec(s.v0);
  const AgentControl a4 = c.second_order(3, x, v, st);
  CHECK(a4.zeta_rate == doctest::Approx(16.849).epsilon(1e-13));
  CHECK(a4.u == 0.0);
}

TEST_CASE("control is N(zeta) times the bracket") {
  const Scenario s = load_case("case1.scenario");
  const auto c = controller_for(s);
  ControllerState st = ControllerState::zero(s.regressors());
  st.zeta(3) = 2.0;
  st.w(3) = 3.0;
  st.theta_hat[3](0) = 0.7;
  const auto x = to_vec(s.x0);
  const double z = -1.0 - 4.0 + 0.1 * 3.0;
  const double phi = -1.0 * std::sin(-1.0);
  const double bracket = 0.7 * phi + 0.1 * -8.0 + 0.1 * z;
  CHECK(c.first_order(3, x, st).u == doctest::Approx(nussbaum(2.0) * bracket).epsilon(1e-14));
}

TEST_CASE("zero regulated error freezes the adaptation") {
  const Scenario s = load_case("case2.scenario");
  const auto c = controller_for(s);
  ControllerState st = ControllerState::zero(s.regressors());
  // consensus with w chosen so that z = 0; then xi = 0, v = 0 and s = 0
  const std::vector<double> xc(4, 2.5), v(4, 0.0);
  for (Eigen::Index i = 0; i < 4; ++i) st.w(i) = (s.gains.xbar(i) - 2.5) / 0.1;
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(c.pi_error(i, 2.5, st)) < 1e-14);
    const AgentControl a = c.second_order(i, xc, v, st);
    CHECK(std::abs(a.zeta_rate) < 1e-28);
    CHECK(a.theta_hat_rate.lpNorm<Eigen::Infinity>() < 1e-14);
  }
}

TEST_CASE("controllers only read in-neighbor signals") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-3.0, 3.0);
  Scenario s = load_case("case2.scenario");
  const auto c = controller_for(s);
  ControllerState st = ControllerState::zero(s.regressors());
  for (auto& e : st.w) e = d(rng);
  for (auto& e : st.zeta) e = d(rng);
  for (auto& th : st.theta_hat) for (auto& e : th) e = d(rng);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(4), v(4);
    for (auto& e : x) e = d(rng);
    for (auto& e : v) e = d(rng);
    for (std::size_t i = 0; i < 4; ++i) {
      const AgentControl ref2 = c.second_order(i, x, v, st);
      const AgentControl ref1 = c.first_order(i, x, st);
      std::vector<double> xp = x, vp = v;
      std::vector<bool> visible(4, false);
      visible[i] = true;
      for (const auto& nb : s.graph.in_neighbors(i)) visible[nb.index] = true;
      for (std::size_t j = 0; j < 4; ++j) {
        if (!visible[j]) {
          xp[j] += 100.0 * d(rng);
          vp[j] -= 50.0 * d(rng);
        }
      }
      const AgentControl p2 = c.second_order(i, xp, vp, st);
      const AgentControl p1 = c.first_order(i, xp, st);
      CHECK(p2.u == ref2.u);
      CHECK(p2.zeta_rate == ref2.zeta_rate);
      CHECK(p2.theta_hat_rate == ref2.theta_hat_rate);
      CHECK(p1.u == ref1.u);
      CHECK(p1.zeta_rate == ref1.zeta_rate);
    }
  }
}

TEST_CASE("laws are continuous through z = 0") {
  const Scenario s = load_case("case1.scenario");
  const auto c = controller_for(s);
  ControllerState st = ControllerState::zero(s.regressors());
  st.zeta(1) = 1.2;
  st.theta_hat[1](0) = 0.4;
  std::vector<double> x = to_vec(s.x0);
  double prev_u = 0.0, prev_rate = 0.0;
  bool first = true;
  for (int k = -100; k <= 100; ++k) {
    x[1] = 2.0 + k * 1e-6;  // xbar_2 = 2: z_2 crosses zero
    const AgentControl a = c.first_order(1, x, st);
    if (!first) {
      CHECK(std::abs(a.u - prev_u) < 1e-5);
      CHECK(std::abs(a.zeta_rate - prev_rate) < 1e-5);
    }
    prev_u = a.u;
    prev_rate = a.zeta_rate;
    first = false;
  }
}

TEST_CASE("controller rejects bad agent index and signal size") {
  const Scenario s = load_case("case1.scenario");
  const auto c = controller_for(s);
  const ControllerState st = ControllerState::zero(s.regressors());
  const std::vector<double> x(4, 0.0), short_x(3, 0.0);
  CHECK_THROWS_AS(c.first_order(4, x, st), InvalidArgument);
  CHECK_THROWS_AS(c.first_order(0, short_x, st), InvalidArgument);
}
