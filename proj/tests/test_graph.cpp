#include <doctest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "piconsensus/graph.hpp"
#include "test_support.hpp"

using namespace piconsensus;
using piconsensus::testing::bidirectional_pair;
using piconsensus::testing::four_cycle;

namespace {

// Stationary distribution of P = I - L / (2 max d_i), by power iteration.
// Independent of the SVD route used by left_eigenvector.
Eigen::VectorXd stationary_oracle(const Eigen::MatrixXd& L) {
  const auto n = L.rows();
  const double dmax = L.diagonal().maxCoeff();
  const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n) - L / (2.0 * dmax);
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < 200000; ++it) {
    const Eigen::RowVectorXd next = pi * P;
    const double delta = (next - pi).cwiseAbs().maxCoeff();
    pi = next;
    if (delta < 1e-16) break;
  }
  return (pi / pi.sum()).transpose();
}

// Reachability by repeated boolean squaring of (I + A).
bool brute_force_strongly_connected(const DirectedGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXi reach = Eigen::MatrixXi::Identity(n, n);
  const Eigen::MatrixXd a = g.adjacency();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (a(i, j) > 0) reach(j, i) = 1;  // j -> i
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (reach(i, k) && reach(k, j)) reach(i, j) = 1;
  return (reach.array() > 0).all();
}

double inf_norm(const Eigen::MatrixXd& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

GraphErrorKind build_error(std::size_t n, std::vector<Edge> edges) {
  try {
    build_graph(n, edges);
  } catch (const GraphError& e) {
    return e.kind();
  }
  FAIL("expected a GraphError");
  return GraphErrorKind::NonFinite;
}

}  // namespace

TEST_CASE("build_graph accepts the reference topologies") {
  const DirectedGraph pair = bidirectional_pair();
  CHECK(pair.size() == 2);
  CHECK(pair.weight(0, 1) == 1.0);

  const DirectedGraph g = four_cycle();
  CHECK(g.size() == 4);
  REQUIRE(g.in_neighbors(1).size() == 1);
  CHECK(g.in_neighbors(1)[0].index == 0);  // N_2 = {1}
  CHECK(g.in_neighbors(1)[0].weight == 3.0);
  CHECK(g.in_neighbors(0)[0].index == 3);  // N_1 = {4}
  CHECK(g.in_degree(3) == 2.0);
}

TEST_CASE("build_graph reports each violation with its own kind") {
  CHECK(build_error(2, {{1, 1, 1.0}}) == GraphErrorKind::SelfLoop);
  CHECK(build_error(2, {{1, 2, 1.0}, {1, 2, 2.0}}) == GraphErrorKind::DuplicateEdge);
  CHECK(build_error(2, {{1, 2, 0.0}}) == GraphErrorKind::NonPositiveWeight);
  CHECK(build_error(2, {{1, 2, -1.0}}) == GraphErrorKind::NonPositiveWeight);
  CHECK(build_error(2, {{1, 3, 1.0}}) == GraphErrorKind::IndexOutOfRange);
  CHECK(build_error(2, {{0, 1, 1.0}}) == GraphErrorKind::IndexOutOfRange);
  CHECK(build_error(1, {}) == GraphErrorKind::TooFewNodes);
  CHECK(build_error(2, {{1, 2, NAN}}) == GraphErrorKind::NonFinite);
}

TEST_CASE("laplacian is D - A") {
  Eigen::Matrix2d pair;
  pair << 1, -1, -1, 1;
  CHECK(laplacian(bidirectional_pair()).matrix() == pair);

  Eigen::Matrix4d cyc;
  cyc << 3, 0, 0, -3,
        -3, 3, 0, 0,
         0, -3, 3, 0,
         0, 0, -2, 2;
  CHECK(laplacian(four_cycle()).matrix() == cyc);

  // node 1 has no in-edges
  const std::vector<Edge> chain{{1, 2, 1.0}, {2, 3, 2.0}};
  const Eigen::MatrixXd L = laplacian(build_graph(3, chain)).matrix();
  CHECK(L.row(0).isZero(0.0));
  CHECK(L(2, 2) == 2.0);
}

TEST_CASE("laplacian rows sum to zero exactly for dyadic weights") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> quarter(1, 40);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 7);
    std::vector<Edge> edges;
    for (std::size_t a = 1; a <= n; ++a)
      for (std::size_t b = 1; b <= n; ++b)
        if (a != b && (rng() & 1u)) edges.push_back({a, b, quarter(rng) / 4.0});
    const Eigen::MatrixXd L = laplacian(build_graph(n, edges)).matrix();
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
      double sum = 0.0;
      for (Eigen::Index j = 0; j < L.cols(); ++j) sum += L(i, j);
      CHECK(sum == 0.0);
      for (Eigen::Index j = 0; j < L.cols(); ++j) {
        if (i != j) CHECK(L(i, j) <= 0.0);
      }
      CHECK(L(i, i) >= 0.0);
    }
  }
}

TEST_CASE("is_strongly_connected") {
  CHECK(is_strongly_connected(four_cycle()));
  CHECK(is_strongly_connected(bidirectional_pair()));
  const std::vector<Edge> chain{{1, 2, 1.0}, {2, 3, 1.0}};
  CHECK_FALSE(is_strongly_connected(build_graph(3, chain)));
  CHECK_FALSE(is_strongly_connected(build_graph(3, {})));
}

TEST_CASE("strong connectivity agrees with transitive closure on random digraphs") {
  std::mt19937_64 rng(11);
  int connected = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 9);
    const double density = 0.1 + 0.05 * (trial % 10);
    const DirectedGraph g = piconsensus::testing::random_digraph(rng, n, density);
    const bool expected = brute_force_strongly_connected(g);
    connected += expected;
    CHECK(is_strongly_connected(g) == expected);
  }
  CHECK(connected > 50);
  CHECK(connected < 450);
}

TEST_CASE("left_eigenvector reference values") {
  const LeftEigenvector w = left_eigenvector(laplacian(four_cycle()));
  CHECK(w[0] == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
  CHECK(w[2] == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
  CHECK(w[3] == doctest::Approx(3.0 / 9.0).epsilon(1e-14));

  const LeftEigenvector p = left_eigenvector(laplacian(bidirectional_pair()));
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));

  // Weight-balanced: two opposite cycles with different weights per node pair.
  const std::vector<Edge> balanced{{1, 2, 2.0}, {2, 3, 2.0}, {3, 1, 2.0},
                                   {2, 1, 0.5}, {3, 2, 0.5}, {1, 3, 0.5}};
  const LeftEigenvector b = left_eigenvector(laplacian(build_graph(3, balanced)));
  for (std::size_t i = 0; i < 3; ++i) CHECK(b[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("left_eigenvector rejects graphs that are not strongly connected") {
  const std::vector<Edge> chain{{1, 2, 1.0}, {2, 3, 1.0}};
  CHECK_THROWS_AS(left_eigenvector(laplacian(build_graph(3, chain))), GraphError);
}

TEST_CASE("left_eigenvector invariants on random strongly connected graphs") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 7);
    const DirectedGraph g = piconsensus::testing::random_strongly_connected(rng, n);
    const Eigen::MatrixXd L = laplacian(g).matrix();
    const LeftEigenvector w = left_eigenvector(laplacian(g));
    CHECK((w.omega().array() > 0.0).all());
    CHECK(std::abs(w.omega().sum() - 1.0) < 1e-14);
    CHECK((w.omega().transpose() * L).cwiseAbs().maxCoeff() <= 1e-9 * inf_norm(L));
    CHECK((w.omega() - stationary_oracle(L)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("matrix_exponential closed forms") {
  const Eigen::MatrixXd L = laplacian(bidirectional_pair()).matrix();
  CHECK(matrix_exponential(L, 0.0).isApprox(Eigen::MatrixXd::Identity(2, 2), 0.0));
  for (double t : {0.1, 1.0, 3.7, 20.0}) {
    const double e = std::exp(-2.0 * t);
    Eigen::Matrix2d expected;
    expected << (1 + e) / 2, (1 - e) / 2, (1 - e) / 2, (1 + e) / 2;
    const Eigen::MatrixXd got = matrix_exponential(-L, t);
    CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("matrix_exponential matches a Pade reference") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<Eigen::Index>(2 + trial % 6);
    Eigen::MatrixXd M(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) M(i, j) = gauss(rng);
    // scale to ||M t||_inf in (0, 10]; larger norms with indefinite spectra
    // overflow the relative comparison long before they stress the algorithm.
    const double t = 10.0 * (trial + 1) / 100.0 / inf_norm(M);
    const Eigen::MatrixXd got = matrix_exponential(M, t);
    const Eigen::MatrixXd ref = (M * t).exp();
    CHECK(inf_norm(got - ref) <= 1e-10 * inf_norm(ref));
  }
  // Laplacians up to ||L t|| = 50
  for (int trial = 0; trial < 50; ++trial) {
    const DirectedGraph g = piconsensus::testing::random_strongly_connected(rng, 2 + trial % 7);
    const Eigen::MatrixXd L = laplacian(g).matrix();
    const double t = 50.0 / inf_norm(L) * (trial + 1) / 50.0;
    const Eigen::MatrixXd got = matrix_exponential(-L, t);
    const Eigen::MatrixXd ref = (-L * t).exp();
    CHECK(inf_norm(got - ref) <= 1e-10 * inf_norm(ref));
  }
}

TEST_CASE("matrix_exponential rejects bad input") {
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(matrix_exponential(M, -1.0), InvalidArgument);
  M(0, 1) = INFINITY;
  CHECK_THROWS_AS(matrix_exponential(M, 1.0), InvalidArgument);
  CHECK_THROWS_AS(matrix_exponential(Eigen::MatrixXd::Zero(2, 3), 1.0), InvalidArgument);
}

TEST_CASE("heat kernel of -rho L is stochastic and preserves omega") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const DirectedGraph g = piconsensus::testing::random_strongly_connected(rng, 2 + trial % 7);
    const Eigen::MatrixXd L = laplacian(g).matrix();
    const Eigen::VectorXd w = left_eigenvector(laplacian(g)).omega();
    for (double rho : {0.1, 1.0}) {
      for (double t : {0.1, 1.0, 10.0}) {
        const Eigen::MatrixXd E = matrix_exponential(-rho * L, t);
        CHECK(E.minCoeff() >= -1e-14);
        CHECK((E.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
        CHECK((w.transpose() * E - w.transpose()).cwiseAbs().maxCoeff() <= 1e-8);
      }
    }
  }
}

TEST_CASE("heat kernel converges to 1 omega^T") {
  for (const DirectedGraph& g : {four_cycle(), bidirectional_pair()}) {
    const Eigen::MatrixXd L = laplacian(g).matrix();
    const Eigen::VectorXd w = left_eigenvector(laplacian(g)).omega();
    const Eigen::VectorXcd eig = L.eigenvalues();
    double lambda2 = INFINITY;
    for (Eigen::Index k = 0; k < eig.size(); ++k) {
      if (std::abs(eig(k)) > 1e-9) lambda2 = std::min(lambda2, eig(k).real());
    }
    for (double rho : {0.1, 1.0}) {
      const double t = 20.0 / (rho * lambda2);
      const Eigen::MatrixXd E = matrix_exponential(-rho * L, t);
      const Eigen::MatrixXd limit = Eigen::VectorXd::Ones(L.rows()) * w.transpose();
      CHECK((E - limit).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }
}

TEST_CASE("predict_consensus") {
  const LeftEigenvector w = left_eigenvector(laplacian(four_cycle()));
  CHECK(predict_consensus(w, Eigen::Vector4d(1, 2, 3, 4)) == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
  CHECK(predict_consensus(w, Eigen::Vector4d(1, 2, 3, -1)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(predict_consensus(w, Eigen::Vector4d::Constant(-7.5)) == doctest::Approx(-7.5).epsilon(1e-14));
  CHECK_THROWS_AS(predict_consensus(w, Eigen::Vector3d(1, 2, 3)), InvalidArgument);
}
