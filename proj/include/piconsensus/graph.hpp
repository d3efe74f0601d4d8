#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "piconsensus/errors.hpp"

namespace piconsensus {

/// Directed edge as written in scenario files: node labels are 1-based and
/// `target` receives information from `source` with coupling `weight` (a_ij
/// with i = target, j = source).
struct Edge {
  std::size_t source;
  std::size_t target;
  double weight;
};

/// In-neighbor of a node, 0-based.
struct Neighbor {
  std::size_t index;
  double weight;
};

/// Validated weighted communication topology. Immutable after construction.
///
/// Every accessor except `edges()` uses 0-based node indices.
class DirectedGraph {
 public:
  std::size_t size() const noexcept { return in_neighbors_.size(); }

  /// N_i together with a_ij.
  std::span<const Neighbor> in_neighbors(std::size_t i) const { return in_neighbors_.at(i); }

  /// a_ij, zero when j is not a neighbor of i.
  double weight(std::size_t i, std::size_t j) const;

  /// d_i = sum_j a_ij.
  double in_degree(std::size_t i) const;

  /// Edges in construction order, 1-based labels.
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  Eigen::MatrixXd adjacency() const;

 private:
  friend DirectedGraph build_graph(std::size_t n, std::span<const Edge> edges);

  std::vector<std::vector<Neighbor>> in_neighbors_;
  std::vector<Edge> edges_;
};

/// Validates and builds a graph on nodes 1..n. Throws GraphError whose kind
/// identifies the first violated rule.
DirectedGraph build_graph(std::size_t n, std::span<const Edge> edges);

/// L = D - A. Rows sum to zero, off-diagonals are non-positive.
class Laplacian {
 public:
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }

 private:
  friend Laplacian laplacian(const DirectedGraph& g);
  explicit Laplacian(Eigen::MatrixXd m) : matrix_(std::move(m)) {}

  Eigen::MatrixXd matrix_;
};

Laplacian laplacian(const DirectedGraph& g);

/// Component id per node (0-based ids in order of discovery completion).
/// Iterative Tarjan over the edges j -> i.
std::vector<std::size_t> strongly_connected_components(const DirectedGraph& g);

bool is_strongly_connected(const DirectedGraph& g);

/// Positive left null vector of L normalized to unit sum.
class LeftEigenvector {
 public:
  const Eigen::VectorXd& omega() const noexcept { return omega_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(omega_.size()); }
  double operator[](std::size_t i) const { return omega_(static_cast<Eigen::Index>(i)); }

 private:
  friend LeftEigenvector left_eigenvector(const Laplacian& L);
  explicit LeftEigenvector(Eigen::VectorXd w) : omega_(std::move(w)) {}

  Eigen::VectorXd omega_;
};

/// Solves omega^T L = 0 through the SVD of L^T. The topology is recovered from
/// the sparsity pattern of L; throws GraphError(NotStronglyConnected) when it
/// is not strongly connected.
LeftEigenvector left_eigenvector(const Laplacian& L);

/// e^{M t} by scaling and squaring of the truncated Taylor series.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& M, double t);

/// omega^T xbar, the consensus point predicted for fixed points xbar.
double predict_consensus(const LeftEigenvector& omega, const Eigen::VectorXd& xbar);

}  // namespace piconsensus
