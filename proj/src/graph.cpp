#include "piconsensus/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace piconsensus {

namespace {

using AdjacencyList = std::vector<std::vector<std::size_t>>;

// Iterative Tarjan. Returns the component id of each node.
std::vector<std::size_t> tarjan(const AdjacencyList& out) {
  constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
  const std::size_t n = out.size();
  std::vector<std::size_t> index(n, unvisited), low(n, 0), comp(n, unvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t next_index = 0;
  std::size_t next_comp = 0;

  struct Frame {
    std::size_t node;
    std::size_t edge;
  };
  std::vector<Frame> call;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;

    while (!call.empty()) {
      Frame& f = call.back();
      const std::size_t v = f.node;
      if (f.edge < out[v].size()) {
        const std::size_t w = out[v][f.edge++];
        if (index[w] == unvisited) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = next_comp;
        } while (w != v);
        ++next_comp;
      }
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().node;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  return comp;
}

bool single_component(const std::vector<std::size_t>& comp) {
  return std::all_of(comp.begin(), comp.end(), [&](std::size_t c) { return c == comp.front(); });
}

double inf_norm(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

double DirectedGraph::weight(std::size_t i, std::size_t j) const {
  for (const Neighbor& nb : in_neighbors(i)) {
    if (nb.index == j) return nb.weight;
  }
  return 0.0;
}

double DirectedGraph::in_degree(std::size_t i) const {
  double d = 0.0;
  for (const Neighbor& nb : in_neighbors(i)) d += nb.weight;
  return d;
}

Eigen::MatrixXd DirectedGraph::adjacency() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < size(); ++i) {
    for (const Neighbor& nb : in_neighbors_[i]) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(nb.index)) = nb.weight;
    }
  }
  return a;
}

DirectedGraph build_graph(std::size_t n, std::span<const Edge> edges) {
  if (n < 2) {
    throw GraphError(GraphErrorKind::TooFewNodes,
                     "graph needs at least 2 nodes, got " + std::to_string(n));
  }
  DirectedGraph g;
  g.in_neighbors_.resize(n);
  for (const Edge& e : edges) {
    const std::string label =
        "edge (" + std::to_string(e.source) + "," + std::to_string(e.target) + ")";
    if (e.source < 1 || e.source > n || e.target < 1 || e.target > n) {
      throw GraphError(GraphErrorKind::IndexOutOfRange,
                       label + ": node index outside 1.." + std::to_string(n));
    }
    if (e.source == e.target) {
      throw GraphError(GraphErrorKind::SelfLoop, label + ": self-loop");
    }
    if (!std::isfinite(e.weight)) {
      throw GraphError(GraphErrorKind::NonFinite, label + ": weight is not finite");
    }
    if (!(e.weight > 0.0)) {
      throw GraphError(GraphErrorKind::NonPositiveWeight, label + ": weight must be positive");
    }
    auto& nbs = g.in_neighbors_[e.target - 1];
    const std::size_t j = e.source - 1;
    if (std::any_of(nbs.begin(), nbs.end(), [j](const Neighbor& nb) { return nb.index == j; })) {
      throw GraphError(GraphErrorKind::DuplicateEdge, label + ": duplicate edge");
    }
    nbs.push_back({j, e.weight});
    g.edges_.push_back(e);
  }
  for (auto& nbs : g.in_neighbors_) {
    std::sort(nbs.begin(), nbs.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
  }
  return g;
}

Laplacian laplacian(const DirectedGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (const Neighbor& nb : g.in_neighbors(i)) {
      L(r, static_cast<Eigen::Index>(nb.index)) = -nb.weight;
    }
    L(r, r) = g.in_degree(i);
  }
  return Laplacian(std::move(L));
}

std::vector<std::size_t> strongly_connected_components(const DirectedGraph& g) {
  AdjacencyList out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (const Neighbor& nb : g.in_neighbors(i)) out[nb.index].push_back(i);
  }
  return tarjan(out);
}

bool is_strongly_connected(const DirectedGraph& g) {
  return single_component(strongly_connected_components(g));
}

LeftEigenvector left_eigenvector(const Laplacian& L) {
  const Eigen::MatrixXd& m = L.matrix();
  const auto n = m.rows();

  AdjacencyList out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && m(i, j) != 0.0) out[static_cast<std::size_t>(j)].push_back(static_cast<std::size_t>(i));
    }
  }
  if (!single_component(tarjan(out))) {
    throw GraphError(GraphErrorKind::NotStronglyConnected,
                     "left eigenvector requires a strongly connected graph");
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.transpose(), Eigen::ComputeFullV);
  Eigen::VectorXd w = svd.matrixV().col(n - 1);
  w /= w.sum();

  const double scale = std::max(1.0, inf_norm(m));
  const auto& sv = svd.singularValues();
  if (n > 1 && sv(n - 2) <= 1e-12 * scale) {
    throw GraphError(GraphErrorKind::NotStronglyConnected, "zero eigenvalue of L is not simple");
  }
  if ((w.array() <= 0.0).any() || !w.allFinite()) {
    throw GraphError(GraphErrorKind::NotStronglyConnected,
                     "left null vector of L is not positive");
  }
  return LeftEigenvector(std::move(w));
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& M, double t) {
  if (M.rows() != M.cols()) throw InvalidArgument("matrix_exponential: matrix must be square");
  if (!M.allFinite() || !std::isfinite(t)) {
    throw InvalidArgument("matrix_exponential: non-finite input");
  }
  if (t < 0.0) throw InvalidArgument("matrix_exponential: t must be non-negative");

  const auto n = M.rows();
  Eigen::MatrixXd a = M * t;
  const double norm = inf_norm(a);
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  a /= std::ldexp(1.0, squarings);

  // Taylor series; ||a|| <= 1/2 so terms shrink at least geometrically.
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int k = 1; k <= 40; ++k) {
    term = (term * a) / static_cast<double>(k);
    result += term;
    if (inf_norm(term) <= 0.5 * eps * inf_norm(result)) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

double predict_consensus(const LeftEigenvector& omega, const Eigen::VectorXd& xbar) {
  if (static_cast<std::size_t>(xbar.size()) != omega.size()) {
    throw InvalidArgument("predict_consensus: omega has " + std::to_string(omega.size()) +
                          " entries but xbar has " + std::to_string(xbar.size()));
  }
  return omega.omega().dot(xbar);
}

}  // namespace piconsensus
