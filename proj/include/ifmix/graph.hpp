#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ifmix {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

/// Node-featured graph: an n x d feature matrix and a dense, symmetric
/// n x n edge-weight matrix with zero diagonal and entries in [0, 1].
struct Graph {
  Matrix features;
  Matrix weights;

  Graph() = default;
  Graph(Matrix v, Matrix e) : features(std::move(v)), weights(std::move(e)) {}

  Index num_nodes() const { return features.rows(); }
  Index feature_dim() const { return features.cols(); }
  /// Number of undirected edges with nonzero weight.
  Index num_edges() const;
  bool is_binary() const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.features.rows() == b.features.rows() && a.features.cols() == b.features.cols() &&
           a.weights.rows() == b.weights.rows() && a.weights.cols() == b.weights.cols() &&
           a.features == b.features && a.weights == b.weights;
  }
};

/// Empty graph with n nodes, zero features of dimension d and no edges.
Graph make_graph(Index n, Index d);

/// Probability vector over C classes. One-hot for source data.
struct LabelDistribution {
  Vector p;

  LabelDistribution() = default;
  explicit LabelDistribution(Vector probs) : p(std::move(probs)) {}

  static LabelDistribution one_hot(Index cls, Index num_classes);

  Index num_classes() const { return p.size(); }
  /// Index of the largest entry; ties resolve to the lower index.
  Index argmax() const;
  bool is_valid(double tol = 1e-9) const;
  bool is_one_hot() const;
};

struct Sample {
  Graph graph;
  LabelDistribution label;
};

struct GraphDataset {
  std::string name;
  std::vector<Sample> items;
  Index num_classes = 0;
  Index feature_dim = 0;

  std::size_t size() const { return items.size(); }
  const Graph& graph(std::size_t i) const { return items[i].graph; }
  const LabelDistribution& label(std::size_t i) const { return items[i].label; }
  /// Hard class index of item i (argmax of its label).
  Index class_of(std::size_t i) const { return items[i].label.argmax(); }
  GraphDataset subset(std::span<const std::size_t> indices) const;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Lists every invariant violation. Never throws.
ValidationReport validate_graph(const Graph& g, bool require_binary = false);

/// Appends disconnected zero-feature nodes until g has n nodes.
Graph pad_to(const Graph& g, Index n);

/// Pads both graphs to max(nA, nB) nodes. Dummy nodes go after existing ones.
std::pair<Graph, Graph> pad_pair(const Graph& a, const Graph& b);

/// Relabels nodes: node i of the result is node perm[i] of g.
Graph permute_nodes(const Graph& g, std::span<const std::size_t> perm);

struct IndependenceResult {
  bool independent = false;
  Index rank = 0;
};

/// Rank of the row set by row reduction; independent iff rank == rows.
IndependenceResult check_linear_independence(const Matrix& rows, double pivot_tol = 1e-9);

/// Indices of a maximal linearly independent subset of the rows, chosen
/// greedily in row order.
std::vector<Index> independent_row_subset(const Matrix& rows, double pivot_tol = 1e-9);

/// Feature vocabulary V of a dataset, a basis B of SPAN(V) and the
/// per-graph coefficient matrices T with v = T * B.
struct FeatureBasis {
  Matrix vocabulary;               ///< |V| x d, distinct nonzero rows
  Matrix basis;                    ///< m x d, rows linearly independent
  std::vector<Matrix> coefficients;///< one n_g x m matrix per graph

  Index dim() const { return basis.cols(); }
  Index rank() const { return basis.rows(); }
  /// V* = V plus the zero vector, which is stored as the last row.
  Matrix vocabulary_star() const;
  /// Coefficient rows of `v` in the basis; throws if v leaves SPAN(V).
  Matrix coordinates(const Matrix& v, double tol = 1e-9) const;
};

FeatureBasis feature_vocabulary(std::span<const Graph> graphs);
FeatureBasis feature_vocabulary(const GraphDataset& ds);

/// Whether the set of coefficient matrices (deduplicated, zero-padded to a
/// common row count and flattened) is linearly independent.
IndependenceResult check_coefficient_independence(const FeatureBasis& basis,
                                                  double pivot_tol = 1e-9);

struct DegreeStats {
  std::size_t graphs = 0;
  double mean_nodes = 0.0;
  double mean_edges = 0.0; ///< undirected edges counted once
  Index feature_dim = 0;
  Index num_classes = 0;
};

DegreeStats degree_stats(const GraphDataset& ds);

} // namespace ifmix
