#include "ifmix/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ifmix {

Index Graph::num_edges() const {
  Index count = 0;
  for (Index i = 0; i < weights.rows(); ++i) {
    for (Index j = i + 1; j < weights.cols(); ++j) {
      if (weights(i, j) != 0.0) ++count;
    }
  }
  return count;
}

bool Graph::is_binary() const {
  return (weights.array() == 0.0 || weights.array() == 1.0).all();
}

Graph make_graph(Index n, Index d) {
  return Graph(Matrix::Zero(n, d), Matrix::Zero(n, n));
}

LabelDistribution LabelDistribution::one_hot(Index cls, Index num_classes) {
  if (cls < 0 || cls >= num_classes) {
    throw std::out_of_range("class index " + std::to_string(cls) + " outside [0, " +
                            std::to_string(num_classes) + ")");
  }
  Vector p = Vector::Zero(num_classes);
  p(cls) = 1.0;
  return LabelDistribution(std::move(p));
}

Index LabelDistribution::argmax() const {
  Index best = 0;
  for (Index c = 1; c < p.size(); ++c) {
    if (p(c) > p(best)) best = c;
  }
  return best;
}

bool LabelDistribution::is_valid(double tol) const {
  if (p.size() == 0) return false;
  if ((p.array() < 0.0).any()) return false;
  return std::abs(p.sum() - 1.0) <= tol;
}

bool LabelDistribution::is_one_hot() const {
  return (p.array() == 0.0 || p.array() == 1.0).all() && p.sum() == 1.0;
}

GraphDataset GraphDataset::subset(std::span<const std::size_t> indices) const {
  GraphDataset out;
  out.name = name;
  out.num_classes = num_classes;
  out.feature_dim = feature_dim;
  out.items.reserve(indices.size());
  for (auto i : indices) out.items.push_back(items.at(i));
  return out;
}

ValidationReport validate_graph(const Graph& g, bool require_binary) {
  ValidationReport report;
  auto& out = report.violations;
  const Index n = g.features.rows();
  if (n == 0) out.push_back("graph has no nodes");
  if (g.features.cols() == 0) out.push_back("feature dimension is zero");
  if (g.weights.rows() != n || g.weights.cols() != n) {
    std::ostringstream msg;
    msg << "dimension mismatch: features have " << n << " rows but weights are "
        << g.weights.rows() << "x" << g.weights.cols();
    out.push_back(msg.str());
    return report;
  }
  if (!g.features.allFinite()) out.push_back("non-finite feature value");
  for (Index i = 0; i < n; ++i) {
    if (g.weights(i, i) != 0.0) {
      out.push_back("nonzero diagonal at " + std::to_string(i));
    }
    for (Index j = 0; j < n; ++j) {
      const double w = g.weights(i, j);
      if (!(w >= 0.0 && w <= 1.0)) {
        out.push_back("weight out of [0,1] at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      } else if (require_binary && w != 0.0 && w != 1.0) {
        out.push_back("non-binary weight at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      if (j > i && g.weights(i, j) != g.weights(j, i)) {
        out.push_back("asymmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
  return report;
}

Graph pad_to(const Graph& g, Index n) {
  const Index old_n = g.num_nodes();
  if (n < old_n) {
    throw std::invalid_argument("cannot pad a " + std::to_string(old_n) + "-node graph down to " +
                                std::to_string(n));
  }
  if (n == old_n) return g;
  Graph out = make_graph(n, g.feature_dim());
  out.features.topRows(old_n) = g.features;
  out.weights.topLeftCorner(old_n, old_n) = g.weights;
  return out;
}

std::pair<Graph, Graph> pad_pair(const Graph& a, const Graph& b) {
  if (a.feature_dim() != b.feature_dim()) {
    throw std::invalid_argument("feature dimension mismatch: " + std::to_string(a.feature_dim()) +
                                " vs " + std::to_string(b.feature_dim()));
  }
  const Index n = std::max(a.num_nodes(), b.num_nodes());
  return {pad_to(a, n), pad_to(b, n)};
}

Graph permute_nodes(const Graph& g, std::span<const std::size_t> perm) {
  const Index n = g.num_nodes();
  if (static_cast<Index>(perm.size()) != n) {
    throw std::invalid_argument("permutation size does not match node count");
  }
  Graph out = make_graph(n, g.feature_dim());
  for (Index i = 0; i < n; ++i) {
    const auto pi = static_cast<Index>(perm[i]);
    out.features.row(i) = g.features.row(pi);
    for (Index j = 0; j < n; ++j) {
      out.weights(i, j) = g.weights(pi, static_cast<Index>(perm[j]));
    }
  }
  return out;
}

IndependenceResult check_linear_independence(const Matrix& rows, double pivot_tol) {
  Matrix a = rows;
  const Index r = a.rows();
  const Index c = a.cols();
  Index rank = 0;
  for (Index col = 0; col < c && rank < r; ++col) {
    Index pivot;
    const double best = a.col(col).tail(r - rank).cwiseAbs().maxCoeff(&pivot);
    if (best <= pivot_tol) continue;
    pivot += rank;
    a.row(pivot).swap(a.row(rank));
    for (Index i = rank + 1; i < r; ++i) {
      const double f = a(i, col) / a(rank, col);
      if (f != 0.0) a.row(i) -= f * a.row(rank);
    }
    ++rank;
  }
  return {rank == r, rank};
}

std::vector<Index> independent_row_subset(const Matrix& rows, double pivot_tol) {
  std::vector<Index> kept;
  std::vector<RowVector> reduced;
  std::vector<Index> pivots;
  for (Index i = 0; i < rows.rows(); ++i) {
    RowVector x = rows.row(i);
    for (std::size_t k = 0; k < reduced.size(); ++k) {
      const double f = x(pivots[k]) / reduced[k](pivots[k]);
      if (f != 0.0) x -= f * reduced[k];
    }
    Index pc;
    if (x.size() == 0 || x.cwiseAbs().maxCoeff(&pc) <= pivot_tol) continue;
    kept.push_back(i);
    reduced.push_back(std::move(x));
    pivots.push_back(pc);
  }
  return kept;
}

Matrix FeatureBasis::vocabulary_star() const {
  Matrix out = Matrix::Zero(vocabulary.rows() + 1, vocabulary.cols());
  out.topRows(vocabulary.rows()) = vocabulary;
  return out;
}

Matrix FeatureBasis::coordinates(const Matrix& v, double tol) const {
  if (v.cols() != basis.cols()) {
    throw std::invalid_argument("feature dimension mismatch: " + std::to_string(v.cols()) +
                                " vs basis " + std::to_string(basis.cols()));
  }
  if (basis.rows() == 0) {
    if (v.size() > 0 && v.cwiseAbs().maxCoeff() > tol) {
      throw std::domain_error("features lie outside the span of the vocabulary");
    }
    return Matrix::Zero(v.rows(), 0);
  }
  const Matrix gram = basis * basis.transpose();
  Matrix t = gram.ldlt().solve(basis * v.transpose()).transpose();
  const double residual = v.rows() == 0 ? 0.0 : (t * basis - v).cwiseAbs().maxCoeff();
  if (residual > tol) {
    throw std::domain_error("features lie outside the span of the vocabulary (residual " +
                            std::to_string(residual) + ")");
  }
  return t;
}

namespace {

std::vector<std::uint64_t> bit_key(const RowVector& row) {
  std::vector<std::uint64_t> key(static_cast<std::size_t>(row.size()));
  for (Index j = 0; j < row.size(); ++j) key[static_cast<std::size_t>(j)] = std::bit_cast<std::uint64_t>(row(j));
  return key;
}

} // namespace

FeatureBasis feature_vocabulary(std::span<const Graph> graphs) {
  if (graphs.empty()) throw std::invalid_argument("feature_vocabulary: empty dataset");
  const Index d = graphs.front().feature_dim();
  std::map<std::vector<std::uint64_t>, Index> seen;
  std::vector<RowVector> distinct;
  for (const auto& g : graphs) {
    if (g.feature_dim() != d) throw std::invalid_argument("feature_vocabulary: mixed feature dimensions");
    for (Index i = 0; i < g.num_nodes(); ++i) {
      RowVector row = g.features.row(i);
      if ((row.array() == 0.0).all()) continue;
      if (seen.emplace(bit_key(row), static_cast<Index>(distinct.size())).second) {
        distinct.push_back(std::move(row));
      }
    }
  }
  FeatureBasis fb;
  fb.vocabulary.resize(static_cast<Index>(distinct.size()), d);
  for (std::size_t k = 0; k < distinct.size(); ++k) fb.vocabulary.row(static_cast<Index>(k)) = distinct[k];
  const auto chosen = independent_row_subset(fb.vocabulary);
  fb.basis.resize(static_cast<Index>(chosen.size()), d);
  for (std::size_t k = 0; k < chosen.size(); ++k) fb.basis.row(static_cast<Index>(k)) = fb.vocabulary.row(chosen[k]);
  fb.coefficients.reserve(graphs.size());
  for (const auto& g : graphs) fb.coefficients.push_back(fb.coordinates(g.features));
  return fb;
}

FeatureBasis feature_vocabulary(const GraphDataset& ds) {
  std::vector<Graph> graphs;
  graphs.reserve(ds.size());
  for (const auto& s : ds.items) graphs.push_back(s.graph);
  return feature_vocabulary(graphs);
}

IndependenceResult check_coefficient_independence(const FeatureBasis& basis, double pivot_tol) {
  Index max_rows = 0;
  for (const auto& t : basis.coefficients) max_rows = std::max(max_rows, t.rows());
  const Index m = basis.rank();
  std::vector<Matrix> unique;
  for (const auto& t : basis.coefficients) {
    Matrix padded = Matrix::Zero(max_rows, m);
    padded.topRows(t.rows()) = t;
    const bool dup = std::any_of(unique.begin(), unique.end(),
                                 [&](const Matrix& u) { return u == padded; });
    if (!dup) unique.push_back(std::move(padded));
  }
  Matrix flat(static_cast<Index>(unique.size()), max_rows * m);
  for (std::size_t k = 0; k < unique.size(); ++k) {
    // row-major flattening of each T
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = unique[k];
    flat.row(static_cast<Index>(k)) = Eigen::Map<const RowVector>(rm.data(), rm.size());
  }
  return check_linear_independence(flat, pivot_tol);
}

DegreeStats degree_stats(const GraphDataset& ds) {
  DegreeStats s;
  s.graphs = ds.size();
  s.feature_dim = ds.feature_dim;
  s.num_classes = ds.num_classes;
  if (ds.size() == 0) return s;
  double nodes = 0.0;
  double edges = 0.0;
  for (const auto& item : ds.items) {
    nodes += static_cast<double>(item.graph.num_nodes());
    edges += static_cast<double>(item.graph.num_edges());
  }
  s.mean_nodes = nodes / static_cast<double>(ds.size());
  s.mean_edges = edges / static_cast<double>(ds.size());
  return s;
}

} // namespace ifmix
