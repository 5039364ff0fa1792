#include "ifmix/augment.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ifmix {

std::string to_string(AugmentKind k) {
  switch (k) {
  case AugmentKind::none: return "none";
  case AugmentKind::if_mixup: return "if_mixup";
  case AugmentKind::drop_edge: return "drop_edge";
  case AugmentKind::drop_node: return "drop_node";
  case AugmentKind::mixup_graph: return "mixup_graph";
  case AugmentKind::manifold_mixup: return "manifold_mixup";
  case AugmentKind::if_mixup_shuffled: return "if_mixup_shuffled";
  }
  return "none";
}

AugmentKind parse_augment_kind(std::string_view s) {
  for (auto k : {AugmentKind::none, AugmentKind::if_mixup, AugmentKind::drop_edge, AugmentKind::drop_node,
                 AugmentKind::mixup_graph, AugmentKind::manifold_mixup, AugmentKind::if_mixup_shuffled}) {
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown augmentation '" + std::string(s) + "'");
}

void AugmentSpec::validate() const {
  if (drops() && !(ratio >= 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("augment.ratio must lie in [0, 1)");
  }
  if (mixes_inputs() || mixes_representations()) beta.validate();
  if (mix_layer < 0) throw std::invalid_argument("augment.mix_layer must be >= 0");
}

namespace {

void check_ratio(double ratio) {
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    std::ostringstream msg;
    msg << "drop ratio " << ratio << " outside [0, 1)";
    throw std::invalid_argument(msg.str());
  }
}

std::size_t drop_count(double ratio, std::size_t count) {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(count)));
}

} // namespace

Graph drop_edge(const Graph& g, double ratio, Rng& rng) {
  check_ratio(ratio);
  std::vector<std::pair<Index, Index>> edges;
  for (Index i = 0; i < g.num_nodes(); ++i) {
    for (Index j = i + 1; j < g.num_nodes(); ++j) {
      if (g.weights(i, j) != 0.0) edges.emplace_back(i, j);
    }
  }
  Graph out = g;
  const std::size_t k = drop_count(ratio, edges.size());
  if (k == 0) return out;
  const auto order = rng.permutation(edges.size());
  for (std::size_t t = 0; t < k; ++t) {
    const auto [i, j] = edges[order[t]];
    out.weights(i, j) = 0.0;
    out.weights(j, i) = 0.0;
  }
  return out;
}

Graph drop_node(const Graph& g, double ratio, Rng& rng) {
  check_ratio(ratio);
  const auto n = static_cast<std::size_t>(g.num_nodes());
  const std::size_t k = drop_count(ratio, n);
  if (k == 0) return g;
  if (k >= n) throw std::invalid_argument("drop_node would remove every node");
  const auto order = rng.permutation(n);
  std::vector<bool> dropped(n, false);
  for (std::size_t t = 0; t < k; ++t) dropped[order[t]] = true;
  std::vector<Index> keep;
  for (std::size_t i = 0; i < n; ++i) {
    if (!dropped[i]) keep.push_back(static_cast<Index>(i));
  }
  const auto m = static_cast<Index>(keep.size());
  Graph out(Matrix(m, g.feature_dim()), Matrix(m, m));
  for (Index a = 0; a < m; ++a) {
    out.features.row(a) = g.features.row(keep[static_cast<std::size_t>(a)]);
    for (Index b = 0; b < m; ++b) {
      out.weights(a, b) = g.weights(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]);
    }
  }
  return out;
}

RowVector mix_readout(const RowVector& a, const RowVector& b, double lambda) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("mix_readout: widths " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()) + " differ");
  }
  return interpolate(a, b, lambda);
}

RowVector mix_hidden(const ForwardTrace& a, const ForwardTrace& b, double lambda, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > a.pooled.size() || a.pooled.size() != b.pooled.size()) {
    throw std::out_of_range("mix_hidden: layer " + std::to_string(k) + " outside [1, " +
                            std::to_string(a.pooled.size()) + "]");
  }
  const auto idx = static_cast<std::size_t>(k - 1);
  return mix_readout(a.pooled[idx], b.pooled[idx], lambda);
}

RowVector route_to_head(const RowVector& mixed, const ModelConfig& config, int k) {
  const auto [offset, width] = representation_block(config, k);
  if (mixed.size() != width) throw std::invalid_argument("route_to_head: vector width does not match layer width");
  RowVector out = RowVector::Zero(representation_dim(config));
  out.segment(offset, width) = mixed;
  return out;
}

int draw_mix_layer(const ModelConfig& config, Rng& rng) {
  if (config.arch == Arch::gcn) return config.layers;
  return 1 + static_cast<int>(rng.index(static_cast<std::size_t>(config.layers)));
}

} // namespace ifmix
