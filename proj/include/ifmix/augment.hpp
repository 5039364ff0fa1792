#pragma once

#include "ifmix/gnn.hpp"
#include "ifmix/graph.hpp"
#include "ifmix/mixer.hpp"
#include "ifmix/rng.hpp"

#include <string>
#include <string_view>

namespace ifmix {

enum class AugmentKind { none, if_mixup, drop_edge, drop_node, mixup_graph, manifold_mixup, if_mixup_shuffled };

std::string to_string(AugmentKind k);
AugmentKind parse_augment_kind(std::string_view s);

struct AugmentSpec {
  AugmentKind kind = AugmentKind::none;
  double ratio = 0.2;    ///< drop_edge / drop_node only
  BetaParams beta{1.0, 1.0};
  int mix_layer = 0;     ///< manifold_mixup only; 0 draws a layer per pair

  void validate() const;
  /// Mixes two input graphs before the forward pass.
  bool mixes_inputs() const { return kind == AugmentKind::if_mixup || kind == AugmentKind::if_mixup_shuffled; }
  /// Mixes inside the model, at the readout or a hidden layer.
  bool mixes_representations() const {
    return kind == AugmentKind::mixup_graph || kind == AugmentKind::manifold_mixup;
  }
  bool drops() const { return kind == AugmentKind::drop_edge || kind == AugmentKind::drop_node; }
};

/// Removes floor(ratio * E) undirected edges chosen uniformly without replacement.
Graph drop_edge(const Graph& g, double ratio, Rng& rng);

/// Removes floor(ratio * n) nodes and their edges. Survivors keep their order.
Graph drop_node(const Graph& g, double ratio, Rng& rng);

RowVector mix_readout(const RowVector& a, const RowVector& b, double lambda);

/// Mixes the pooled layer-k readouts of two traces (k is 1-based). The result
/// has the width of one pooled layer.
RowVector mix_hidden(const ForwardTrace& a, const ForwardTrace& b, double lambda, int k);

/// Places a mixed layer-k vector into an otherwise zero representation so the
/// head sees it through the weights attached to that layer.
RowVector route_to_head(const RowVector& mixed, const ModelConfig& config, int k);

/// Uniform layer draw for manifold mixing. GCN only exposes its final layer.
int draw_mix_layer(const ModelConfig& config, Rng& rng);

} // namespace ifmix
