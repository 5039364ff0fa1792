#pragma once

#include "ifmix/graph.hpp"
#include "ifmix/rng.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ifmix {

enum class Arch { gcn, gin };
enum class ReadoutKind { sum, mean };

std::string to_string(Arch a);
std::string to_string(ReadoutKind r);
Arch parse_arch(std::string_view s);
ReadoutKind parse_readout(std::string_view s);

struct ModelConfig {
  Arch arch = Arch::gin;
  int layers = 5;
  int hidden = 64;
  double dropout = 0.0; ///< applied after the dense layer of the classifier head
  ReadoutKind readout = ReadoutKind::sum;
  bool gcn_skip = true;
  int gin_mlp_depth = 2;
  bool bias = true;

  void validate() const;
};

struct Dense {
  Matrix weight; ///< in x out
  RowVector bias;///< size out, or empty when the model is bias-free

  Matrix apply(const Matrix& x) const;
};

struct GcnLayerParams {
  Dense linear;
  /// in x out residual projection; empty when the skip is the identity or off.
  Matrix skip_projection;
};

struct GinLayerParams {
  double eps = 0.0;
  std::vector<Dense> mlp;
};

struct ModelParams {
  Index input_dim = 0;
  Index num_classes = 0;
  std::vector<GcnLayerParams> gcn;
  std::vector<GinLayerParams> gin;
  Dense dense; ///< graph representation -> hidden
  Dense out;   ///< hidden -> classes

  /// Same shapes, all values zero.
  ModelParams zeros_like() const;
  std::size_t num_values() const;
};

/// Glorot-uniform weights, zero biases and zero GIN epsilons.
ModelParams init_params(const ModelConfig& config, Index input_dim, Index num_classes, Rng& rng);

/// Width of the graph representation fed to the classifier head.
Index representation_dim(const ModelConfig& config);

/// Visits every trainable tensor in a fixed order as (name, matrix view).
/// Scalars such as GIN epsilon are exposed as 1 x 1 views.
using TensorVisitor = std::function<void(const std::string&, Eigen::Map<Matrix>)>;
using ConstTensorVisitor = std::function<void(const std::string&, Eigen::Map<const Matrix>)>;
void for_each_tensor(ModelParams& params, const TensorVisitor& fn);
void for_each_tensor(const ModelParams& params, const ConstTensorVisitor& fn);

std::vector<double> flatten(const ModelParams& params);
void unflatten(std::span<const double> values, ModelParams& params);

// ---------------------------------------------------------------------------
// Layers

/// Weighted GCN propagation matrix: off-diagonal e(i,j)/sqrt(d_i d_j) and a
/// unit self-loop on the diagonal, with d_i = 1 + sum_j e(i,j).
Matrix gcn_propagation(const Matrix& weights);

/// ReLU(P * h * W + b), plus the residual `h` (or `h * skip`) when `skip`.
Matrix gcn_layer(const Matrix& h, const Matrix& weights, const Dense& linear, bool skip = false,
                 const Matrix& skip_projection = {});

/// MLP((1 + eps) * h + e * h). An empty MLP is the identity.
Matrix gin_layer(const Matrix& h, const Matrix& weights, double eps, std::span<const Dense> mlp);

// ---------------------------------------------------------------------------
// Forward pass

struct DenseCache {
  Matrix input;
  Matrix pre;
};

struct LayerTrace {
  Matrix input;
  Matrix propagated;            ///< P*h (GCN) or (1+eps)h + e*h (GIN)
  std::vector<DenseCache> mlp;  ///< one entry per dense sub-layer
  Matrix output;
};

struct HeadTrace {
  RowVector input;
  RowVector dense_pre;
  RowVector dropout_mask; ///< scaled keep mask; empty in evaluation mode
  RowVector hidden;       ///< after ReLU and dropout
  RowVector logits;
  Vector probabilities;
};

struct ForwardTrace {
  Matrix propagation;                 ///< GCN propagation or the raw weights for GIN
  std::vector<Matrix> embeddings;     ///< h^0 .. h^K
  std::vector<LayerTrace> layers;
  std::vector<RowVector> pooled;      ///< pooled h^1 .. h^K
  RowVector representation;           ///< h_G
  HeadTrace head;

  const Vector& probabilities() const { return head.probabilities; }
};

/// Pools per-layer embeddings: the final layer for GCN, the concatenation of
/// every layer's pooled embedding for GIN.
RowVector readout(std::span<const RowVector> pooled, const ModelConfig& config);

/// Message passing and readout only; `trace.head` is left empty.
ForwardTrace encode(const Graph& g, const ModelParams& params, const ModelConfig& config);

/// Classifier head on a representation. Dropout is active only when `rng` is
/// given and the configured rate is positive.
HeadTrace classify(const RowVector& representation, const ModelParams& params, const ModelConfig& config,
                   Rng* rng = nullptr);

ForwardTrace forward_classify(const Graph& g, const ModelParams& params, const ModelConfig& config,
                              Rng* rng = nullptr);

/// Columns of the representation that hold pooled layer k (1-based). GCN
/// attaches the head to the final layer only.
std::pair<Index, Index> representation_block(const ModelConfig& config, int layer);

// ---------------------------------------------------------------------------
// Loss and gradients

inline constexpr double kProbabilityClamp = 1e-12;

double soft_cross_entropy(const Vector& target, const Vector& probabilities);
double soft_cross_entropy(const LabelDistribution& target, const Vector& probabilities);

/// Same loss computed from logits through log-softmax; no clamp, so the
/// gradient never vanishes on confidently wrong predictions. Training uses this.
double soft_cross_entropy_logits(const Vector& target, const RowVector& logits);

/// One training example. `b` empty means a plain graph; otherwise the two
/// graphs are mixed at the representation with weight `lambda` on `a`,
/// restricted to pooled layer `mix_layer` when it is positive.
struct BatchItem {
  const Graph* a = nullptr;
  const Graph* b = nullptr;
  double lambda = 1.0;
  int mix_layer = 0;
  LabelDistribution target;
};

struct GradientResult {
  double loss = 0.0; ///< mean over the batch
  ModelParams grads;
};

/// Mean soft cross-entropy over the batch and its exact gradient.
GradientResult model_gradients(std::span<const BatchItem> batch, const ModelParams& params,
                               const ModelConfig& config, Rng* dropout_rng = nullptr);

/// Loss of a single item, with the same semantics as model_gradients.
double item_loss(const BatchItem& item, const ModelParams& params, const ModelConfig& config,
                 Rng* dropout_rng = nullptr);

/// Probabilities for an item (used for mixed-representation items).
Vector item_probabilities(const BatchItem& item, const ModelParams& params, const ModelConfig& config,
                          Rng* dropout_rng = nullptr);

// ---------------------------------------------------------------------------
// Checkpoints

/// Versioned JSON document with the config, tensor shapes and row-major values.
std::string checkpoint_to_string(const ModelConfig& config, const ModelParams& params);
void load_checkpoint_from_string(const std::string& text, ModelConfig& config, ModelParams& params);
void save_checkpoint(const std::string& path, const ModelConfig& config, const ModelParams& params);
void load_checkpoint(const std::string& path, ModelConfig& config, ModelParams& params);

} // namespace ifmix
