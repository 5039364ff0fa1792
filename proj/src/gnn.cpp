#include "ifmix/gnn.hpp"
#include "ifmix/config.hpp"
#include "ifmix/mixer.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ifmix {

std::string to_string(Arch a) { return a == Arch::gcn ? "gcn" : "gin"; }
std::string to_string(ReadoutKind r) { return r == ReadoutKind::sum ? "sum" : "mean"; }

Arch parse_arch(std::string_view s) {
  if (s == "gcn" || s == "GCN") return Arch::gcn;
  if (s == "gin" || s == "GIN") return Arch::gin;
  throw std::invalid_argument("unknown architecture '" + std::string(s) + "' (expected gcn or gin)");
}

ReadoutKind parse_readout(std::string_view s) {
  if (s == "sum") return ReadoutKind::sum;
  if (s == "mean") return ReadoutKind::mean;
  throw std::invalid_argument("unknown readout '" + std::string(s) + "' (expected sum or mean)");
}

void ModelConfig::validate() const {
  if (layers < 1) throw std::invalid_argument("model.layers must be >= 1");
  if (hidden < 1) throw std::invalid_argument("model.hidden must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("model.dropout must lie in [0, 1)");
  if (arch == Arch::gin && gin_mlp_depth < 1) throw std::invalid_argument("model.gin_mlp_depth must be >= 1");
}

Matrix Dense::apply(const Matrix& x) const {
  Matrix y = x * weight;
  if (bias.size() > 0) y.rowwise() += bias;
  return y;
}

namespace {

Dense glorot(Index in, Index out, bool bias, Rng& rng) {
  Dense d;
  const double limit = 1.0 / std::sqrt(static_cast<double>(in));
  d.weight.resize(in, out);
  for (Index j = 0; j < out; ++j) {
    for (Index i = 0; i < in; ++i) d.weight(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
  }
  if (bias) d.bias = RowVector::Zero(out);
  return d;
}

Dense zeros_like(const Dense& d) {
  return Dense{Matrix::Zero(d.weight.rows(), d.weight.cols()), RowVector::Zero(d.bias.size())};
}

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix relu_mask(const Matrix& pre) { return (pre.array() > 0.0).cast<double>().matrix(); }

template <class MapT, class D, class Fn>
void visit_dense(D& d, const std::string& name, Fn&& fn) {
  fn(name + ".weight", MapT(d.weight.data(), d.weight.rows(), d.weight.cols()));
  if (d.bias.size() > 0) fn(name + ".bias", MapT(d.bias.data(), 1, d.bias.size()));
}

template <class P, class Fn, class MapT>
void visit_all(P& params, Fn&& fn) {
  for (std::size_t k = 0; k < params.gcn.size(); ++k) {
    auto& layer = params.gcn[k];
    const std::string base = "gcn." + std::to_string(k);
    visit_dense<MapT>(layer.linear, base + ".linear", fn);
    if (layer.skip_projection.size() > 0) {
      fn(base + ".skip", MapT(layer.skip_projection.data(), layer.skip_projection.rows(),
                              layer.skip_projection.cols()));
    }
  }
  for (std::size_t k = 0; k < params.gin.size(); ++k) {
    auto& layer = params.gin[k];
    const std::string base = "gin." + std::to_string(k);
    fn(base + ".eps", MapT(&layer.eps, 1, 1));
    for (std::size_t l = 0; l < layer.mlp.size(); ++l) {
      visit_dense<MapT>(layer.mlp[l], base + ".mlp." + std::to_string(l), fn);
    }
  }
  visit_dense<MapT>(params.dense, "head.dense", fn);
  visit_dense<MapT>(params.out, "head.out", fn);
}

} // namespace

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  z.input_dim = input_dim;
  z.num_classes = num_classes;
  for (const auto& l : gcn) {
    z.gcn.push_back({ifmix::zeros_like(l.linear),
                     Matrix::Zero(l.skip_projection.rows(), l.skip_projection.cols())});
  }
  for (const auto& l : gin) {
    GinLayerParams g;
    g.eps = 0.0;
    for (const auto& d : l.mlp) g.mlp.push_back(ifmix::zeros_like(d));
    z.gin.push_back(std::move(g));
  }
  z.dense = ifmix::zeros_like(dense);
  z.out = ifmix::zeros_like(out);
  return z;
}

std::size_t ModelParams::num_values() const {
  std::size_t n = 0;
  for_each_tensor(*this, [&](const std::string&, Eigen::Map<const Matrix> t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

void for_each_tensor(ModelParams& params, const TensorVisitor& fn) {
  visit_all<ModelParams, const TensorVisitor&, Eigen::Map<Matrix>>(params, fn);
}

void for_each_tensor(const ModelParams& params, const ConstTensorVisitor& fn) {
  visit_all<const ModelParams, const ConstTensorVisitor&, Eigen::Map<const Matrix>>(params, fn);
}

std::vector<double> flatten(const ModelParams& params) {
  std::vector<double> out;
  out.reserve(params.num_values());
  for_each_tensor(params, [&](const std::string&, Eigen::Map<const Matrix> t) {
    out.insert(out.end(), t.data(), t.data() + t.size());
  });
  return out;
}

void unflatten(std::span<const double> values, ModelParams& params) {
  std::size_t offset = 0;
  for_each_tensor(params, [&](const std::string& name, Eigen::Map<Matrix> t) {
    const auto n = static_cast<std::size_t>(t.size());
    if (offset + n > values.size()) throw std::invalid_argument("unflatten: too few values for " + name);
    std::copy_n(values.data() + offset, n, t.data());
    offset += n;
  });
  if (offset != values.size()) throw std::invalid_argument("unflatten: too many values");
}

Index representation_dim(const ModelConfig& config) {
  return config.arch == Arch::gin ? static_cast<Index>(config.layers) * config.hidden : config.hidden;
}

ModelParams init_params(const ModelConfig& config, Index input_dim, Index num_classes, Rng& rng) {
  config.validate();
  if (input_dim < 1 || num_classes < 1) throw std::invalid_argument("init_params: empty input or class set");
  ModelParams p;
  p.input_dim = input_dim;
  p.num_classes = num_classes;
  const Index h = config.hidden;
  for (int k = 0; k < config.layers; ++k) {
    const Index in = k == 0 ? input_dim : h;
    if (config.arch == Arch::gcn) {
      GcnLayerParams layer;
      layer.linear = glorot(in, h, config.bias, rng);
      if (config.gcn_skip && in != h) layer.skip_projection = glorot(in, h, false, rng).weight;
      p.gcn.push_back(std::move(layer));
    } else {
      GinLayerParams layer;
      for (int l = 0; l < config.gin_mlp_depth; ++l) {
        layer.mlp.push_back(glorot(l == 0 ? in : h, h, config.bias, rng));
      }
      p.gin.push_back(std::move(layer));
    }
  }
  p.dense = glorot(representation_dim(config), h, config.bias, rng);
  p.out = glorot(h, num_classes, config.bias, rng);
  return p;
}

Matrix gcn_propagation(const Matrix& weights) {
  const Index n = weights.rows();
  Vector deg = Vector::Ones(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i != j) deg(i) += weights(i, j);
    }
  }
  Matrix p(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      p(i, j) = i == j ? 1.0 / deg(i) : weights(i, j) / std::sqrt(deg(i) * deg(j));
    }
  }
  return p;
}

namespace {

Matrix offdiag(const Matrix& w) {
  Matrix e = w;
  e.diagonal().setZero();
  return e;
}

void check_graph_shape(const Graph& g, const ModelParams& params) {
  if (g.num_nodes() == 0) throw std::invalid_argument("cannot classify an empty graph");
  if (g.weights.rows() != g.num_nodes() || g.weights.cols() != g.num_nodes()) {
    throw std::invalid_argument("edge matrix shape does not match node count");
  }
  if (g.feature_dim() != params.input_dim) {
    throw std::invalid_argument("feature dimension " + std::to_string(g.feature_dim()) +
                                " does not match model input " + std::to_string(params.input_dim));
  }
}

} // namespace

Matrix gcn_layer(const Matrix& h, const Matrix& weights, const Dense& linear, bool skip,
                 const Matrix& skip_projection) {
  if (weights.rows() != h.rows() || weights.cols() != h.rows() || linear.weight.rows() != h.cols()) {
    throw std::invalid_argument("gcn_layer: shape mismatch");
  }
  Matrix out = relu(linear.apply(gcn_propagation(weights) * h));
  if (skip) {
    if (skip_projection.size() > 0) {
      out += h * skip_projection;
    } else if (h.cols() == out.cols()) {
      out += h;
    } else {
      throw std::invalid_argument("gcn_layer: residual needs a projection when widths differ");
    }
  }
  return out;
}

Matrix gin_layer(const Matrix& h, const Matrix& weights, double eps, std::span<const Dense> mlp) {
  if (weights.rows() != h.rows() || weights.cols() != h.rows()) throw std::invalid_argument("gin_layer: shape mismatch");
  Matrix x = (1.0 + eps) * h + offdiag(weights) * h;
  for (const auto& d : mlp) {
    if (d.weight.rows() != x.cols()) throw std::invalid_argument("gin_layer: MLP shape mismatch");
    x = relu(d.apply(x));
  }
  return x;
}

RowVector readout(std::span<const RowVector> pooled, const ModelConfig& config) {
  if (pooled.empty()) throw std::invalid_argument("readout: no layers computed");
  if (config.arch == Arch::gcn) return pooled.back();
  Index total = 0;
  for (const auto& p : pooled) total += p.size();
  RowVector out(total);
  Index offset = 0;
  for (const auto& p : pooled) {
    out.segment(offset, p.size()) = p;
    offset += p.size();
  }
  return out;
}

std::pair<Index, Index> representation_block(const ModelConfig& config, int layer) {
  if (config.arch == Arch::gcn) {
    if (layer != config.layers) {
      throw std::out_of_range("GCN attaches the classifier to layer " + std::to_string(config.layers) +
                              " only; got layer " + std::to_string(layer));
    }
    return {0, config.hidden};
  }
  if (layer < 1 || layer > config.layers) {
    throw std::out_of_range("layer " + std::to_string(layer) + " outside [1, " + std::to_string(config.layers) + "]");
  }
  return {static_cast<Index>(layer - 1) * config.hidden, config.hidden};
}

ForwardTrace encode(const Graph& g, const ModelParams& params, const ModelConfig& config) {
  check_graph_shape(g, params);
  ForwardTrace t;
  const Index n = g.num_nodes();
  t.propagation = config.arch == Arch::gcn ? gcn_propagation(g.weights) : offdiag(g.weights);
  t.embeddings.push_back(g.features);
  for (int k = 0; k < config.layers; ++k) {
    const Matrix& h = t.embeddings.back();
    LayerTrace lt;
    lt.input = h;
    if (config.arch == Arch::gcn) {
      const auto& lp = params.gcn[static_cast<std::size_t>(k)];
      lt.propagated = t.propagation * h;
      DenseCache c{lt.propagated, lp.linear.apply(lt.propagated)};
      lt.output = relu(c.pre);
      if (config.gcn_skip) {
        lt.output += lp.skip_projection.size() > 0 ? Matrix(h * lp.skip_projection) : h;
      }
      lt.mlp.push_back(std::move(c));
    } else {
      const auto& lp = params.gin[static_cast<std::size_t>(k)];
      lt.propagated = (1.0 + lp.eps) * h + t.propagation * h;
      Matrix x = lt.propagated;
      for (const auto& d : lp.mlp) {
        DenseCache c{x, d.apply(x)};
        x = relu(c.pre);
        lt.mlp.push_back(std::move(c));
      }
      lt.output = std::move(x);
    }
    RowVector pooled = lt.output.colwise().sum();
    if (config.readout == ReadoutKind::mean) pooled /= static_cast<double>(n);
    t.pooled.push_back(std::move(pooled));
    t.embeddings.push_back(lt.output);
    t.layers.push_back(std::move(lt));
  }
  t.representation = readout(t.pooled, config);
  return t;
}

HeadTrace classify(const RowVector& representation, const ModelParams& params, const ModelConfig& config,
                   Rng* rng) {
  if (representation.size() != params.dense.weight.rows()) {
    throw std::invalid_argument("representation width does not match the classifier head");
  }
  HeadTrace h;
  h.input = representation;
  h.dense_pre = params.dense.apply(representation);
  h.hidden = h.dense_pre.cwiseMax(0.0);
  if (rng != nullptr && config.dropout > 0.0) {
    const double keep = 1.0 - config.dropout;
    h.dropout_mask.resize(h.hidden.size());
    for (Index i = 0; i < h.hidden.size(); ++i) h.dropout_mask(i) = rng->uniform() < keep ? 1.0 / keep : 0.0;
    h.hidden = h.hidden.cwiseProduct(h.dropout_mask);
  }
  h.logits = params.out.apply(h.hidden);
  const double mx = h.logits.maxCoeff();
  Vector e = (h.logits.array() - mx).exp().transpose();
  h.probabilities = e / e.sum();
  return h;
}

ForwardTrace forward_classify(const Graph& g, const ModelParams& params, const ModelConfig& config, Rng* rng) {
  ForwardTrace t = encode(g, params, config);
  t.head = classify(t.representation, params, config, rng);
  return t;
}

double soft_cross_entropy(const Vector& target, const Vector& probabilities) {
  if (target.size() != probabilities.size()) {
    throw std::invalid_argument("soft_cross_entropy: dimension mismatch " + std::to_string(target.size()) + " vs " +
                                std::to_string(probabilities.size()));
  }
  double loss = 0.0;
  for (Index c = 0; c < target.size(); ++c) {
    if (target(c) != 0.0) loss -= target(c) * std::log(std::max(probabilities(c), kProbabilityClamp));
  }
  return loss;
}

double soft_cross_entropy(const LabelDistribution& target, const Vector& probabilities) {
  return soft_cross_entropy(target.p, probabilities);
}

double soft_cross_entropy_logits(const Vector& target, const RowVector& logits) {
  if (target.size() != logits.size()) {
    throw std::invalid_argument("soft_cross_entropy_logits: dimension mismatch " + std::to_string(target.size()) +
                                " vs " + std::to_string(logits.size()));
  }
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  double loss = 0.0;
  for (Index c = 0; c < target.size(); ++c) {
    if (target(c) != 0.0) loss -= target(c) * (logits(c) - lse);
  }
  return loss;
}

namespace {

void accumulate_dense(Dense& g, const Matrix& input, const Matrix& dpre) {
  g.weight.noalias() += input.transpose() * dpre;
  if (g.bias.size() > 0) g.bias += dpre.colwise().sum();
}

// d loss / d logits for the log-softmax cross-entropy.
RowVector logit_gradient(const Vector& target, const Vector& p) {
  return (target.sum() * p - target).transpose();
}

// Backpropagates through the head; returns d loss / d representation.
RowVector head_backward(const HeadTrace& h, const ModelParams& params, const RowVector& dlogits,
                        ModelParams& grads) {
  accumulate_dense(grads.out, h.hidden, dlogits);
  RowVector dhidden = dlogits * params.out.weight.transpose();
  if (h.dropout_mask.size() > 0) dhidden = dhidden.cwiseProduct(h.dropout_mask);
  RowVector dpre = dhidden.cwiseProduct(RowVector(relu_mask(h.dense_pre)));
  accumulate_dense(grads.dense, h.input, dpre);
  return dpre * params.dense.weight.transpose();
}

void encoder_backward(const ForwardTrace& t, const ModelParams& params, const ModelConfig& config,
                      const RowVector& drep, ModelParams& grads) {
  const int K = config.layers;
  const Index n = t.embeddings.front().rows();
  const double pool_scale = config.readout == ReadoutKind::mean ? 1.0 / static_cast<double>(n) : 1.0;

  auto pooled_grad = [&](int k) -> std::optional<RowVector> { // k is 1-based
    if (config.arch == Arch::gcn) {
      if (k == K) return RowVector(drep);
      return std::nullopt;
    }
    return RowVector(drep.segment(static_cast<Index>(k - 1) * config.hidden, config.hidden));
  };

  Matrix dh = Matrix::Zero(n, config.hidden);
  for (int k = K; k >= 1; --k) {
    if (auto dp = pooled_grad(k)) dh.rowwise() += *dp * pool_scale;
    const LayerTrace& lt = t.layers[static_cast<std::size_t>(k - 1)];
    Matrix din;
    if (config.arch == Arch::gcn) {
      const auto& lp = params.gcn[static_cast<std::size_t>(k - 1)];
      auto& lg = grads.gcn[static_cast<std::size_t>(k - 1)];
      const DenseCache& c = lt.mlp.front();
      const Matrix dpre = dh.cwiseProduct(relu_mask(c.pre));
      accumulate_dense(lg.linear, c.input, dpre);
      din = t.propagation.transpose() * (dpre * lp.linear.weight.transpose());
      if (config.gcn_skip) {
        if (lp.skip_projection.size() > 0) {
          lg.skip_projection.noalias() += lt.input.transpose() * dh;
          din.noalias() += dh * lp.skip_projection.transpose();
        } else {
          din += dh;
        }
      }
    } else {
      const auto& lp = params.gin[static_cast<std::size_t>(k - 1)];
      auto& lg = grads.gin[static_cast<std::size_t>(k - 1)];
      Matrix dx = dh;
      for (std::size_t l = lp.mlp.size(); l-- > 0;) {
        const DenseCache& c = lt.mlp[l];
        const Matrix dpre = dx.cwiseProduct(relu_mask(c.pre));
        accumulate_dense(lg.mlp[l], c.input, dpre);
        dx = dpre * lp.mlp[l].weight.transpose();
      }
      lg.eps += dx.cwiseProduct(lt.input).sum();
      din = (1.0 + lp.eps) * dx + t.propagation.transpose() * dx;
    }
    dh = std::move(din);
  }
}

struct ItemForward {
  ForwardTrace a;
  std::optional<ForwardTrace> b;
  std::pair<Index, Index> block{0, 0};
  HeadTrace head;
};

ItemForward item_forward(const BatchItem& item, const ModelParams& params, const ModelConfig& config, Rng* rng) {
  if (item.a == nullptr) throw std::invalid_argument("batch item without a graph");
  ItemForward f;
  f.a = encode(*item.a, params, config);
  if (item.b == nullptr) {
    f.head = classify(f.a.representation, params, config, rng);
    return f;
  }
  f.b = encode(*item.b, params, config);
  const RowVector& ra = f.a.representation;
  const RowVector& rb = f.b->representation;
  RowVector mixed;
  if (item.mix_layer <= 0) {
    mixed = interpolate(ra, rb, item.lambda);
  } else {
    f.block = representation_block(config, item.mix_layer);
    mixed = RowVector::Zero(ra.size());
    const RowVector block_a = ra.segment(f.block.first, f.block.second);
    const RowVector block_b = rb.segment(f.block.first, f.block.second);
    mixed.segment(f.block.first, f.block.second) = interpolate(block_a, block_b, item.lambda);
  }
  f.head = classify(mixed, params, config, rng);
  return f;
}

} // namespace

Vector item_probabilities(const BatchItem& item, const ModelParams& params, const ModelConfig& config, Rng* rng) {
  return item_forward(item, params, config, rng).head.probabilities;
}

double item_loss(const BatchItem& item, const ModelParams& params, const ModelConfig& config, Rng* rng) {
  return soft_cross_entropy_logits(item.target.p, item_forward(item, params, config, rng).head.logits);
}

GradientResult model_gradients(std::span<const BatchItem> batch, const ModelParams& params,
                               const ModelConfig& config, Rng* dropout_rng) {
  if (batch.empty()) throw std::invalid_argument("model_gradients: empty batch");
  GradientResult result;
  result.grads = params.zeros_like();
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto& item : batch) {
    const ItemForward f = item_forward(item, params, config, dropout_rng);
    if (item.target.num_classes() != params.num_classes) {
      throw std::invalid_argument("target has " + std::to_string(item.target.num_classes()) + " classes, model has " +
                                  std::to_string(params.num_classes));
    }
    result.loss += scale * soft_cross_entropy_logits(item.target.p, f.head.logits);
    const RowVector dlogits = scale * logit_gradient(item.target.p, f.head.probabilities);
    const RowVector drep = head_backward(f.head, params, dlogits, result.grads);
    if (!f.b) {
      encoder_backward(f.a, params, config, drep, result.grads);
      continue;
    }
    RowVector dmix = drep;
    if (item.mix_layer > 0) {
      dmix.setZero();
      dmix.segment(f.block.first, f.block.second) = drep.segment(f.block.first, f.block.second);
    }
    encoder_backward(f.a, params, config, item.lambda * dmix, result.grads);
    encoder_backward(*f.b, params, config, (1.0 - item.lambda) * dmix, result.grads);
  }
  return result;
}

// ---------------------------------------------------------------------------

std::string checkpoint_to_string(const ModelConfig& config, const ModelParams& params) {
  nlohmann::ordered_json doc;
  doc["format"] = "ifmix-checkpoint";
  doc["version"] = 1;
  doc["model"] = model_config_to_json(config);
  doc["input_dim"] = params.input_dim;
  doc["num_classes"] = params.num_classes;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  for_each_tensor(params, [&](const std::string& name, Eigen::Map<const Matrix> t) {
    nlohmann::ordered_json entry;
    entry["name"] = name;
    entry["shape"] = {t.rows(), t.cols()};
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(t.size()));
    for (Index r = 0; r < t.rows(); ++r) {
      for (Index c = 0; c < t.cols(); ++c) values.push_back(t(r, c));
    }
    entry["values"] = std::move(values);
    tensors.push_back(std::move(entry));
  });
  doc["tensors"] = std::move(tensors);
  return doc.dump(1);
}

void load_checkpoint_from_string(const std::string& text, ModelConfig& config, ModelParams& params) {
  const auto doc = nlohmann::json::parse(text);
  if (doc.value("format", "") != "ifmix-checkpoint") throw std::runtime_error("not an ifmix checkpoint");
  if (doc.value("version", 0) != 1) throw std::runtime_error("unsupported checkpoint version");
  config = model_config_from_json(doc.at("model"));
  Rng unused(0);
  params = init_params(config, doc.at("input_dim").get<Index>(), doc.at("num_classes").get<Index>(), unused);
  std::map<std::string, const nlohmann::json*> by_name;
  for (const auto& t : doc.at("tensors")) by_name[t.at("name").get<std::string>()] = &t;
  for_each_tensor(params, [&](const std::string& name, Eigen::Map<Matrix> t) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw std::runtime_error("checkpoint is missing tensor " + name);
    const auto& entry = *it->second;
    const auto shape = entry.at("shape").get<std::vector<Index>>();
    if (shape.size() != 2 || shape[0] != t.rows() || shape[1] != t.cols()) {
      throw std::runtime_error("checkpoint tensor " + name + " has the wrong shape");
    }
    const auto values = entry.at("values").get<std::vector<double>>();
    if (static_cast<Index>(values.size()) != t.size()) throw std::runtime_error("checkpoint tensor " + name + " is truncated");
    std::size_t k = 0;
    for (Index r = 0; r < t.rows(); ++r) {
      for (Index c = 0; c < t.cols(); ++c) t(r, c) = values[k++];
    }
  });
}

void save_checkpoint(const std::string& path, const ModelConfig& config, const ModelParams& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << checkpoint_to_string(config, params) << '\n';
}

void load_checkpoint(const std::string& path, ModelConfig& config, ModelParams& params) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  load_checkpoint_from_string(ss.str(), config, params);
}

} // namespace ifmix
