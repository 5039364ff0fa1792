#include "ifmix/trainer.hpp"
#include "ifmix/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace ifmix {

void TrainConfig::validate() const {
  model.validate();
  augment.validate();
  if (!(lr0 > 0.0)) throw std::invalid_argument("train.lr0 must be positive");
  if (batch_size < 1) throw std::invalid_argument("train.batch_size must be positive");
  if (epochs < 1) throw std::invalid_argument("train.epochs must be positive");
  if (folds < 2) throw std::invalid_argument("train.folds must be at least 2");
  if (runs < 1) throw std::invalid_argument("train.runs must be positive");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("train.weight_decay must be nonnegative");
  if (!(guard_tol >= 0.0 && guard_tol < 0.5)) throw std::invalid_argument("train.guard_tol must lie in [0, 0.5)");
}

double lr_at_epoch(double lr0, int epoch) {
  if (epoch < 0) throw std::invalid_argument("lr_at_epoch: negative epoch");
  return std::ldexp(lr0, -(epoch / 50));
}

void adamw_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr,
                double weight_decay) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adamw_step: " + std::to_string(params.size()) + " parameters but " +
                                std::to_string(grads.size()) + " gradients");
  }
  if (state.m.empty() && state.step == 0) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) throw std::invalid_argument("adamw_step: optimizer state has the wrong size");
  ++state.step;
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = kAdamBeta1 * state.m[i] + (1.0 - kAdamBeta1) * g;
    state.v[i] = kAdamBeta2 * state.v[i] + (1.0 - kAdamBeta2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    const double w = params[i];
    params[i] = w - lr * mhat / (std::sqrt(vhat) + kAdamEps) - lr * weight_decay * w;
  }
}

void adamw_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr, double weight_decay) {
  std::vector<double> p = flatten(params);
  const std::vector<double> g = flatten(grads);
  adamw_step(std::span<double>(p), std::span<const double>(g), state, lr, weight_decay);
  unflatten(p, params);
}

Index predict(const Graph& g, const ModelParams& params, const ModelConfig& config) {
  const Vector p = forward_classify(g, params, config).head.probabilities;
  Index best = 0;
  for (Index c = 1; c < p.size(); ++c) {
    if (p(c) > p(best)) best = c;
  }
  return best;
}

double accuracy(const GraphDataset& ds, const ModelParams& params, const ModelConfig& config) {
  if (ds.size() == 0) return std::numeric_limits<double>::quiet_NaN();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (predict(ds.graph(i), params, config) == ds.class_of(i)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

EpochStream build_epoch(const GraphDataset& train, const TrainConfig& cfg, Rng& rng) {
  const std::size_t n = train.size();
  if (n == 0) throw std::invalid_argument("empty training set");
  EpochStream s;
  const auto order = rng.permutation(n);
  const AugmentSpec& aug = cfg.augment;
  s.items.reserve(n);
  s.storage.reserve(n);

  if (aug.kind == AugmentKind::none || aug.drops()) {
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t i = order[t];
      const Graph* g = &train.graph(i);
      if (aug.kind == AugmentKind::drop_edge) {
        s.storage.push_back(drop_edge(*g, aug.ratio, rng));
        g = &s.storage.back();
      } else if (aug.kind == AugmentKind::drop_node) {
        s.storage.push_back(drop_node(*g, aug.ratio, rng));
        g = &s.storage.back();
      }
      s.items.push_back({g, nullptr, 1.0, 0, train.label(i)});
    }
    return s;
  }

  const bool shuffle = cfg.shuffle_nodes_before_mix || aug.kind == AugmentKind::if_mixup_shuffled;
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t i = order[t];
    const std::size_t j = order[(t + 1) % n];
    double lambda = sample_lambda(aug.beta, rng);
    if (aug.mixes_inputs() && cfg.intrusion_guard) {
      while (std::abs(lambda - 0.5) < cfg.guard_tol) lambda = sample_lambda(aug.beta, rng);
    }
    s.lambdas.push_back(lambda);
    const LabelDistribution target = mix_labels(train.label(i), train.label(j), lambda);
    if (aug.mixes_inputs()) {
      if (shuffle) {
        const Graph& b = train.graph(j);
        const auto perm = rng.permutation(static_cast<std::size_t>(b.num_nodes()));
        s.storage.push_back(mix_pair(train.graph(i), permute_nodes(b, perm), lambda));
      } else {
        s.storage.push_back(mix_pair(train.graph(i), train.graph(j), lambda));
      }
      s.items.push_back({&s.storage.back(), nullptr, 1.0, 0, target});
    } else {
      int layer = 0;
      if (aug.kind == AugmentKind::manifold_mixup) {
        layer = aug.mix_layer > 0 ? aug.mix_layer : draw_mix_layer(cfg.model, rng);
      }
      s.items.push_back({&train.graph(i), &train.graph(j), lambda, layer, target});
    }
  }
  return s;
}

TrainResult train_single(const GraphDataset& train, const GraphDataset& val, const TrainConfig& cfg, Rng& rng,
                         const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.size() == 0) throw std::invalid_argument("train_single: empty training split");
  TrainResult r;
  r.params = init_params(cfg.model, train.feature_dim, train.num_classes, rng);
  AdamState state;
  Rng* dropout_rng = cfg.model.dropout > 0.0 ? &rng : nullptr;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const EpochStream stream = build_epoch(train, cfg, rng);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr_at_epoch(cfg.lr0, epoch);
    double total = 0.0;
    for (std::size_t start = 0; start < stream.items.size(); start += bs) {
      const std::size_t len = std::min(bs, stream.items.size() - start);
      const auto batch = std::span<const BatchItem>(stream.items).subspan(start, len);
      const GradientResult g = model_gradients(batch, r.params, cfg.model, dropout_rng);
      total += g.loss * static_cast<double>(len);
      adamw_step(r.params, g.grads, state, rec.lr, cfg.weight_decay);
    }
    rec.train_loss = total / static_cast<double>(stream.items.size());
    if (val.size() > 0) rec.val_acc = accuracy(val, r.params, cfg.model);
    r.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  r.train_acc = accuracy(train, r.params, cfg.model);
  r.val_acc = val.size() > 0 ? r.epochs.back().val_acc : std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::vector<std::vector<std::size_t>> stratified_folds(const GraphDataset& ds, int folds, Rng& rng) {
  if (folds < 1) throw std::invalid_argument("folds must be positive");
  if (ds.size() < static_cast<std::size_t>(folds)) {
    throw std::invalid_argument(ds.name + ": " + std::to_string(ds.size()) + " samples for " + std::to_string(folds) +
                                " folds");
  }
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(std::max<Index>(ds.num_classes, 1)));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto c = static_cast<std::size_t>(ds.class_of(i));
    if (c >= by_class.size()) by_class.resize(c + 1);
    by_class[c].push_back(i);
  }
  std::vector<std::size_t> dealt;
  for (auto& members : by_class) {
    const auto perm = rng.permutation(members.size());
    for (std::size_t k : perm) dealt.push_back(members[k]);
  }
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
  for (std::size_t t = 0; t < dealt.size(); ++t) out[t % out.size()].push_back(dealt[t]);
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double std_of(std::span<const double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

CvResult cross_validate(const GraphDataset& ds, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  CvResult r;
  r.dataset = ds.name;
  for (int run = 0; run < cfg.runs; ++run) {
    Rng split_rng = Rng::derive(cfg.seed, {static_cast<std::uint64_t>(run), 0xF01DULL});
    const auto folds = stratified_folds(ds, cfg.folds, split_rng);
    std::vector<double> accs;
    for (int f = 0; f < cfg.folds; ++f) {
      const auto& val_idx = folds[static_cast<std::size_t>(f)];
      std::vector<std::size_t> train_idx;
      for (int g = 0; g < cfg.folds; ++g) {
        if (g != f) train_idx.insert(train_idx.end(), folds[static_cast<std::size_t>(g)].begin(), folds[static_cast<std::size_t>(g)].end());
      }
      std::sort(train_idx.begin(), train_idx.end());
      Rng rng = Rng::derive(cfg.seed, {static_cast<std::uint64_t>(run), static_cast<std::uint64_t>(f)});
      const TrainResult t = train_single(ds.subset(train_idx), ds.subset(val_idx), cfg, rng, on_epoch);
      r.folds.push_back({run, f, t.val_acc, t.train_acc, t.epochs});
      accs.push_back(t.val_acc);
    }
    r.run_means.push_back(mean_of(accs));
  }
  r.mean = mean_of(r.run_means);
  r.std = std_of(r.run_means);

  r.curve.resize(static_cast<std::size_t>(cfg.epochs));
  for (std::size_t e = 0; e < r.curve.size(); ++e) {
    EpochRecord& rec = r.curve[e];
    rec.epoch = static_cast<int>(e);
    rec.lr = lr_at_epoch(cfg.lr0, rec.epoch);
    double loss = 0.0, acc = 0.0;
    for (const auto& f : r.folds) {
      loss += f.epochs[e].train_loss;
      acc += f.epochs[e].val_acc;
    }
    rec.train_loss = loss / static_cast<double>(r.folds.size());
    rec.val_acc = acc / static_cast<double>(r.folds.size());
    if (e == 0 || rec.val_acc > r.best_epoch_acc) {
      r.best_epoch = rec.epoch;
      r.best_epoch_acc = rec.val_acc;
    }
  }
  return r;
}

SweepAxis parse_sweep_axis(const std::string& s) {
  if (s == "beta") return SweepAxis::beta;
  if (s == "layers") return SweepAxis::layers;
  throw std::invalid_argument("unknown sweep axis '" + s + "' (expected beta or layers)");
}

std::string to_string(SweepAxis a) { return a == SweepAxis::beta ? "beta" : "layers"; }

std::vector<BetaParams> default_sweep_betas() { return {{1, 1}, {2, 2}, {5, 1}, {10, 1}, {20, 1}}; }

std::vector<SweepRow> run_sweep(const GraphDataset& ds, const TrainConfig& cfg, SweepAxis axis,
                                const std::vector<BetaParams>& betas, const std::vector<int>& depths) {
  std::vector<SweepRow> rows;
  auto run = [&](const TrainConfig& c, std::string method, std::string setting) {
    const CvResult r = cross_validate(ds, c, {});
    rows.push_back({ds.name, std::move(method), std::move(setting), r.mean, r.std});
  };
  auto with_kind = [&](AugmentKind k) {
    TrainConfig c = cfg;
    c.augment.kind = k;
    return c;
  };
  if (axis == SweepAxis::beta) {
    for (const auto& b : betas) {
      for (auto k : {AugmentKind::mixup_graph, AugmentKind::if_mixup}) {
        TrainConfig c = with_kind(k);
        c.augment.beta = b;
        run(c, to_string(k), b.label());
      }
    }
    return rows;
  }
  for (int depth : depths) {
    const std::string setting = "K=" + std::to_string(depth);
    for (auto k : {AugmentKind::none, AugmentKind::mixup_graph, AugmentKind::if_mixup}) {
      TrainConfig c = with_kind(k);
      c.model.layers = depth;
      run(c, k == AugmentKind::none ? "baseline" : to_string(k), setting);
    }
  }
  return rows;
}

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  // Shortest text that parses back to the same double.
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& s : out) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }
  return out;
}

} // namespace

std::string sweep_to_csv(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << "dataset,method,setting,mean,std\n";
  for (const auto& r : rows) os << r.dataset << ',' << r.method << ',' << r.setting << ',' << fmt(r.mean) << ',' << fmt(r.std) << '\n';
  return os.str();
}

std::string metrics_to_csv(std::span<const EpochRecord> epochs) {
  std::ostringstream os;
  os << "epoch,train_loss,val_acc\n";
  for (const auto& e : epochs) os << e.epoch << ',' << fmt(e.train_loss) << ',' << fmt(e.val_acc) << '\n';
  return os.str();
}

std::vector<EpochRecord> metrics_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("metrics CSV is empty");
  const auto header = split_csv(line);
  auto col = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("metrics CSV line 1: missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ce = col("epoch"), cl = col("train_loss"), ca = col("val_acc");
  std::vector<EpochRecord> out;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) {
      throw std::runtime_error("metrics CSV line " + std::to_string(n) + ": expected " + std::to_string(header.size()) +
                               " fields, got " + std::to_string(f.size()));
    }
    auto num = [&](std::size_t c) {
      char* end = nullptr;
      const double v = std::strtod(f[c].c_str(), &end);
      if (f[c].empty() || end != f[c].c_str() + f[c].size()) {
        throw std::runtime_error("metrics CSV line " + std::to_string(n) + ": bad number '" + f[c] + "'");
      }
      return v;
    };
    EpochRecord r;
    r.epoch = static_cast<int>(num(ce));
    r.train_loss = num(cl);
    r.val_acc = num(ca);
    out.push_back(r);
  }
  return out;
}

std::string cv_summary_json(const CvResult& r, const TrainConfig& cfg) {
  auto num = [](double x) { return std::isnan(x) ? OrderedJson(nullptr) : OrderedJson(x); };
  OrderedJson j;
  j["dataset"] = r.dataset;
  j["mean"] = num(r.mean);
  j["std"] = num(r.std);
  j["run_means"] = OrderedJson::array();
  for (double m : r.run_means) j["run_means"].push_back(num(m));
  j["best_epoch"] = r.best_epoch;
  j["best_epoch_acc"] = num(r.best_epoch_acc);
  j["folds"] = OrderedJson::array();
  for (const auto& f : r.folds) {
    j["folds"].push_back({{"run", f.run}, {"fold", f.fold}, {"val_acc", num(f.val_acc)}, {"train_acc", num(f.train_acc)}});
  }
  j["config"] = train_config_to_json(cfg);
  return j.dump(2);
}

std::vector<TrainConfig> expand_grid(const TrainConfig& base, const HyperGrid& grid) {
  std::vector<TrainConfig> out;
  const bool drops = base.augment.drops();
  const bool mixes = base.augment.mixes_inputs() || base.augment.mixes_representations();
  const std::vector<double> ratios = drops ? grid.drop_ratio : std::vector<double>{base.augment.ratio};
  const std::vector<BetaParams> betas = mixes ? grid.beta : std::vector<BetaParams>{base.augment.beta};
  for (double lr : grid.lr0)
    for (int h : grid.hidden)
      for (int bs : grid.batch_size)
        for (double dr : grid.dropout)
          for (int k : grid.layers)
            for (double ratio : ratios)
              for (const auto& b : betas) {
                TrainConfig c = base;
                c.lr0 = lr;
                c.model.hidden = h;
                c.batch_size = bs;
                c.model.dropout = dr;
                c.model.layers = k;
                c.augment.ratio = ratio;
                c.augment.beta = b;
                out.push_back(c);
              }
  return out;
}

} // namespace ifmix
