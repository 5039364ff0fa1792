#include "ifmix/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace ifmix {

namespace {

void reject_unknown(const Json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw std::invalid_argument("config section '" + section + "' must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!keys.count(it.key())) {
      throw std::invalid_argument("unknown config key '" + (section.empty() ? "" : section + ".") + it.key() + "'");
    }
  }
}

template <class T>
void read(const Json& j, const std::string& section, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument("config key '" + section + "." + key + "' has the wrong type");
  }
}

} // namespace

OrderedJson model_config_to_json(const ModelConfig& c) {
  OrderedJson j;
  j["arch"] = to_string(c.arch);
  j["layers"] = c.layers;
  j["hidden"] = c.hidden;
  j["dropout"] = c.dropout;
  j["readout"] = to_string(c.readout);
  j["gcn_skip"] = c.gcn_skip;
  j["gin_mlp_depth"] = c.gin_mlp_depth;
  j["bias"] = c.bias;
  return j;
}

ModelConfig model_config_from_json(const Json& j, ModelConfig c) {
  reject_unknown(j, "model", {"arch", "layers", "hidden", "dropout", "readout", "gcn_skip", "gin_mlp_depth", "bias"});
  std::string arch = to_string(c.arch), readout = to_string(c.readout);
  read(j, "model", "arch", arch);
  read(j, "model", "readout", readout);
  c.arch = parse_arch(arch);
  c.readout = parse_readout(readout);
  read(j, "model", "layers", c.layers);
  read(j, "model", "hidden", c.hidden);
  read(j, "model", "dropout", c.dropout);
  read(j, "model", "gcn_skip", c.gcn_skip);
  read(j, "model", "gin_mlp_depth", c.gin_mlp_depth);
  read(j, "model", "bias", c.bias);
  c.validate();
  return c;
}

OrderedJson augment_to_json(const AugmentSpec& a) {
  OrderedJson j;
  j["kind"] = to_string(a.kind);
  j["ratio"] = a.ratio;
  j["alpha"] = a.beta.alpha;
  j["beta"] = a.beta.beta;
  j["mix_layer"] = a.mix_layer;
  return j;
}

AugmentSpec augment_from_json(const Json& j, AugmentSpec a) {
  reject_unknown(j, "augment", {"kind", "ratio", "alpha", "beta", "mix_layer"});
  std::string kind = to_string(a.kind);
  read(j, "augment", "kind", kind);
  a.kind = parse_augment_kind(kind);
  read(j, "augment", "ratio", a.ratio);
  read(j, "augment", "alpha", a.beta.alpha);
  read(j, "augment", "beta", a.beta.beta);
  read(j, "augment", "mix_layer", a.mix_layer);
  a.validate();
  return a;
}

OrderedJson train_config_to_json(const TrainConfig& c) {
  OrderedJson j;
  j["model"] = model_config_to_json(c.model);
  j["augment"] = augment_to_json(c.augment);
  auto& t = j["train"];
  t["lr0"] = c.lr0;
  t["batch_size"] = c.batch_size;
  t["epochs"] = c.epochs;
  t["folds"] = c.folds;
  t["runs"] = c.runs;
  t["seed"] = c.seed;
  t["weight_decay"] = c.weight_decay;
  t["shuffle_nodes_before_mix"] = c.shuffle_nodes_before_mix;
  t["intrusion_guard"] = c.intrusion_guard;
  t["guard_tol"] = c.guard_tol;
  return j;
}

RunConfig run_config_from_json(const Json& j) {
  reject_unknown(j, "", {"dataset", "model", "augment", "train", "output"});
  RunConfig c;
  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    reject_unknown(d, "dataset", {"dir", "name", "features", "limit"});
    read(d, "dataset", "dir", c.dataset.dir);
    read(d, "dataset", "name", c.dataset.name);
    read(d, "dataset", "features", c.dataset.features);
    read(d, "dataset", "limit", c.dataset.limit);
  }
  if (j.contains("model")) c.train.model = model_config_from_json(j.at("model"), c.train.model);
  if (j.contains("augment")) c.train.augment = augment_from_json(j.at("augment"), c.train.augment);
  if (j.contains("train")) {
    const auto& t = j.at("train");
    reject_unknown(t, "train",
                   {"lr0", "batch_size", "epochs", "folds", "runs", "seed", "weight_decay",
                    "shuffle_nodes_before_mix", "intrusion_guard", "guard_tol", "val_fraction"});
    read(t, "train", "lr0", c.train.lr0);
    read(t, "train", "batch_size", c.train.batch_size);
    read(t, "train", "epochs", c.train.epochs);
    read(t, "train", "folds", c.train.folds);
    read(t, "train", "runs", c.train.runs);
    read(t, "train", "seed", c.train.seed);
    read(t, "train", "weight_decay", c.train.weight_decay);
    read(t, "train", "shuffle_nodes_before_mix", c.train.shuffle_nodes_before_mix);
    read(t, "train", "intrusion_guard", c.train.intrusion_guard);
    read(t, "train", "guard_tol", c.train.guard_tol);
    read(t, "train", "val_fraction", c.val_fraction);
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    reject_unknown(o, "output", {"dir"});
    read(o, "output", "dir", c.output_dir);
  }
  c.train.validate();
  if (!(c.val_fraction > 0.0 && c.val_fraction < 1.0)) throw std::invalid_argument("train.val_fraction must lie in (0, 1)");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

OrderedJson run_config_to_json(const RunConfig& c) {
  OrderedJson j;
  j["dataset"] = {{"dir", c.dataset.dir}, {"name", c.dataset.name}, {"features", c.dataset.features},
                  {"limit", c.dataset.limit}};
  const OrderedJson t = train_config_to_json(c.train);
  j["model"] = t["model"];
  j["augment"] = t["augment"];
  j["train"] = t["train"];
  j["train"]["val_fraction"] = c.val_fraction;
  j["output"] = {{"dir", c.output_dir}};
  return j;
}

} // namespace ifmix
