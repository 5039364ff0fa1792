#pragma once

// JSON configuration documents. Every section is merged onto defaults and
// unknown keys are rejected with the offending key path in the message.

#include "ifmix/trainer.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace ifmix {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

OrderedJson model_config_to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const Json& j, ModelConfig base = {});

OrderedJson augment_to_json(const AugmentSpec& a);
AugmentSpec augment_from_json(const Json& j, AugmentSpec base = {});

OrderedJson train_config_to_json(const TrainConfig& c);

struct DatasetSection {
  std::string dir;
  std::string name;
  std::string features = "auto";
  std::size_t limit = 0; ///< keep only the first `limit` graphs when positive
};

struct RunConfig {
  DatasetSection dataset;
  TrainConfig train;
  std::string output_dir = "out";
  double val_fraction = 0.1; ///< holdout share for the `train` command
};

RunConfig run_config_from_json(const Json& j);
RunConfig load_run_config(const std::filesystem::path& path);
OrderedJson run_config_to_json(const RunConfig& c);

} // namespace ifmix
