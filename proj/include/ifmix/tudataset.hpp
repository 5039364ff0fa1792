#pragma once

// TUDataset plain-text format: NAME_A.txt (1-based edge list, one "i, j" per
// line), NAME_graph_indicator.txt (graph id per node), NAME_graph_labels.txt
// and, optionally, NAME_node_labels.txt.

#include "ifmix/graph.hpp"
#include "ifmix/mixer.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ifmix {

class ParseError : public std::runtime_error {
public:
  ParseError(const std::filesystem::path& file, std::size_t line, const std::string& what);

  const std::filesystem::path& file() const { return file_; }
  std::size_t line() const { return line_; } ///< 1-based; 0 when not tied to a line

private:
  std::filesystem::path file_;
  std::size_t line_;
};

struct TUDatasetFiles {
  std::filesystem::path dir;
  std::string name;

  std::filesystem::path file(const std::string& suffix) const { return dir / (name + "_" + suffix + ".txt"); }
  bool has_node_labels() const;
};

/// Topology and raw integer labels, before node features are encoded.
struct ParsedDataset {
  std::string name;
  std::vector<Matrix> adjacency;              ///< symmetric binary, zero diagonal
  std::vector<std::vector<long>> node_labels; ///< empty when the file is absent
  std::vector<long> graph_labels;             ///< raw values as written
  std::vector<long> class_values;             ///< sorted distinct raw graph labels

  std::size_t size() const { return adjacency.size(); }
  bool has_node_labels() const { return !node_labels.empty(); }
  Index class_index(std::size_t graph) const;
};

ParsedDataset parse_tudataset(const TUDatasetFiles& files);

/// Writes NAME_A, NAME_graph_indicator, NAME_graph_labels and, when present,
/// NAME_node_labels. Edges are written in both directions.
void write_tudataset(const ParsedDataset& ds, const TUDatasetFiles& files);

enum class FeatureMode { one_hot_labels, one_hot_degree };

std::string to_string(FeatureMode m);
/// "labels", "degree", or "auto" (labels when present, else degree).
FeatureMode parse_feature_mode(const std::string& s, const ParsedDataset& ds);

GraphDataset encode_node_features(const ParsedDataset& ds, FeatureMode mode);

/// Parse then encode in one step; `features` as for parse_feature_mode.
GraphDataset load_tudataset(const TUDatasetFiles& files, const std::string& features = "auto");

struct ReferenceStats {
  std::string name;
  std::size_t graphs;
  double mean_nodes;
  double mean_edges; ///< as listed; compared at half its value
  std::optional<Index> feature_dim;
  Index num_classes;
};

/// Published statistics of the eight benchmark datasets, when `name` is one.
std::optional<ReferenceStats> reference_stats(const std::string& name);

struct StatCheck {
  std::string field;
  double expected;
  double actual;
  double tolerance;
  bool pass;
};

struct DatasetStats {
  std::string name;
  DegreeStats stats;
  std::optional<ReferenceStats> reference;
  std::vector<StatCheck> checks;

  bool all_pass() const;
};

DatasetStats dataset_stats(const GraphDataset& ds);
std::string format_stats_text(const DatasetStats& s);
std::string stats_to_json(const DatasetStats& s);

// ---------------------------------------------------------------------------
// Mixed samples on disk: the TUDataset topology plus NAME_edge_weights.txt
// (one weight per A line), NAME_node_attributes.txt (one comma-separated
// feature row per node) and NAME_mix.json (ratio, mixed label, source ids and
// the feature vocabulary needed for recovery).

struct MixedSampleFile {
  MixedSample sample;
  Matrix vocabulary;
  std::string source_dir;
  std::string source_name;
  std::string feature_mode;
};

void write_mixed_sample(const MixedSampleFile& m, const TUDatasetFiles& files);
MixedSampleFile read_mixed_sample(const TUDatasetFiles& files);

} // namespace ifmix
