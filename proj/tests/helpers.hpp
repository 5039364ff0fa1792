#pragma once

#include "ifmix/graph.hpp"
#include "ifmix/rng.hpp"

#include <filesystem>
#include <string>

namespace testing {

using namespace ifmix;

inline std::filesystem::path data_dir() { return IFMIX_DATA_DIR; }
inline bool have_mutag() { return std::filesystem::exists(data_dir() / "MUTAG" / "MUTAG_A.txt"); }

/// Random symmetric binary graph with one-hot rows over d types.
inline Graph random_binary_graph(Rng& rng, Index n, Index d, double p = 0.4) {
  Graph g = make_graph(n, d);
  for (Index i = 0; i < n; ++i) {
    g.features(i, static_cast<Index>(rng.index(static_cast<std::size_t>(d)))) = 1.0;
    for (Index j = i + 1; j < n; ++j) {
      if (rng.uniform() < p) g.weights(i, j) = g.weights(j, i) = 1.0;
    }
  }
  return g;
}

/// Random weighted graph with dense real features, for model tests.
inline Graph random_weighted_graph(Rng& rng, Index n, Index d) {
  Graph g = make_graph(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < d; ++c) g.features(i, c) = rng.uniform();
    for (Index j = i + 1; j < n; ++j) {
      if (rng.uniform() < 0.5) g.weights(i, j) = g.weights(j, i) = rng.uniform();
    }
  }
  return g;
}

/// Temporary directory removed on scope exit.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("ifmix_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

} // namespace testing
