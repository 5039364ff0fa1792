#pragma once

#include "ifmix/graph.hpp"
#include "ifmix/rng.hpp"

#include <cstddef>
#include <string>
#include <utility>

namespace ifmix {

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;

  /// Throws std::invalid_argument unless both shape parameters are positive.
  void validate() const;
  double mean() const { return alpha / (alpha + beta); }
  /// "Beta(a;b)", comma-free so it can sit in a CSV cell.
  std::string label() const;
};

/// lambda * a + (1 - lambda) * b, evaluated as a - (1 - lambda) * (a - b) so
/// that equal inputs and lambda == 1 both return `a` bit for bit.
template <class T>
T interpolate(const T& a, const T& b, double lambda) {
  return a - (1.0 - lambda) * (a - b);
}

/// One draw of the mixing ratio from Beta(alpha, beta), built from two gamma
/// draws. Exact 0 or 1 is rejected and redrawn.
double sample_lambda(const BetaParams& params, Rng& rng);

/// Density of Beta(alpha, beta) at x in [0, 1].
double beta_pdf(const BetaParams& params, double x);

/// Pads the pair to a common node count, then takes the convex combination
/// of edge weights and node features with weight lambda on `a`.
Graph mix_pair(const Graph& a, const Graph& b, double lambda);

LabelDistribution mix_labels(const LabelDistribution& a, const LabelDistribution& b, double lambda);

struct MixedSample {
  Graph graph;
  LabelDistribution label;
  double lambda = 0.0;
  std::pair<std::size_t, std::size_t> source_ids{0, 0};
};

MixedSample mix_samples(const GraphDataset& ds, std::size_t i, std::size_t j, double lambda);

} // namespace ifmix
