#pragma once

// Inverting a mixed graph back into its two sources.
//
// A mixed edge matrix built from two binary matrices only holds values in
// {0, lambda, 1 - lambda, 1}; clustering those values recovers lambda (up to
// the swap lambda <-> 1 - lambda) and both binary matrices. Node features are
// then decomposed row by row, either directly over a linearly independent
// vocabulary V, or through coefficient matrices T over a basis of SPAN(V)
// when the set of T matrices is itself linearly independent.

#include "ifmix/graph.hpp"
#include "ifmix/mixer.hpp"
#include "ifmix/rng.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ifmix {

/// Raised when a mixed graph cannot be decomposed as a mix of valid sources.
class RecoveryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using NodePair = std::pair<Index, Index>;

/// Ordered off-diagonal node pairs split by (e, e') values.
struct EdgePartition {
  std::vector<NodePair> m00;
  std::vector<NodePair> m01;
  std::vector<NodePair> m10;
  std::vector<NodePair> m11;
};

struct EdgeSolution {
  std::optional<double> s; ///< empty when the sources are identical
  Matrix e;
  Matrix e_prime;
  EdgePartition partition;
};

struct EdgeRecovery {
  /// Two mirrored solutions, the first with s < 0.5; or one degenerate
  /// solution with e == e' when the mixed matrix is already binary.
  std::vector<EdgeSolution> solutions;
  bool degenerate = false;
};

EdgeRecovery edge_solutions(const Matrix& mixed, double tol = 1e-9);

struct FeaturePair {
  Matrix v;
  Matrix v_prime;
};

/// Row-wise decomposition of `mixed` = s * v + (1 - s) * v' with rows of v, v'
/// drawn from V* = V + {0}. `vocabulary` holds V as rows and must be linearly
/// independent.
FeaturePair recover_features_independent(const Matrix& mixed, double s, const Matrix& vocabulary,
                                         double tol = 1e-9);

/// Decomposition through coefficient matrices: projects `mixed` onto the
/// basis and searches the coefficient set for the unique (T, T') pair.
FeaturePair recover_features_basis(const Matrix& mixed, double s, const FeatureBasis& basis,
                                   double tol = 1e-9);

enum class RecoveryMode { independent, basis };

std::string to_string(RecoveryMode mode);

struct RecoveredPair {
  Graph a;
  Graph b;
  /// Weight of `a` in the mix. Empty when both sources are identical, in
  /// which case every ratio reproduces the mixed graph.
  std::optional<double> lambda;

  bool sources_identical() const { return !lambda.has_value(); }
  /// The same decomposition listed the other way round.
  RecoveredPair swapped() const;
};

/// Recovers lambda and both source graphs, trailing dummy nodes removed.
/// The canonical orientation reports lambda < 0.5.
RecoveredPair recover_pair(const Graph& mixed, const FeatureBasis& basis, RecoveryMode mode,
                           double tol = 1e-9);

struct AuditOptions {
  double tol = 1e-9;
  /// Ratios closer than this to 0.5, 0 or 1 are redrawn before mixing.
  double ratio_margin = 1e-6;
};

struct AuditReport {
  std::string dataset;
  bool assumption_satisfied = false;
  std::string mode; ///< "independent", "basis" or "none"
  std::string assumption_detail;
  std::size_t trials = 0;
  std::size_t collisions = 0;
  std::size_t recovery_failures = 0;
  std::size_t identical_pairs = 0;
  std::optional<std::string> first_failure;
};

AuditReport intrusion_audit(const GraphDataset& ds, std::size_t trials, const BetaParams& params,
                            Rng& rng, const AuditOptions& options = {});

std::string to_json(const AuditReport& report);

} // namespace ifmix
