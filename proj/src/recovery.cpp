#include "ifmix/recovery.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ifmix {

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// Builds one solution given the ratio s of the `e` side.
EdgeSolution make_edge_solution(const Matrix& mixed, double s, double tol) {
  const Index n = mixed.rows();
  EdgeSolution sol;
  sol.s = s;
  sol.e = Matrix::Zero(n, n);
  sol.e_prime = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double x = mixed(i, j);
      if (near(x, 0.0, tol)) {
        sol.partition.m00.emplace_back(i, j);
      } else if (near(x, 1.0, tol)) {
        sol.e(i, j) = sol.e_prime(i, j) = 1.0;
        sol.partition.m11.emplace_back(i, j);
      } else if (std::abs(x - s) <= std::abs(x - (1.0 - s))) {
        sol.e(i, j) = 1.0;
        sol.partition.m10.emplace_back(i, j);
      } else {
        sol.e_prime(i, j) = 1.0;
        sol.partition.m01.emplace_back(i, j);
      }
    }
  }
  return sol;
}

// Coordinates of each row of `v` in the rows of `vocab` (assumed independent).
Matrix vocabulary_coordinates(const Matrix& v, const Matrix& vocab, double tol) {
  if (v.cols() != vocab.cols()) {
    throw std::invalid_argument("feature dimension mismatch: " + std::to_string(v.cols()) +
                                " vs vocabulary " + std::to_string(vocab.cols()));
  }
  if (vocab.rows() == 0) {
    if (v.size() > 0 && v.cwiseAbs().maxCoeff() > tol) {
      throw RecoveryError("nonzero feature row but the vocabulary is empty");
    }
    return Matrix::Zero(v.rows(), 0);
  }
  const Matrix gram = vocab * vocab.transpose();
  Matrix c = gram.ldlt().solve(vocab * v.transpose()).transpose();
  for (Index i = 0; i < v.rows(); ++i) {
    const double r = (c.row(i) * vocab - v.row(i)).cwiseAbs().maxCoeff();
    if (r > tol) {
      throw RecoveryError("row " + std::to_string(i) + " is not a mix over the vocabulary (residual " +
                          fmt(r) + ")");
    }
  }
  return c;
}

struct RowTerms {
  std::vector<std::pair<Index, double>> terms; // (vocabulary index, coefficient)
};

std::vector<RowTerms> split_rows(const Matrix& coords, double tol) {
  std::vector<RowTerms> rows(static_cast<std::size_t>(coords.rows()));
  for (Index i = 0; i < coords.rows(); ++i) {
    for (Index k = 0; k < coords.cols(); ++k) {
      if (std::abs(coords(i, k)) > tol) rows[static_cast<std::size_t>(i)].terms.emplace_back(k, coords(i, k));
    }
  }
  return rows;
}

// Ratio implied by the feature rows alone, canonicalised below 0.5. Empty
// when every row is a plain vocabulary element or zero.
std::optional<double> infer_ratio_independent(const std::vector<RowTerms>& rows, double tol) {
  std::optional<double> s;
  auto offer = [&](double c, Index row) {
    const double low = std::min(c, 1.0 - c);
    if (!(low > tol)) {
      throw RecoveryError("row " + std::to_string(row) + " has coefficient " + fmt(c) +
                          " outside (0, 1)");
    }
    if (!s) {
      s = low;
    } else if (!near(*s, low, tol)) {
      throw RecoveryError("inconsistent mixing ratios implied by feature rows: " + fmt(*s) + " vs " +
                          fmt(low));
    }
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& t = rows[i].terms;
    if (t.size() == 1 && !near(t[0].second, 1.0, tol)) {
      offer(t[0].second, static_cast<Index>(i));
    } else if (t.size() == 2) {
      if (!near(t[0].second + t[1].second, 1.0, 2 * tol)) {
        throw RecoveryError("row " + std::to_string(i) + " coefficients do not sum to 1");
      }
      offer(t[0].second, static_cast<Index>(i));
    } else if (t.size() > 2) {
      throw RecoveryError("row " + std::to_string(i) + " mixes more than two vocabulary vectors");
    }
  }
  return s;
}

Matrix pad_rows(const Matrix& t, Index n) {
  Matrix out = Matrix::Zero(n, t.cols());
  out.topRows(t.rows()) = t;
  return out;
}

std::vector<Matrix> distinct_coefficients(const FeatureBasis& basis, Index max_rows) {
  std::vector<Matrix> out;
  for (const auto& t : basis.coefficients) {
    if (t.rows() > max_rows) continue;
    const bool dup = std::any_of(out.begin(), out.end(), [&](const Matrix& u) {
      return u.rows() == t.rows() && u == t;
    });
    if (!dup) out.push_back(t);
  }
  return out;
}

struct BasisMatch {
  Matrix t;
  Matrix t_prime;
  std::optional<double> s;
};

// Exhaustive search over the coefficient set. With `s` unset the ratio is
// solved per candidate pair by least squares along T - T'.
std::vector<BasisMatch> search_coefficient_pairs(const Matrix& mixed_t, std::optional<double> s,
                                                 const FeatureBasis& basis, double tol) {
  const Index n = mixed_t.rows();
  const auto candidates = distinct_coefficients(basis, n);
  std::vector<Matrix> padded;
  padded.reserve(candidates.size());
  for (const auto& t : candidates) padded.push_back(pad_rows(t, n));

  std::vector<BasisMatch> matches;
  for (std::size_t p = 0; p < candidates.size(); ++p) {
    for (std::size_t q = 0; q < candidates.size(); ++q) {
      if (std::max(candidates[p].rows(), candidates[q].rows()) != n) continue;
      const Matrix& t = padded[p];
      const Matrix& tp = padded[q];
      if (s) {
        const Matrix combo = tp + *s * (t - tp);
        if ((combo - mixed_t).cwiseAbs().maxCoeff() <= tol) {
          matches.push_back({t, tp, s});
        }
        continue;
      }
      if (p == q) {
        if ((t - mixed_t).cwiseAbs().maxCoeff() <= tol) matches.push_back({t, tp, std::nullopt});
        continue;
      }
      if (q < p) continue; // unordered: orientation fixed below
      const Matrix diff = t - tp;
      const double denom = diff.squaredNorm();
      if (denom == 0.0) continue;
      const double ratio = (mixed_t - tp).cwiseProduct(diff).sum() / denom;
      if (!(ratio > tol && ratio < 1.0 - tol)) continue;
      const Matrix combo = tp + ratio * diff;
      if ((combo - mixed_t).cwiseAbs().maxCoeff() > tol) continue;
      if (ratio < 0.5) {
        matches.push_back({t, tp, ratio});
      } else {
        matches.push_back({tp, t, 1.0 - ratio});
      }
    }
  }
  return matches;
}

Graph strip_dummies(Graph g) {
  Index n = g.num_nodes();
  while (n > 1 && (g.features.row(n - 1).array() == 0.0).all() &&
         (g.weights.row(n - 1).head(n).array() == 0.0).all()) {
    --n;
  }
  if (n == g.num_nodes()) return g;
  Graph out(g.features.topRows(n), g.weights.topLeftCorner(n, n));
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

bool same_graph(const Graph& a, const Graph& b, double feature_tol) {
  return a.weights.rows() == b.weights.rows() && a.weights == b.weights &&
         max_abs_diff(a.features, b.features) <= feature_tol;
}

} // namespace

EdgeRecovery edge_solutions(const Matrix& mixed, double tol) {
  const Index n = mixed.rows();
  if (mixed.cols() != n) throw std::invalid_argument("edge matrix is not square");
  std::vector<double> clusters;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double x = mixed(i, j);
      if (!near(x, mixed(j, i), tol)) {
        throw std::invalid_argument("edge matrix asymmetric at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      }
      if (!(x >= -tol && x <= 1.0 + tol)) {
        throw RecoveryError("edge weight " + fmt(x) + " outside [0, 1]");
      }
      if (near(x, 0.0, tol) || near(x, 1.0, tol)) continue;
      const bool known = std::any_of(clusters.begin(), clusters.end(),
                                     [&](double c) { return near(c, x, tol); });
      if (!known) clusters.push_back(x);
      if (clusters.size() > 2) {
        throw RecoveryError("more than 4 distinct edge values; not a mix of two binary graphs");
      }
    }
  }

  EdgeRecovery out;
  if (clusters.empty()) {
    out.degenerate = true;
    EdgeSolution sol = make_edge_solution(mixed, 0.5, tol);
    sol.s.reset();
    out.solutions.push_back(std::move(sol));
    return out;
  }
  if (clusters.size() == 2 && !near(clusters[0] + clusters[1], 1.0, 2 * tol)) {
    throw RecoveryError("edge values " + fmt(clusters[0]) + " and " + fmt(clusters[1]) +
                        " are not of the form lambda, 1 - lambda");
  }
  // Prefer an observed value below one half so the ratio is taken verbatim.
  double low = 1.0 - clusters[0];
  for (double c : clusters) {
    if (c < 0.5) low = c;
  }
  if (std::abs(low - 0.5) < tol) {
    throw RecoveryError("indistinguishable mixing ratio: lambda is within tolerance of 0.5");
  }
  out.solutions.push_back(make_edge_solution(mixed, low, tol));
  EdgeSolution mirror = make_edge_solution(mixed, 1.0 - low, tol);
  out.solutions.push_back(std::move(mirror));
  return out;
}

FeaturePair recover_features_independent(const Matrix& mixed, double s, const Matrix& vocabulary,
                                         double tol) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("mixing ratio " + fmt(s) + " outside (0, 1)");
  if (!check_linear_independence(vocabulary).independent) {
    throw RecoveryError("assumption violated: feature vocabulary is linearly dependent");
  }
  const Matrix coords = vocabulary_coordinates(mixed, vocabulary, tol);
  const auto rows = split_rows(coords, tol);
  const double t = 1.0 - s;
  const bool symmetric_ratio = near(s, t, tol);

  FeaturePair out{Matrix::Zero(mixed.rows(), mixed.cols()), Matrix::Zero(mixed.rows(), mixed.cols())};
  for (Index i = 0; i < mixed.rows(); ++i) {
    const auto& terms = rows[static_cast<std::size_t>(i)].terms;
    auto fail = [&](const std::string& why) {
      throw RecoveryError("row " + std::to_string(i) + ": " + why);
    };
    if (terms.empty()) continue; // zero row: both sources are zero
    if (terms.size() == 1) {
      const auto [k, c] = terms[0];
      if (near(c, 1.0, tol)) {
        out.v.row(i) = out.v_prime.row(i) = vocabulary.row(k);
      } else if (symmetric_ratio && near(c, s, tol)) {
        fail("ambiguous: ratio 0.5 cannot tell which source holds the node");
      } else if (near(c, s, tol)) {
        out.v.row(i) = vocabulary.row(k);
      } else if (near(c, t, tol)) {
        out.v_prime.row(i) = vocabulary.row(k);
      } else {
        fail("coefficient " + fmt(c) + " matches neither s nor 1 - s");
      }
      continue;
    }
    if (terms.size() == 2) {
      const auto [k1, c1] = terms[0];
      const auto [k2, c2] = terms[1];
      const bool forward = near(c1, s, tol) && near(c2, t, tol);
      const bool backward = near(c1, t, tol) && near(c2, s, tol);
      if (forward && backward) fail("ambiguous: ratio 0.5 cannot order the two sources");
      if (forward) {
        out.v.row(i) = vocabulary.row(k1);
        out.v_prime.row(i) = vocabulary.row(k2);
      } else if (backward) {
        out.v.row(i) = vocabulary.row(k2);
        out.v_prime.row(i) = vocabulary.row(k1);
      } else {
        fail("coefficients (" + fmt(c1) + ", " + fmt(c2) + ") are not (s, 1 - s)");
      }
      continue;
    }
    fail("mixes more than two vocabulary vectors");
  }
  return out;
}

FeaturePair recover_features_basis(const Matrix& mixed, double s, const FeatureBasis& basis, double tol) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("mixing ratio " + fmt(s) + " outside (0, 1)");
  Matrix mixed_t;
  try {
    mixed_t = basis.coordinates(mixed, tol);
  } catch (const std::domain_error& e) {
    throw RecoveryError(e.what());
  }
  const auto matches = search_coefficient_pairs(mixed_t, s, basis, tol);
  if (matches.empty()) throw RecoveryError("no coefficient pair in the training set reproduces the mix");
  for (std::size_t k = 1; k < matches.size(); ++k) {
    if (matches[k].t != matches[0].t || matches[k].t_prime != matches[0].t_prime) {
      throw RecoveryError("several coefficient pairs reproduce the mix; coefficient set is dependent");
    }
  }
  return {matches[0].t * basis.basis, matches[0].t_prime * basis.basis};
}

std::string to_string(RecoveryMode mode) {
  return mode == RecoveryMode::independent ? "independent" : "basis";
}

RecoveredPair RecoveredPair::swapped() const {
  RecoveredPair out{b, a, std::nullopt};
  if (lambda) out.lambda = 1.0 - *lambda;
  return out;
}

RecoveredPair recover_pair(const Graph& mixed, const FeatureBasis& basis, RecoveryMode mode, double tol) {
  const auto report = validate_graph(mixed);
  if (!report.ok()) throw std::invalid_argument("mixed graph invalid: " + report.violations.front());
  if (mixed.feature_dim() != basis.dim()) {
    throw std::invalid_argument("feature dimension mismatch: graph " + std::to_string(mixed.feature_dim()) +
                                " vs basis " + std::to_string(basis.dim()));
  }

  const EdgeRecovery edges = edge_solutions(mixed.weights, tol);
  const EdgeSolution& sol = edges.solutions.front();
  std::optional<double> s = sol.s;

  FeaturePair feats;
  if (mode == RecoveryMode::independent) {
    if (!check_linear_independence(basis.vocabulary).independent) {
      throw RecoveryError("assumption violated: feature vocabulary is linearly dependent");
    }
    if (!s) {
      const Matrix coords = vocabulary_coordinates(mixed.features, basis.vocabulary, tol);
      s = infer_ratio_independent(split_rows(coords, tol), tol);
    }
    if (s) {
      feats = recover_features_independent(mixed.features, *s, basis.vocabulary, tol);
    } else {
      // Every row is a vocabulary element or zero: identical sources.
      const Matrix coords = vocabulary_coordinates(mixed.features, basis.vocabulary, tol);
      Matrix snapped = (coords.array().abs() > tol).select(Matrix::Ones(coords.rows(), coords.cols()), 0.0);
      feats.v = feats.v_prime = snapped * basis.vocabulary;
    }
  } else {
    if (!check_coefficient_independence(basis).independent) {
      throw RecoveryError("assumption violated: coefficient matrices are linearly dependent");
    }
    if (s) {
      feats = recover_features_basis(mixed.features, *s, basis, tol);
    } else {
      Matrix mixed_t;
      try {
        mixed_t = basis.coordinates(mixed.features, tol);
      } catch (const std::domain_error& e) {
        throw RecoveryError(e.what());
      }
      const auto matches = search_coefficient_pairs(mixed_t, std::nullopt, basis, tol);
      if (matches.size() != 1) {
        throw RecoveryError(matches.empty() ? "no coefficient pair in the training set reproduces the mix"
                                            : "several coefficient pairs reproduce the mix");
      }
      s = matches[0].s;
      feats = {matches[0].t * basis.basis, matches[0].t_prime * basis.basis};
    }
  }

  if (s && std::abs(*s - 0.5) < tol) {
    throw RecoveryError("indistinguishable mixing ratio: lambda is within tolerance of 0.5");
  }

  RecoveredPair out;
  out.a = strip_dummies(Graph(feats.v, sol.e));
  out.b = strip_dummies(Graph(feats.v_prime, sol.e_prime));
  out.lambda = s;

  // Re-mixing must reproduce the input.
  const Index n = mixed.num_nodes();
  const Graph pa = pad_to(out.a, n);
  const Graph pb = pad_to(out.b, n);
  const double w = s.value_or(0.5);
  const double err = std::max(max_abs_diff(interpolate(pa.weights, pb.weights, w), mixed.weights),
                              max_abs_diff(interpolate(pa.features, pb.features, w), mixed.features));
  if (!(err <= std::max(tol, 1e-9))) {
    throw RecoveryError("inconsistent edge/feature recoveries: re-mixing differs by " + fmt(err));
  }
  return out;
}

AuditReport intrusion_audit(const GraphDataset& ds, std::size_t trials, const BetaParams& params, Rng& rng,
                            const AuditOptions& options) {
  params.validate();
  AuditReport report;
  report.dataset = ds.name;
  if (ds.size() == 0) throw std::invalid_argument("intrusion_audit: empty dataset");

  const FeatureBasis basis = feature_vocabulary(ds);
  RecoveryMode mode;
  const auto vocab_check = check_linear_independence(basis.vocabulary);
  if (vocab_check.independent) {
    mode = RecoveryMode::independent;
    report.assumption_detail = "vocabulary of " + std::to_string(basis.vocabulary.rows()) +
                               " vectors is linearly independent";
  } else {
    const auto coeff_check = check_coefficient_independence(basis);
    if (!coeff_check.independent) {
      report.mode = "none";
      report.assumption_detail = "assumption violated: vocabulary rank " + std::to_string(vocab_check.rank) +
                                 " < " + std::to_string(basis.vocabulary.rows()) +
                                 " and coefficient matrices are dependent";
      return report;
    }
    mode = RecoveryMode::basis;
    report.assumption_detail = "vocabulary dependent; coefficient matrices linearly independent";
  }
  report.assumption_satisfied = true;
  report.mode = to_string(mode);

  const double feature_tol = 1e-9;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const std::size_t i = rng.index(ds.size());
    const std::size_t j = rng.index(ds.size());
    double lambda;
    do {
      lambda = sample_lambda(params, rng);
    } while (std::abs(lambda - 0.5) < options.ratio_margin || lambda < options.ratio_margin ||
             lambda > 1.0 - options.ratio_margin);
    ++report.trials;

    const MixedSample mixed = mix_samples(ds, i, j, lambda);
    for (std::size_t k = 0; k < ds.size(); ++k) {
      if (ds.graph(k) == mixed.graph && ds.label(k).p != mixed.label.p) {
        ++report.collisions;
        if (!report.first_failure) {
          report.first_failure = "collision: mix of " + std::to_string(i) + " and " + std::to_string(j) +
                                 " with lambda " + fmt(lambda) + " equals graph " + std::to_string(k) +
                                 " of a different label";
        }
        break;
      }
    }

    const Graph& ga = ds.graph(i);
    const Graph& gb = ds.graph(j);
    if (same_graph(ga, gb, 0.0)) ++report.identical_pairs;
    std::string failure;
    try {
      const RecoveredPair rec = recover_pair(mixed.graph, basis, mode, options.tol);
      bool ok;
      if (rec.sources_identical()) {
        ok = same_graph(ga, gb, feature_tol) && same_graph(rec.a, ga, feature_tol) &&
             same_graph(rec.b, ga, feature_tol);
      } else {
        auto matches = [&](const RecoveredPair& r) {
          return same_graph(r.a, ga, feature_tol) && same_graph(r.b, gb, feature_tol) &&
                 std::abs(*r.lambda - lambda) <= feature_tol;
        };
        ok = matches(rec) || matches(rec.swapped());
      }
      if (!ok) failure = "recovered pair differs from the true sources";
    } catch (const RecoveryError& e) {
      failure = e.what();
    }
    if (!failure.empty()) {
      ++report.recovery_failures;
      if (!report.first_failure) {
        report.first_failure = "recovery: mix of " + std::to_string(i) + " and " + std::to_string(j) +
                               " with lambda " + fmt(lambda) + ": " + failure;
      }
    }
  }
  return report;
}

std::string to_json(const AuditReport& report) {
  nlohmann::ordered_json j;
  j["dataset"] = report.dataset;
  j["assumption_satisfied"] = report.assumption_satisfied;
  j["mode"] = report.mode;
  j["assumption_detail"] = report.assumption_detail;
  j["trials"] = report.trials;
  j["collisions"] = report.collisions;
  j["recovery_failures"] = report.recovery_failures;
  j["identical_pairs"] = report.identical_pairs;
  j["first_failure"] = report.first_failure ? nlohmann::ordered_json(*report.first_failure) : nullptr;
  return j.dump(2);
}

} // namespace ifmix
