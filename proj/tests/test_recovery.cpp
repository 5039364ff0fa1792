#include "helpers.hpp"
#include "oracles.hpp"

#include "ifmix/recovery.hpp"
#include "ifmix/tudataset.hpp"

#include <doctest.h>

#include <functional>

using namespace ifmix;
using doctest::Approx;
using testing::random_binary_graph;

namespace {

const std::vector<double> kRatios{0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9};

bool contains_pair(const EdgePartition& p, const std::vector<NodePair>& set, NodePair x) {
  (void)p;
  return std::find(set.begin(), set.end(), x) != set.end();
}

FeatureBasis manual_basis(const Matrix& b, const std::vector<Matrix>& ts) {
  FeatureBasis fb;
  fb.basis = b;
  fb.coefficients = ts;
  std::vector<Graph> gs;
  for (const auto& t : ts) gs.emplace_back(t * b, Matrix::Zero(t.rows(), t.rows()));
  fb.vocabulary = feature_vocabulary(gs).vocabulary;
  return fb;
}

bool same_solution(const EdgeSolution& got, const oracle::EdgeCandidate& c) {
  return got.s && std::abs(*got.s - c.s) < 1e-9 && got.e == c.e && got.e_prime == c.e_prime;
}

} // namespace

TEST_CASE("edge_solutions on a single entry") {
  Matrix m{{0, 0.3}, {0.3, 0}};
  auto r = edge_solutions(m);
  REQUIRE(r.solutions.size() == 2);
  CHECK_FALSE(r.degenerate);
  CHECK(*r.solutions[0].s == Approx(0.3));
  CHECK(r.solutions[0].e(0, 1) == 1.0);
  CHECK(r.solutions[0].e_prime(0, 1) == 0.0);
  CHECK(*r.solutions[1].s == Approx(0.7));
  CHECK(r.solutions[1].e(0, 1) == 0.0);
  CHECK(r.solutions[1].e_prime(0, 1) == 1.0);
}

TEST_CASE("edge partition assigns every value class") {
  // (0,1)=0, (0,2)=0.3, (0,3)=0.7, (1,2)=1
  Matrix m = Matrix::Zero(4, 4);
  auto set = [&](Index i, Index j, double x) { m(i, j) = m(j, i) = x; };
  set(0, 2, 0.3);
  set(0, 3, 0.7);
  set(1, 2, 1.0);
  auto r = edge_solutions(m);
  REQUIRE(r.solutions.size() == 2);
  const EdgeSolution* sol = nullptr;
  for (const auto& s : r.solutions)
    if (std::abs(*s.s - 0.7) < 1e-12) sol = &s;
  REQUIRE(sol != nullptr);
  const auto& p = sol->partition;
  CHECK(contains_pair(p, p.m00, {0, 1}));
  CHECK(contains_pair(p, p.m01, {0, 2}));
  CHECK(contains_pair(p, p.m10, {0, 3}));
  CHECK(contains_pair(p, p.m11, {1, 2}));
  // Ordered off-diagonal pairs are covered exactly once.
  CHECK(p.m00.size() + p.m01.size() + p.m10.size() + p.m11.size() == 12);
}

TEST_CASE("edge_solutions degenerate and error cases") {
  auto r = edge_solutions(Matrix{{0, 1}, {1, 0}});
  CHECK(r.degenerate);
  REQUIRE(r.solutions.size() == 1);
  CHECK_FALSE(r.solutions[0].s.has_value());
  CHECK(r.solutions[0].e == r.solutions[0].e_prime);

  Matrix half = Matrix::Zero(3, 3);
  half(0, 1) = half(1, 0) = 0.5;
  CHECK_THROWS_WITH_AS(edge_solutions(half), doctest::Contains("indistinguishable mixing ratio"), RecoveryError);

  Matrix many = Matrix::Zero(4, 4);
  many(0, 1) = many(1, 0) = 0.2;
  many(0, 2) = many(2, 0) = 0.8;
  many(0, 3) = many(3, 0) = 0.4;
  CHECK_THROWS_AS(edge_solutions(many), RecoveryError);

  Matrix not_mirror = Matrix::Zero(3, 3);
  not_mirror(0, 1) = not_mirror(1, 0) = 0.2;
  not_mirror(0, 2) = not_mirror(2, 0) = 0.6;
  CHECK_THROWS_AS(edge_solutions(not_mirror), RecoveryError);
}

TEST_CASE("edge_solutions matches exhaustive enumeration on 3x3 pairs") {
  const auto all = oracle::all_binary_symmetric(3);
  for (const auto& e : all) {
    for (const auto& ep : all) {
      for (double lambda : kRatios) {
        const Matrix mixed = ep + lambda * (e - ep);
        const auto truth = oracle::edge_candidates(mixed);
        const auto got = edge_solutions(mixed);
        if (e == ep) {
          CHECK(got.degenerate);
          CHECK(got.solutions.size() == 1);
          continue;
        }
        REQUIRE(truth.size() == 2);
        REQUIRE(got.solutions.size() == 2);
        for (const auto& c : truth) {
          const bool found = same_solution(got.solutions[0], c) || same_solution(got.solutions[1], c);
          CHECK(found);
        }
        CHECK(*got.solutions[0].s < 0.5);
        CHECK(*got.solutions[0].s + *got.solutions[1].s == Approx(1.0));
        CHECK(got.solutions[0].e == got.solutions[1].e_prime);
      }
    }
  }
}

TEST_CASE("recover_features_independent cases") {
  const Matrix V = Matrix::Identity(3, 3);
  auto r = recover_features_independent(Matrix{{0.7, 0.3, 0}}, 0.7, V);
  CHECK(r.v == Matrix{{1, 0, 0}});
  CHECK(r.v_prime == Matrix{{0, 1, 0}});

  r = recover_features_independent(Matrix{{0, 0, 0}}, 0.7, V);
  CHECK(r.v.isZero(0));
  CHECK(r.v_prime.isZero(0));

  r = recover_features_independent(Matrix{{0.7, 0, 0}}, 0.7, V);
  CHECK(r.v == Matrix{{1, 0, 0}});
  CHECK(r.v_prime.isZero(0));

  r = recover_features_independent(Matrix{{0.3, 0, 0}}, 0.7, V);
  CHECK(r.v.isZero(0));
  CHECK(r.v_prime == Matrix{{1, 0, 0}});

  CHECK_THROWS_AS(recover_features_independent(Matrix{{0.5, 0, 0}}, 0.7, V), RecoveryError);
  CHECK_THROWS_AS(recover_features_independent(Matrix{{0.4, 0.3, 0.3}}, 0.7, V), RecoveryError);
  CHECK_THROWS_AS(recover_features_independent(Matrix{{0.7, 0.3}}, 0.7, Matrix{{1, 0}, {0, 1}, {1, 1}}),
                  RecoveryError);
}

TEST_CASE("feature decomposition is unique over every small binary vocabulary") {
  std::size_t vocabularies = 0;
  for (Index d = 1; d <= 4; ++d) {
    const Matrix pool = oracle::nonzero_binary_rows(d);
    std::vector<Index> pick;
    std::function<void(Index)> rec = [&](Index start) {
      if (!pick.empty()) {
        Matrix V(static_cast<Index>(pick.size()), d);
        for (std::size_t k = 0; k < pick.size(); ++k) V.row(static_cast<Index>(k)) = pool.row(pick[k]);
        if (check_linear_independence(V).independent) {
          ++vocabularies;
          Matrix star(V.rows() + 1, d);
          star << V, Eigen::RowVectorXd::Zero(d);
          for (double s : kRatios) {
            for (Index a = 0; a < star.rows(); ++a) {
              for (Index b = 0; b < star.rows(); ++b) {
                const Eigen::RowVectorXd row = s * star.row(a) + (1.0 - s) * star.row(b);
                const auto cands = oracle::feature_candidates(row, s, star);
                if (cands.size() != 1) FAIL("decomposition not unique");
                const auto got = recover_features_independent(Matrix(row), s, V);
                if (got.v.row(0) != star.row(a) || got.v_prime.row(0) != star.row(b)) {
                  FAIL("wrong decomposition");
                }
              }
            }
          }
        }
      }
      if (pick.size() == 4) return;
      for (Index k = start; k < pool.rows(); ++k) {
        pick.push_back(k);
        rec(k + 1);
        pick.pop_back();
      }
    };
    rec(0);
  }
  CHECK(vocabularies > 0);
}

TEST_CASE("recover_features_basis") {
  const Matrix B{{1, 1, 0}, {0, 0, 1}};
  const FeatureBasis fb = manual_basis(B, {Matrix{{1, 0}}, Matrix{{0, 1}}});

  auto r = recover_features_basis(Matrix{{0.7, 0.7, 0.3}}, 0.7, fb);
  CHECK((r.v - Matrix{{1, 1, 0}}).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r.v_prime - Matrix{{0, 0, 1}}).cwiseAbs().maxCoeff() < 1e-12);

  for (double s : {0.2, 0.7}) {
    r = recover_features_basis(Matrix{{1, 1, 0}}, s, fb);
    CHECK(r.v == Matrix{{1, 1, 0}});
    CHECK(r.v_prime == Matrix{{1, 1, 0}});
  }
  CHECK_THROWS_AS(recover_features_basis(Matrix{{1, 0, 0}}, 0.7, fb), RecoveryError);
}

TEST_CASE("basis-mode recovery on dependent vocabularies") {
  // V = {[1,0], [0,1], [1,1]} is dependent; two-node graphs give 4-dim T vectors.
  const Matrix V{{1, 0}, {0, 1}, {1, 1}};
  Rng rng(21);
  int tested = 0;
  for (int trial = 0; trial < 200 && tested < 40; ++trial) {
    std::vector<Graph> gs;
    for (int g = 0; g < 3; ++g) {
      Graph x = make_graph(2, 2);
      for (Index i = 0; i < 2; ++i) x.features.row(i) = V.row(static_cast<Index>(rng.index(3)));
      if (rng.uniform() < 0.5) x.weights(0, 1) = x.weights(1, 0) = 1.0;
      gs.push_back(x);
    }
    auto fb = feature_vocabulary(gs);
    if (fb.vocabulary.rows() != 3) continue;
    if (!check_coefficient_independence(fb).independent) continue;
    ++tested;
    for (std::size_t a = 0; a < gs.size(); ++a) {
      for (std::size_t b = 0; b < gs.size(); ++b) {
        if (a == b) continue;
        for (double s : kRatios) {
          Graph m = mix_pair(gs[a], gs[b], s);
          auto f = recover_features_basis(m.features, s, fb);
          CHECK((f.v - gs[a].features).cwiseAbs().maxCoeff() < 1e-9);
          CHECK((f.v_prime - gs[b].features).cwiseAbs().maxCoeff() < 1e-9);
          auto rec = recover_pair(m, fb, RecoveryMode::basis);
          if (gs[a] == gs[b]) {
            CHECK(rec.sources_identical());
            continue;
          }
          REQUIRE(rec.lambda.has_value());
          const RecoveredPair& o = std::abs(*rec.lambda - s) < 1e-9 ? rec : rec.swapped();
          CHECK(*o.lambda == Approx(s));
          CHECK(o.a.weights == gs[a].weights);
          CHECK((o.a.features - gs[a].features).cwiseAbs().maxCoeff() < 1e-9);
          CHECK(o.b.weights == gs[b].weights);
        }
      }
    }
  }
  CHECK(tested > 0);
}

TEST_CASE("recover_pair round trip with padding") {
  Rng rng(22);
  Graph a = random_binary_graph(rng, 3, 4);
  Graph b = random_binary_graph(rng, 5, 4);
  std::vector<Graph> pool{a, b};
  auto fb = feature_vocabulary(pool);
  fb.vocabulary = Matrix::Identity(4, 4);
  Graph m = mix_pair(a, b, 0.73);
  auto rec = recover_pair(m, fb, RecoveryMode::independent);
  REQUIRE(rec.lambda.has_value());
  CHECK(*rec.lambda == Approx(0.27));
  const RecoveredPair o = rec.swapped();
  CHECK(o.a.num_nodes() == 3);
  CHECK(o.a.weights == a.weights);
  CHECK(o.a.features == a.features);
  CHECK(o.b == b);
  CHECK(*o.lambda == Approx(0.73).epsilon(1e-12));

  CHECK_THROWS_WITH(recover_pair(mix_pair(a, b, 0.5), fb, RecoveryMode::independent),
                    doctest::Contains("indistinguishable mixing ratio"));
}

TEST_CASE("recover_pair with identical sources") {
  Rng rng(23);
  Graph a = random_binary_graph(rng, 4, 3);
  FeatureBasis fb;
  fb.vocabulary = Matrix::Identity(3, 3);
  fb.basis = Matrix::Identity(3, 3);
  auto rec = recover_pair(mix_pair(a, a, 0.3), fb, RecoveryMode::independent);
  CHECK(rec.sources_identical());
  CHECK(rec.a == a);
  CHECK(rec.b == a);
}

TEST_CASE("edge-identical pairs take the ratio from features") {
  Graph a = make_graph(2, 2), b = make_graph(2, 2);
  a.weights(0, 1) = a.weights(1, 0) = b.weights(0, 1) = b.weights(1, 0) = 1.0;
  a.features << 1, 0, 1, 0;
  b.features << 1, 0, 0, 1;
  FeatureBasis fb;
  fb.vocabulary = Matrix::Identity(2, 2);
  fb.basis = Matrix::Identity(2, 2);
  auto rec = recover_pair(mix_pair(a, b, 0.8), fb, RecoveryMode::independent);
  REQUIRE(rec.lambda.has_value());
  const RecoveredPair o = *rec.lambda > 0.5 ? rec : rec.swapped();
  CHECK(*o.lambda == Approx(0.8));
  CHECK(o.a == a);
  CHECK(o.b == b);
}

TEST_CASE("recovery ignores labels and depends only on the mixed graph") {
  Rng rng(24);
  Graph a = random_binary_graph(rng, 5, 3), b = random_binary_graph(rng, 6, 3);
  FeatureBasis fb;
  fb.vocabulary = Matrix::Identity(3, 3);
  fb.basis = Matrix::Identity(3, 3);
  Graph m = mix_pair(a, b, 0.35);
  auto r1 = recover_pair(m, fb, RecoveryMode::independent);
  auto r2 = recover_pair(Graph(m.features, m.weights), fb, RecoveryMode::independent);
  CHECK(r1.a == r2.a);
  CHECK(r1.b == r2.b);
  CHECK(*r1.lambda == *r2.lambda);
}

TEST_CASE("intrusion_audit gates") {
  SUBCASE("identical pair is not an intrusion") {
    GraphDataset ds;
    Rng rng(25);
    ds.items.push_back({random_binary_graph(rng, 4, 3), LabelDistribution::one_hot(0, 2)});
    ds.num_classes = 2;
    ds.feature_dim = 3;
    Rng audit_rng(1);
    auto rep = intrusion_audit(ds, 20, {2, 2}, audit_rng);
    CHECK(rep.assumption_satisfied);
    CHECK(rep.identical_pairs == 20);
    CHECK(rep.collisions == 0);
    CHECK(rep.recovery_failures == 0);
  }
  SUBCASE("dependent features") {
    // Two one-node graphs over {[1,0],[0,1],[1,1]}: 1-dim coefficient rows of a
    // rank-2 basis cannot be independent once three distinct rows appear.
    GraphDataset ds;
    ds.num_classes = 2;
    ds.feature_dim = 2;
    for (const Matrix& f : {Matrix{{1, 0}}, Matrix{{0, 1}}, Matrix{{1, 1}}}) {
      ds.items.push_back({Graph(f, Matrix::Zero(1, 1)), LabelDistribution::one_hot(0, 2)});
    }
    Rng audit_rng(2);
    auto rep = intrusion_audit(ds, 10, {2, 2}, audit_rng);
    CHECK_FALSE(rep.assumption_satisfied);
    CHECK(rep.trials == 0);
    CHECK(rep.assumption_detail.find("assumption violated") != std::string::npos);
    CHECK(to_json(rep).find("\"mode\": \"none\"") != std::string::npos);
  }
}

TEST_CASE("MUTAG audit" * doctest::skip(!testing::have_mutag())) {
  auto ds = load_tudataset({testing::data_dir() / "MUTAG", "MUTAG"});
  Rng rng(3);
  auto rep = intrusion_audit(ds, 300, {2, 2}, rng);
  CHECK(rep.assumption_satisfied);
  CHECK(rep.mode == "independent");
  CHECK(rep.collisions == 0);
  CHECK(rep.recovery_failures == 0);
}
