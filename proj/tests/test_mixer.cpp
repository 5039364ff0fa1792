#include "helpers.hpp"

#include "ifmix/mixer.hpp"

#include <doctest.h>

#include <vector>

using namespace ifmix;
using doctest::Approx;
using testing::random_binary_graph;

namespace {

double empirical_mean(const BetaParams& p, std::uint64_t seed, int draws) {
  Rng rng(seed);
  double sum = 0.0;
  for (int i = 0; i < draws; ++i) sum += sample_lambda(p, rng);
  return sum / draws;
}

// Composite Simpson rule on [0, 1].
double integrate_pdf(const BetaParams& p, int intervals) {
  const double h = 1.0 / intervals;
  double s = beta_pdf(p, 0.0) + beta_pdf(p, 1.0);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * beta_pdf(p, i * h);
  return s * h / 3.0;
}

} // namespace

TEST_CASE("sample_lambda moments") {
  CHECK(std::abs(empirical_mean({1, 1}, 11, 100000) - 0.5) <= 0.005);
  CHECK(std::abs(empirical_mean({20, 1}, 12, 100000) - 20.0 / 21.0) <= 0.003);
  CHECK(std::abs(empirical_mean({2, 2}, 13, 100000) - 0.5) <= 0.005);
}

TEST_CASE("sample_lambda is deterministic and stays inside (0, 1)") {
  Rng a(5), b(5);
  for (int i = 0; i < 1000; ++i) {
    const double x = sample_lambda({0.2, 0.2}, a);
    CHECK(x == sample_lambda({0.2, 0.2}, b));
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
  Rng c(0);
  CHECK_THROWS_AS(sample_lambda({0, 1}, c), std::invalid_argument);
}

TEST_CASE("beta_pdf values") {
  for (double x : {0.0, 0.25, 0.5, 1.0}) CHECK(beta_pdf({1, 1}, x) == Approx(1.0));
  CHECK(beta_pdf({2, 2}, 0.5) == Approx(1.5));
  CHECK(beta_pdf({20, 1}, 1.0) == Approx(20.0));
  CHECK_THROWS(beta_pdf({2, 2}, 1.5));
  CHECK_THROWS(beta_pdf({2, 2}, -0.1));
}

TEST_CASE("beta_pdf integrates to one for the sweep settings") {
  const std::vector<BetaParams> grid{{1, 1}, {2, 2}, {5, 1}, {10, 1}, {20, 1}};
  for (const auto& p : grid) {
    CAPTURE(p.label());
    CHECK(std::abs(integrate_pdf(p, 20000) - 1.0) < 1e-6);
  }
}

TEST_CASE("mix_pair examples") {
  Graph a = make_graph(2, 3), b = make_graph(4, 3);
  a.weights(0, 1) = a.weights(1, 0) = 1.0;
  a.features(0, 0) = 1.0;
  b.features(3, 1) = 1.0;
  Graph m = mix_pair(a, b, 0.7);
  CHECK(m.num_nodes() == 4);
  CHECK(m.weights(0, 1) == Approx(0.7));
  CHECK(m.weights(1, 0) == Approx(0.7));
  CHECK(m.features(3, 0) == 0.0);
  CHECK(m.features(3, 1) == Approx(0.3));
  CHECK(m.features(3, 2) == 0.0);
  CHECK(validate_graph(m).ok());

  CHECK_THROWS_AS(mix_pair(a, b, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(mix_pair(a, b, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(mix_pair(a, make_graph(2, 2), 0.5), std::invalid_argument);
}

TEST_CASE("self-mixing is an exact fixed point") {
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    Graph g = random_binary_graph(rng, 1 + static_cast<Index>(rng.index(10)), 4);
    const double lambda = rng.uniform() * 0.98 + 0.01;
    CHECK(mix_pair(g, g, lambda) == g);
  }
}

TEST_CASE("mixing is convex and symmetric") {
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    Graph a = random_binary_graph(rng, 1 + static_cast<Index>(rng.index(8)), 3);
    Graph b = random_binary_graph(rng, 1 + static_cast<Index>(rng.index(8)), 3);
    const double lambda = sample_lambda({2, 2}, rng);
    Graph m = mix_pair(a, b, lambda);
    auto [pa, pb] = pad_pair(a, b);
    CHECK(validate_graph(m).ok());
    CHECK((m.weights - m.weights.transpose()).isZero(0));
    const Matrix lo = pa.weights.cwiseMin(pb.weights), hi = pa.weights.cwiseMax(pb.weights);
    CHECK((m.weights.array() >= lo.array()).all());
    CHECK((m.weights.array() <= hi.array()).all());
  }
}

TEST_CASE("mix approaches the first source linearly as lambda tends to one") {
  Rng rng(9);
  Graph a = random_binary_graph(rng, 6, 3), b = random_binary_graph(rng, 6, 3);
  if ((a.weights - b.weights).isZero(0)) b.weights(0, 1) = b.weights(1, 0) = 1.0 - a.weights(0, 1);
  for (double gap : {1e-1, 1e-2, 1e-3, 1e-4}) {
    Graph m = mix_pair(a, b, 1.0 - gap);
    CHECK((m.weights - a.weights).cwiseAbs().maxCoeff() == Approx(gap).epsilon(1e-9));
  }
}

TEST_CASE("mix_labels") {
  auto ya = LabelDistribution::one_hot(0, 2), yb = LabelDistribution::one_hot(1, 2);
  auto m = mix_labels(ya, yb, 0.7);
  CHECK(m.p(0) == Approx(0.7));
  CHECK(m.p(1) == Approx(0.3));
  CHECK(mix_labels(ya, yb, 1.0).p == ya.p);
  CHECK_THROWS_AS(mix_labels(ya, LabelDistribution::one_hot(0, 3), 0.5), std::invalid_argument);

  Rng rng(10);
  for (int t = 0; t < 1000; ++t) {
    auto a = LabelDistribution::one_hot(static_cast<Index>(rng.index(4)), 4);
    auto b = LabelDistribution::one_hot(static_cast<Index>(rng.index(4)), 4);
    auto y = mix_labels(a, b, rng.uniform());
    CHECK(y.is_valid());
    CHECK(y.p.sum() == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("mix_samples records its inputs") {
  GraphDataset ds;
  Rng rng(11);
  ds.items.push_back({random_binary_graph(rng, 3, 2), LabelDistribution::one_hot(0, 2)});
  ds.items.push_back({random_binary_graph(rng, 4, 2), LabelDistribution::one_hot(1, 2)});
  auto s = mix_samples(ds, 0, 1, 0.25);
  CHECK(s.lambda == 0.25);
  CHECK(s.source_ids == std::pair<std::size_t, std::size_t>{0, 1});
  CHECK(s.label.p(1) == Approx(0.75));
  CHECK(s.graph == mix_pair(ds.graph(0), ds.graph(1), 0.25));
}
