#include "helpers.hpp"

#include "ifmix/augment.hpp"

#include <doctest.h>

using namespace ifmix;
using doctest::Approx;
using testing::random_binary_graph;

namespace {

Graph path_graph(Index n) {
  Graph g(Matrix::Identity(n, n), Matrix::Zero(n, n));
  for (Index i = 0; i + 1 < n; ++i) g.weights(i, i + 1) = g.weights(i + 1, i) = 1.0;
  return g;
}

Graph graph_with_edges(Index n, int edges, Rng& rng) {
  Graph g = make_graph(n, 2);
  g.features.col(0).setOnes();
  int placed = 0;
  while (placed < edges) {
    const Index i = static_cast<Index>(rng.index(static_cast<std::size_t>(n)));
    const Index j = static_cast<Index>(rng.index(static_cast<std::size_t>(n)));
    if (i == j || g.weights(i, j) == 1.0) continue;
    g.weights(i, j) = g.weights(j, i) = 1.0;
    ++placed;
  }
  return g;
}

// Original index of each surviving node, read back from identity features.
std::vector<Index> survivors(const Graph& kept) {
  std::vector<Index> out;
  for (Index i = 0; i < kept.num_nodes(); ++i) {
    Index col;
    kept.features.row(i).maxCoeff(&col);
    out.push_back(col);
  }
  return out;
}

} // namespace

TEST_CASE("drop_edge counts") {
  Rng rng(1);
  Graph g = graph_with_edges(8, 10, rng);
  CHECK(drop_edge(g, 0.0, rng) == g);
  for (int t = 0; t < 50; ++t) {
    Graph d = drop_edge(g, 0.2, rng);
    CHECK(d.num_edges() == 8);
    CHECK(d.features == g.features);
    CHECK(validate_graph(d, true).ok());
    CHECK((d.weights.array() <= g.weights.array()).all());
  }
  CHECK(drop_edge(g, 0.45, rng).num_edges() == 6);
}

TEST_CASE("drop_edge removes edges uniformly") {
  Rng rng(2);
  Graph g = graph_with_edges(7, 10, rng);
  const double ratio = 0.4;
  const int trials = 10000;
  Matrix kept = Matrix::Zero(7, 7);
  double surviving = 0.0;
  for (int t = 0; t < trials; ++t) {
    Graph d = drop_edge(g, ratio, rng);
    kept += d.weights;
    surviving += static_cast<double>(d.num_edges());
  }
  const double expected = (10.0 - std::floor(ratio * 10.0)) / 10.0;
  CHECK(surviving / (10.0 * trials) == Approx(expected).epsilon(0.02));
  for (Index i = 0; i < 7; ++i)
    for (Index j = i + 1; j < 7; ++j)
      if (g.weights(i, j) == 1.0) CHECK(kept(i, j) / trials == Approx(expected).epsilon(0.05));
}

TEST_CASE("drop_node") {
  Rng rng(3);
  Graph g = path_graph(5);
  CHECK(drop_node(g, 0.0, rng) == g);

  for (int t = 0; t < 20; ++t) CHECK(drop_node(g, 0.4, rng).num_nodes() == 3);

  // Single drop: find a draw that removes the middle node.
  bool seen = false;
  for (int t = 0; t < 200 && !seen; ++t) {
    Graph d = drop_node(g, 0.2, rng);
    if (survivors(d) != std::vector<Index>{0, 1, 3, 4}) continue;
    seen = true;
    Matrix want = Matrix::Zero(4, 4);
    want(0, 1) = want(1, 0) = want(2, 3) = want(3, 2) = 1.0;
    CHECK(d.weights == want);
  }
  CHECK(seen);

  CHECK(drop_node(make_graph(1, 1), 0.99, rng).num_nodes() == 1);
  CHECK_THROWS_AS(drop_node(make_graph(3, 1), 1.0, rng), std::invalid_argument);
}

TEST_CASE("drop_node keeps the induced subgraph in order") {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const Index n = 2 + static_cast<Index>(rng.index(10));
    Graph g = random_binary_graph(rng, n, 2);
    g.features = Matrix::Identity(n, n);
    Graph d = drop_node(g, 0.3, rng);
    CHECK(validate_graph(d, true).ok());
    auto keep = survivors(d);
    CHECK(std::is_sorted(keep.begin(), keep.end()));
    CHECK(static_cast<Index>(keep.size()) == n - static_cast<Index>(std::floor(0.3 * static_cast<double>(n))));
    for (std::size_t i = 0; i < keep.size(); ++i)
      for (std::size_t j = 0; j < keep.size(); ++j)
        CHECK(d.weights(static_cast<Index>(i), static_cast<Index>(j)) == g.weights(keep[i], keep[j]));
  }
}

TEST_CASE("mix_readout") {
  RowVector a{{2, 0}}, b{{0, 2}};
  CHECK(mix_readout(a, b, 0.5) == RowVector{{1, 1}});
  CHECK(mix_readout(a, b, 1.0) == a);
  CHECK(mix_readout(a, b, 0.3).size() == 2);
  CHECK_THROWS_AS(mix_readout(a, RowVector{{1, 2, 3}}, 0.5), std::invalid_argument);

  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    RowVector x = RowVector::NullaryExpr(6, [&] { return rng.normal(); });
    RowVector y = RowVector::NullaryExpr(6, [&] { return rng.normal(); });
    RowVector m = mix_readout(x, y, rng.uniform());
    CHECK((m.array() >= x.cwiseMin(y).array()).all());
    CHECK((m.array() <= x.cwiseMax(y).array()).all());
  }
}

TEST_CASE("mix_hidden") {
  Rng rng(6);
  ModelConfig c;
  c.arch = Arch::gin;
  c.layers = 3;
  c.hidden = 4;
  ModelParams p = init_params(c, 3, 2, rng);
  Graph ga = testing::random_weighted_graph(rng, 5, 3), gb = testing::random_weighted_graph(rng, 7, 3);
  auto ta = encode(ga, p, c), tb = encode(gb, p, c);

  for (int k = 1; k <= 3; ++k) {
    RowVector m = mix_hidden(ta, tb, 0.35, k);
    CHECK(m.size() == 4);
    const RowVector& pa = ta.pooled[static_cast<std::size_t>(k - 1)];
    const RowVector& pb = tb.pooled[static_cast<std::size_t>(k - 1)];
    CHECK((m.array() >= pa.cwiseMin(pb).array() - 1e-12).all());
    CHECK((m.array() <= pa.cwiseMax(pb).array() + 1e-12).all());
    CHECK(mix_hidden(ta, tb, 1.0, k) == pa);

    RowVector routed = route_to_head(m, c, k);
    CHECK(routed.size() == representation_dim(c));
    CHECK(routed.segment(4 * (k - 1), 4) == m);
    CHECK(routed.sum() == Approx(m.sum()));

    BatchItem item{&ga, &gb, 0.35, k, LabelDistribution::one_hot(0, 2)};
    Vector want = classify(routed, p, c).probabilities;
    CHECK((item_probabilities(item, p, c) - want).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS(mix_hidden(ta, tb, 0.5, 0));
  CHECK_THROWS(mix_hidden(ta, tb, 0.5, 4));
}

TEST_CASE("final-layer mixing matches readout mixing for GCN") {
  Rng rng(7);
  ModelConfig c;
  c.arch = Arch::gcn;
  c.layers = 2;
  c.hidden = 5;
  ModelParams p = init_params(c, 3, 2, rng);
  Graph ga = testing::random_weighted_graph(rng, 4, 3), gb = testing::random_weighted_graph(rng, 6, 3);
  auto ta = encode(ga, p, c), tb = encode(gb, p, c);
  RowVector hidden = route_to_head(mix_hidden(ta, tb, 0.6, 2), c, 2);
  RowVector full = mix_readout(ta.representation, tb.representation, 0.6);
  CHECK((hidden - full).cwiseAbs().maxCoeff() < 1e-12);
  BatchItem a{&ga, &gb, 0.6, 2, LabelDistribution::one_hot(0, 2)};
  BatchItem b{&ga, &gb, 0.6, 0, LabelDistribution::one_hot(0, 2)};
  CHECK((item_probabilities(a, p, c) - item_probabilities(b, p, c)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("draw_mix_layer") {
  Rng rng(8);
  ModelConfig c;
  c.arch = Arch::gin;
  c.layers = 4;
  std::vector<int> hits(5, 0);
  for (int t = 0; t < 4000; ++t) ++hits[static_cast<std::size_t>(draw_mix_layer(c, rng))];
  CHECK(hits[0] == 0);
  for (int k = 1; k <= 4; ++k) CHECK(hits[static_cast<std::size_t>(k)] == doctest::Approx(1000).epsilon(0.1));
  c.arch = Arch::gcn;
  CHECK(draw_mix_layer(c, rng) == 4);
}

TEST_CASE("AugmentSpec validation") {
  CHECK(parse_augment_kind("if_mixup") == AugmentKind::if_mixup);
  CHECK(to_string(AugmentKind::manifold_mixup) == "manifold_mixup");
  CHECK_THROWS(parse_augment_kind("cutmix"));
  AugmentSpec s;
  s.kind = AugmentKind::drop_edge;
  s.ratio = 1.0;
  CHECK_THROWS(s.validate());
  s = AugmentSpec{};
  s.kind = AugmentKind::if_mixup_shuffled;
  CHECK(s.mixes_inputs());
  CHECK_FALSE(s.mixes_representations());
  s.kind = AugmentKind::drop_node;
  CHECK(s.drops());
}
