#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "semirank/sampling.hpp"
#include "semirank/spectral.hpp"

#include <cstdio>
#include <filesystem>

using namespace semirank;

TEST_CASE("gen_er covers the degenerate probabilities") {
  const Graph complete = gen_er(7, 1.0, 3);
  CHECK(complete.num_edges() == 21);
  REQUIRE(complete.has_er_mask());
  for (auto m : complete.er_mask()) CHECK(m == 1);

  const Graph sparse = gen_er(10, 1e-9, 4);
  CHECK(sparse.num_edges() <= 1);  // almost surely empty, never invalid
  CHECK_THROWS_AS(gen_er(10, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_er(10, 1.5, 1), std::invalid_argument);

  // deterministic given the seed
  const Graph a = gen_er(40, 0.3, 99);
  const Graph b = gen_er(40, 0.3, 99);
  CHECK(a.edges() == b.edges());
  CHECK(gen_er(40, 0.3, 100).edges() != a.edges());
}

TEST_CASE("random-graph spectral profile: gap above np/2, degrees below 2np") {
  // reduced seed count; the acceptance suite runs all 100 seeds
  const int n = 300;
  const double p = 0.2;
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Graph g = gen_er(n, p, seed);
    const WeightVector ones = WeightVector::Ones(g.num_edges());
    const double gap = lambda_n_minus_1(build_laplacian(g, ones));
    const double dmax = weighted_degrees(g, ones).maxCoeff();
    if (gap >= n * p / 2.0 && dmax <= 2.0 * n * p) ++ok;
  }
  CHECK(ok >= 19);
}

TEST_CASE("clique adversary is monotone and adds the planted cliques") {
  // adding to a complete graph is a no-op
  const Graph complete = gen_er(12, 1.0, 5);
  const Graph same = apply_clique_adversary(complete, 17);
  CHECK(same.edges() == complete.edges());
  for (auto m : same.er_mask()) CHECK(m == 1);

  // n=6 with an empty base: two planted 2-cliques, one edge each
  std::vector<std::pair<int, int>> no_pairs;
  std::vector<std::uint8_t> no_mask;
  const Graph empty6 = Graph::from_pairs(6, no_pairs, &no_mask);
  const Graph planted = apply_clique_adversary(empty6, 2);
  CHECK(planted.num_edges() == 2);
  for (auto m : planted.er_mask()) CHECK(m == 0);

  CHECK_THROWS_AS(apply_clique_adversary(gen_er(9, 0.5, 1), 2),
                  std::invalid_argument);  // odd n has no half split
}

TEST_CASE("clique adversary creates the expected max degree") {
  const int n = 200;
  const Graph base = gen_er(n, 0.25, 11);
  const Graph sr = apply_clique_adversary(base, 12);
  // every planted-clique vertex gains n/3 - 1 clique neighbors
  const WeightVector ones = WeightVector::Ones(sr.num_edges());
  CHECK(weighted_degrees(sr, ones).maxCoeff() >= n / 3.0 - 1.0);
  // monotone: every base edge survives with its mask
  for (int e = 0; e < base.num_edges(); ++e) {
    const int idx = sr.find_edge(base.edge(e).lo, base.edge(e).hi);
    REQUIRE(idx >= 0);
    CHECK(sr.er_mask()[static_cast<std::size_t>(idx)] == 1);
  }
}

TEST_CASE("cluster sampling couples the hidden random subgraph") {
  // q == p everywhere collapses to a plain random graph, fully masked
  const Graph collapsed = gen_cluster_graph({5, 5}, {0.4, 0.4}, 0.4, 7);
  for (auto m : collapsed.er_mask()) CHECK(m == 1);

  // within-cluster complete, cross-cluster sparse
  const Graph split = gen_cluster_graph({6, 6}, {1.0, 1.0}, 0.05, 8);
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j) CHECK(split.find_edge(i, j) >= 0);

  CHECK_THROWS_AS(gen_cluster_graph({4, 4}, {0.3, 0.3}, 0.5, 1),
                  std::invalid_argument);

  // masked subgraph edge count concentrates at q * n(n-1)/2
  const int n = 100;
  const double q = 0.2;
  const double pairs = n * (n - 1) / 2.0;
  const double sigma = std::sqrt(pairs * q * (1 - q));
  int within = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Graph g = gen_cluster_graph({50, 50}, {0.8, 0.8}, q, seed);
    double count = 0;
    for (auto m : g.er_mask()) count += m;
    if (std::abs(count - q * pairs) <= 3.0 * sigma) ++within;
  }
  CHECK(within >= 48);
}

TEST_CASE("hidden subgraph is distributed as ER(n, q) pair by pair") {
  const double q = 0.35;
  const int trials = 10000;
  std::vector<int> hits(15, 0);
  for (int t = 0; t < trials; ++t) {
    const Graph g =
        gen_cluster_graph({3, 3}, {0.9, 0.7}, q, static_cast<std::uint64_t>(t));
    int pair = 0;
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j, ++pair) {
        const int e = g.find_edge(i, j);
        if (e >= 0 && g.er_mask()[static_cast<std::size_t>(e)]) ++hits[static_cast<std::size_t>(pair)];
      }
  }
  const double sigma = std::sqrt(q * (1 - q) / trials);
  for (int pair = 0; pair < 15; ++pair) {
    const double freq = static_cast<double>(hits[static_cast<std::size_t>(pair)]) / trials;
    CHECK(std::abs(freq - q) <= 3.0 * sigma);
  }
}

TEST_CASE("two-level scores are centered with the stated gap") {
  const BTLInstance b = gen_btl_scores(4, 2, 1.0);
  CHECK(b.theta_star(0) == doctest::Approx(0.5));
  CHECK(b.theta_star(1) == doctest::Approx(0.5));
  CHECK(b.theta_star(2) == doctest::Approx(-0.5));
  CHECK(b.theta_star(3) == doctest::Approx(-0.5));
  CHECK(std::abs(b.theta_star.sum()) <= 1e-12);
  CHECK_THROWS_AS(gen_btl_scores(4, 2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(gen_btl_scores(4, 4, 1.0), std::invalid_argument);
  CHECK(gen_btl_scores(200, 10, 0.62).kappa() == doctest::Approx(1.8589).epsilon(1e-3));
}

TEST_CASE("comparison sampling matches the win-rate model") {
  // flat scores: every outcome is a fair coin
  const Graph g2 = Graph::from_pairs(2, {{0, 1}});
  BTLInstance flat;
  flat.theta_star = Eigen::VectorXd::Zero(2);
  flat.k_top = 1;
  flat.delta_k = 1;
  const ComparisonData coin = sample_comparisons(g2, flat, 100000, 21);
  CHECK(std::abs(coin.y(0) - 0.5) <= 0.01);

  // extreme gap: the far weaker lower-indexed item essentially never wins
  BTLInstance wide;
  wide.theta_star = Eigen::VectorXd::Zero(2);
  wide.theta_star << -10.0, 10.0;
  wide.k_top = 1;
  wide.delta_k = 20;
  CHECK(sigmoid(-20.0) == doctest::Approx(2.0612e-9).epsilon(1e-3));
  const ComparisonData rare = sample_comparisons(g2, wide, 100000, 22);
  CHECK(rare.y(0) == 0.0);

  // binomial confidence interval around sigmoid(-1)
  BTLInstance one;
  one.theta_star = Eigen::VectorXd::Zero(2);
  one.theta_star << 0.5, -0.5;
  one.k_top = 1;
  one.delta_k = 1;
  const int reps = 1000000;
  const ComparisonData ci = sample_comparisons(g2, one, reps, 23);
  // stored rate is the lower-indexed item's; its score sits 1 above
  const double p_expected = sigmoid(1.0);
  CHECK(1.0 - p_expected == doctest::Approx(0.26894).epsilon(1e-4));
  const double sigma = std::sqrt(p_expected * (1 - p_expected) / reps);
  CHECK(std::abs(ci.y(0) - p_expected) <= 3.0 * sigma);
}

TEST_CASE("sampling depends only on score differences") {
  const Graph g = gen_er(20, 0.5, 31);
  BTLInstance b = gen_btl_scores(20, 5, 0.7);
  const ComparisonData base = sample_comparisons(g, b, 7, 77);
  b.theta_star.array() += 123.456;  // de-centered on purpose
  const ComparisonData shifted = sample_comparisons(g, b, 7, 77);
  CHECK((base.y - shifted.y).cwiseAbs().maxCoeff() == 0.0);

  // every rate is a multiple of 1/L
  for (int e = 0; e < g.num_edges(); ++e) {
    const double scaled = base.y(e) * 7;
    CHECK(std::abs(scaled - std::round(scaled)) <= 1e-12);
  }
}

TEST_CASE("sampling is independent of the ambient supergraph") {
  // the per-edge substreams make shared edges identical across graphs
  const Graph base = gen_er(30, 0.4, 41);
  const Graph sup = apply_clique_adversary(gen_er(30, 0.4, 41), 42);
  const BTLInstance b = gen_btl_scores(30, 4, 0.5);
  const ComparisonData d_base = sample_comparisons(base, b, 9, 55);
  const ComparisonData d_sup = sample_comparisons(sup, b, 9, 55);
  for (int e = 0; e < base.num_edges(); ++e) {
    const int idx = sup.find_edge(base.edge(e).lo, base.edge(e).hi);
    REQUIRE(idx >= 0);
    CHECK(d_base.y(e) == d_sup.y(idx));
  }
}

TEST_CASE("comparison files round-trip") {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string path = (dir / "semirank_cmp_roundtrip.txt").string();
  const Graph g = gen_er(15, 0.5, 61);
  const BTLInstance b = gen_btl_scores(15, 3, 0.4);
  const ComparisonData data = sample_comparisons(g, b, 13, 62);
  write_comparison_file(path, g, data);
  const ComparisonData back = read_comparison_file(path, g);
  CHECK(back.reps == 13);
  CHECK((back.y - data.y).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}
