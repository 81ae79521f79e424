#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "semirank/graph.hpp"
#include "semirank/io.hpp"
#include "semirank/spectral.hpp"
#include "test_util.hpp"

#include <cstdio>
#include <filesystem>
#include <numeric>

using namespace semirank;

namespace {
Graph path3() { return Graph::from_pairs(3, {{0, 1}, {1, 2}}); }
Graph triangle() { return Graph::from_pairs(3, {{0, 1}, {0, 2}, {1, 2}}); }
}  // namespace

TEST_CASE("edges are canonicalized, sorted and deduplicated") {
  const Graph g = Graph::from_pairs(4, {{3, 1}, {0, 2}, {1, 3}, {2, 0}, {0, 1}});
  REQUIRE(g.num_edges() == 3);
  CHECK(g.edge(0) == Edge{0, 1});
  CHECK(g.edge(1) == Edge{0, 2});
  CHECK(g.edge(2) == Edge{1, 3});
  CHECK(g.find_edge(3, 1) == 2);
  CHECK(g.find_edge(2, 3) == -1);
  CHECK_THROWS_AS(Graph::from_pairs(3, {{1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph::from_pairs(3, {{0, 3}}), std::invalid_argument);
}

TEST_CASE("laplacian on a single edge") {
  const Graph g = Graph::from_pairs(2, {{0, 1}});
  const Eigen::MatrixXd laplacian = build_laplacian(g, Eigen::VectorXd::Ones(1));
  Eigen::MatrixXd expected(2, 2);
  expected << 1, -1, -1, 1;
  CHECK((laplacian - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("laplacian of unit K3 has spectrum {0, 3, 3}") {
  const Eigen::MatrixXd laplacian =
      build_laplacian(triangle(), Eigen::VectorXd::Ones(3));
  CHECK(laplacian(0, 0) == 2.0);
  CHECK(laplacian(0, 1) == -1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(laplacian);
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(es.eigenvalues()(1) == doctest::Approx(3.0));
  CHECK(es.eigenvalues()(2) == doctest::Approx(3.0));
}

TEST_CASE("laplacian of a weighted path") {
  Eigen::VectorXd w(2);
  w << 2, 3;
  const Eigen::MatrixXd laplacian = build_laplacian(path3(), w);
  Eigen::MatrixXd expected(3, 3);
  expected << 2, -2, 0, -2, 5, -3, 0, -3, 3;
  CHECK((laplacian - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(build_laplacian(path3(), Eigen::VectorXd::Ones(5)),
                  std::invalid_argument);
}

TEST_CASE("weighted degrees") {
  const Graph star = Graph::from_pairs(4, {{0, 1}, {0, 2}, {0, 3}});
  const Eigen::VectorXd d = weighted_degrees(star, Eigen::VectorXd::Ones(3));
  CHECK(d(0) == 3.0);
  CHECK(d(1) == 1.0);
  CHECK(d(3) == 1.0);
  CHECK(weighted_degrees(star, Eigen::VectorXd::Zero(3)).cwiseAbs().maxCoeff() == 0.0);
  Eigen::VectorXd w(2);
  w << 2, 3;
  const Eigen::VectorXd dp = weighted_degrees(path3(), w);
  CHECK(dp(0) == 2.0);
  CHECK(dp(1) == 5.0);
  CHECK(dp(2) == 3.0);
}

TEST_CASE("connectivity respects the weight threshold") {
  const Graph g2 = Graph::from_pairs(2, {{0, 1}});
  CHECK(is_connected(g2, Eigen::VectorXd::Ones(1), 0.0));
  CHECK_FALSE(is_connected(g2, Eigen::VectorXd::Constant(1, 1e-15), 1e-12));
  Eigen::VectorXd w(3);
  w << 1, 1, 0;
  CHECK(is_connected(triangle(), w, 0.0));
  w << 0, 0, 1;
  CHECK_FALSE(is_connected(triangle(), w, 0.0));
}

TEST_CASE("volume sums weighted degrees") {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
  CHECK(volume(triangle(), ones, {0, 1, 2}) == 6.0);
  CHECK(volume(triangle(), ones, {}) == 0.0);
  Eigen::VectorXd w(2);
  w << 2, 3;
  CHECK(volume(path3(), w, {1}) == 5.0);
  CHECK_THROWS_AS(volume(path3(), w, {7}), std::invalid_argument);
}

TEST_CASE("laplacian invariants on random weighted graphs") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Graph g = test_util::random_connected_graph(12, 0.3, seed);
    const WeightVector w = test_util::random_weights(g.num_edges(), 0.1, 4.0, seed + 100);
    const Eigen::MatrixXd laplacian = build_laplacian(g, w);
    CHECK((laplacian * Eigen::VectorXd::Ones(12)).cwiseAbs().maxCoeff() <= 1e-12);
    for (int rep = 0; rep < 100; ++rep) {
      const Eigen::VectorXd x = test_util::random_vector(12, seed * 1000 + rep);
      double direct = 0;
      for (int e = 0; e < g.num_edges(); ++e) {
        const auto [i, j] = g.edge(e);
        direct += w(e) * (x(i) - x(j)) * (x(i) - x(j));
      }
      const double quad = x.dot(laplacian * x);
      CHECK(std::abs(quad - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
    }
    // complementary volumes
    SplitMix64 rng(seed + 7);
    std::vector<int> s, rest;
    for (int v = 0; v < 12; ++v) (rng.coin() ? s : rest).push_back(v);
    std::vector<int> all(12);
    std::iota(all.begin(), all.end(), 0);
    CHECK(volume(g, w, s) + volume(g, w, rest) ==
          doctest::Approx(volume(g, w, all)).epsilon(1e-12));
    // d_min >= lambda_{n-1} / 2 for connected weighted graphs
    const double gap = lambda_n_minus_1(laplacian);
    CHECK(weighted_degrees(g, w).minCoeff() >= 0.5 * gap - 1e-9 * gap);
  }
}

TEST_CASE("matrix-free product matches the dense laplacian") {
  const Graph g = test_util::random_connected_graph(30, 0.2, 5);
  const WeightVector w = test_util::random_weights(g.num_edges(), 0.0, 2.0, 6);
  const Eigen::MatrixXd x =
      Eigen::MatrixXd::NullaryExpr(30, 4, [](Eigen::Index i, Eigen::Index j) {
        return std::sin(static_cast<double>(3 * i + 7 * j));
      });
  const Eigen::MatrixXd dense = build_laplacian(g, w) * x;
  const Eigen::MatrixXd free = apply_laplacian(g, w, x);
  CHECK((dense - free).cwiseAbs().maxCoeff() <=
        1e-10 * std::max(1.0, dense.cwiseAbs().maxCoeff()));
}

TEST_CASE("edge-list files round-trip") {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string path = (dir / "semirank_graph_roundtrip.txt").string();

  Graph g = Graph::from_pairs(5, {{0, 1}, {1, 2}, {0, 4}, {2, 3}});
  // weights exercise the 17-digit format
  WeightVector w(4);
  w << 1.0 / 3.0, 7.25, 1e-13, 0.1234567890123456789;
  write_graph_file(path, g, &w);
  const GraphFile back = read_graph_file(path);
  REQUIRE(back.graph.num_vertices() == 5);
  REQUIRE(back.graph.num_edges() == 4);
  CHECK(back.graph.edges() == g.edges());
  REQUIRE(back.weights.has_value());
  CHECK(((*back.weights) - w).cwiseAbs().maxCoeff() == 0.0);

  std::vector<std::uint8_t> mask{1, 0, 1, 1};
  g = Graph::from_pairs(5, {{0, 1}, {1, 2}, {0, 4}, {2, 3}}, &mask);
  write_graph_file(path, g);
  const GraphFile masked = read_graph_file(path);
  REQUIRE(masked.graph.has_er_mask());
  CHECK(masked.graph.er_subgraph().num_edges() == 3);
  std::remove(path.c_str());
}

TEST_CASE("graph file parse errors carry line numbers") {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string path = (dir / "semirank_graph_bad.txt").string();
  {
    std::ofstream out(path);
    out << "4 2\n0 1\n0 banana\n";
  }
  try {
    read_graph_file(path);
    FAIL("expected parse error");
  } catch (const std::invalid_argument& ex) {
    CHECK(std::string(ex.what()).find(":3:") != std::string::npos);
  }
  std::remove(path.c_str());
}
