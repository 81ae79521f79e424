#pragma once

#include "semirank/graph.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace semirank {

// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct GraphFile {
  Graph graph;
  // Present iff any line carried a weight column.
  std::optional<WeightVector> weights;
};

namespace detail {
[[noreturn]] inline void parse_fail(const std::string& path, int line,
                                    const std::string& what) {
  throw std::invalid_argument(path + ":" + std::to_string(line) + ": " + what);
}
}  // namespace detail

// Edge-list text format: first line "n m", then m lines "i j [w] [er_flag]"
// (0-based). Weights default to 1.0; er_flag, when present, must be 0 or 1.
inline GraphFile read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open graph file: " + path);
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next_line()) detail::parse_fail(path, 1, "missing header line");
  long long n = 0, m = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> n >> m) || n < 2 || m < 0)
      detail::parse_fail(path, lineno, "expected header \"n m\"");
  }
  std::vector<std::pair<int, int>> pairs;
  std::vector<std::uint8_t> mask;
  std::vector<double> wvals;
  bool any_weight = false, any_mask = false;
  pairs.reserve(static_cast<std::size_t>(m));
  for (long long e = 0; e < m; ++e) {
    if (!next_line())
      detail::parse_fail(path, lineno + 1, "unexpected end of file");
    std::istringstream ss(line);
    long long i = 0, j = 0;
    double w = 1.0;
    int flag = -1;
    if (!(ss >> i >> j))
      detail::parse_fail(path, lineno, "expected \"i j [w] [er_flag]\"");
    if (ss >> w) {
      any_weight = true;
      if (ss >> flag) {
        any_mask = true;
        if (flag != 0 && flag != 1)
          detail::parse_fail(path, lineno, "er_flag must be 0 or 1");
      }
    }
    std::string rest;
    if (ss >> rest) detail::parse_fail(path, lineno, "trailing tokens");
    if (i < 0 || j < 0 || i >= n || j >= n)
      detail::parse_fail(path, lineno, "vertex out of range");
    if (i == j) detail::parse_fail(path, lineno, "self-loop");
    pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
    wvals.push_back(w);
    mask.push_back(flag == 1 ? 1 : 0);
  }
  // Canonical order may differ from file order; remap the columns.
  Graph g = Graph::from_pairs(static_cast<int>(n), pairs,
                              any_mask ? &mask : nullptr);
  if (g.num_edges() != static_cast<int>(pairs.size()))
    throw std::invalid_argument(path + ": duplicate edges in file");
  GraphFile out;
  if (any_weight) {
    WeightVector w(g.num_edges());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      auto [a, b] = pairs[k];
      w(g.find_edge(a, b)) = wvals[k];
    }
    out.weights = std::move(w);
  }
  out.graph = std::move(g);
  return out;
}

inline void write_graph_file(const std::string& path, const Graph& g,
                             const WeightVector* weights = nullptr) {
  if (weights && weights->size() != g.num_edges())
    throw std::invalid_argument("write_graph_file: weight size mismatch");
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write graph file: " + path);
  out << g.num_vertices() << ' ' << g.num_edges() << '\n';
  const bool with_mask = g.has_er_mask();
  for (int e = 0; e < g.num_edges(); ++e) {
    const auto [i, j] = g.edge(e);
    out << i << ' ' << j;
    if (weights || with_mask)
      out << ' ' << format_double(weights ? (*weights)(e) : 1.0);
    if (with_mask) out << ' ' << int(g.er_mask()[static_cast<std::size_t>(e)]);
    out << '\n';
  }
  if (!out) throw std::invalid_argument("failed writing graph file: " + path);
}

}  // namespace semirank
