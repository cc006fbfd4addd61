#include "decopt/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "decopt/rng.hpp"

namespace decopt {

bool Graph::has_edge(int i, int j) const {
  if (i == j) return false;
  const auto& nbrs = adjacency[i];
  return std::find(nbrs.begin(), nbrs.end(), j) != nbrs.end();
}

Graph make_graph(int n, std::vector<std::pair<int, int>> edges) {
  if (n < 1) throw std::invalid_argument("graph needs at least one agent");
  Graph g;
  g.n = n;
  g.adjacency.assign(n, {});
  std::set<std::pair<int, int>> seen;
  for (auto& [a, b] : edges) {
    if (a == b) throw std::invalid_argument("self-loop in edge list");
    if (a > b) std::swap(a, b);
    if (a < 0 || b >= n) throw std::invalid_argument("edge endpoint out of range");
    if (!seen.insert({a, b}).second)
      throw std::invalid_argument("duplicate edge in edge list");
  }
  g.edges.assign(seen.begin(), seen.end());
  for (const auto& [a, b] : g.edges) {
    g.adjacency[a].push_back(b);
    g.adjacency[b].push_back(a);
  }
  for (auto& nbrs : g.adjacency) std::sort(nbrs.begin(), nbrs.end());
  return g;
}

bool is_connected(const Graph& g) {
  if (g.n == 0) return false;
  std::vector<char> seen(g.n, 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : g.adjacency[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == g.n;
}

Graph generate_erdos_renyi(int n, double r_c, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (!(r_c > 0.0) || r_c > 1.0)
    throw std::invalid_argument("connectivity ratio must be in (0, 1]");

  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(seed + static_cast<std::uint64_t>(attempt));
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (rng.uniform01() < r_c) edges.emplace_back(i, j);
      }
    }
    Graph g = make_graph(n, std::move(edges));
    if (is_connected(g)) return g;
  }
  throw std::runtime_error(
      "no connected Erdos-Renyi sample in 1000 attempts; "
      "connectivity ratio too small for this n");
}

std::string graph_to_json(const Graph& g) {
  nlohmann::json j;
  j["schema"] = "decopt.graph.v1";
  j["n"] = g.n;
  auto& e = j["edges"] = nlohmann::json::array();
  for (const auto& [a, b] : g.edges) e.push_back({a, b});
  return j.dump(2);
}

Graph graph_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.at("schema") != "decopt.graph.v1")
    throw std::runtime_error("unexpected graph schema");
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges"))
    edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return make_graph(j.at("n").get<int>(), std::move(edges));
}

}  // namespace decopt
