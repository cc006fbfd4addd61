// Undirected simple graphs and the Erdos-Renyi generator used by the
// experiment harness. Generation is deterministic: a given (n, r_c, seed)
// always yields the same edge set (see rng.hpp for the pinned algorithms).

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace decopt {

struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // unordered pairs stored as i < j
  std::vector<std::vector<int>> adjacency;

  int degree(int i) const { return static_cast<int>(adjacency[i].size()); }
  bool has_edge(int i, int j) const;
};

// Builds adjacency lists from an edge list and checks the graph is simple.
Graph make_graph(int n, std::vector<std::pair<int, int>> edges);

bool is_connected(const Graph& g);

// Samples G(n, r_c): each unordered pair (i, j), i < j, scanned in row-major
// order, is included independently with probability r_c. Disconnected samples
// are rejected and redrawn with seed+1, seed+2, ... up to 1000 attempts;
// throws std::runtime_error once the retry budget is exhausted.
Graph generate_erdos_renyi(int n, double r_c, std::uint64_t seed);

// JSON fixture schema "decopt.graph.v1": {"schema", "n", "edges": [[i,j],...]}
std::string graph_to_json(const Graph& g);
Graph graph_from_json(const std::string& text);

}  // namespace decopt
