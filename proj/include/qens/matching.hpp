#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace qens {

struct WeightedEdge {
    int u = 0;
    int v = 0;
    std::int64_t weight = 0;
};

/// Undirected graph with non-negative integer edge weights. No self-loops and
/// at most one edge per node pair.
struct WeightedGraph {
    int node_count = 0;
    std::vector<WeightedEdge> edges;

    void add_edge(int u, int v, std::int64_t weight) { edges.push_back({u, v, weight}); }
    /// Throws std::invalid_argument on self-loops, duplicates, bad indices or
    /// negative weights.
    void validate() const;
};

/// Node pairs (a, b) with a < b, sorted ascending.
using Matching = std::vector<std::pair<int, int>>;

/// Exact minimum-weight perfect matching (Edmonds' blossom algorithm, integer
/// duals). Among all optimal matchings the lexicographically smallest sorted
/// pair list is returned. Throws std::invalid_argument for an odd node count
/// and std::domain_error when no perfect matching exists.
Matching min_weight_perfect_matching(const WeightedGraph& graph);

std::int64_t matching_weight(const WeightedGraph& graph, const Matching& matching);

/// Maximum-weight matching among maximum-cardinality matchings; returns the
/// mate of every node (-1 when unmatched). Exposed for testing.
std::vector<int> max_weight_max_cardinality_matching(int node_count, const std::vector<WeightedEdge>& edges);

}  // namespace qens
