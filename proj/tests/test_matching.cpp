#include <functional>
#include <limits>
#include <algorithm>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "qens/matching.hpp"

using namespace qens;

namespace {

// Exhaustive oracle over all (k-1)!! perfect matchings. Returns the optimum
// weight and the lexicographically smallest optimal pair list.
std::pair<std::int64_t, Matching> brute_force(const WeightedGraph& g) {
    const int n = g.node_count;
    std::vector<std::vector<std::int64_t>> w(n, std::vector<std::int64_t>(n, -1));
    for (const auto& e : g.edges) w[e.u][e.v] = w[e.v][e.u] = e.weight;
    std::int64_t best = std::numeric_limits<std::int64_t>::max();
    Matching best_m, cur;
    std::vector<char> used(n, 0);
    std::function<void(std::int64_t)> rec = [&](std::int64_t acc) {
        int i = 0;
        while (i < n && used[i]) ++i;
        if (i == n) {
            Matching sorted = cur;
            std::sort(sorted.begin(), sorted.end());
            if (acc < best || (acc == best && sorted < best_m)) {
                best = acc;
                best_m = sorted;
            }
            return;
        }
        used[i] = 1;
        for (int j = i + 1; j < n; ++j) {
            if (used[j] || w[i][j] < 0) continue;
            used[j] = 1;
            cur.emplace_back(i, j);
            rec(acc + w[i][j]);
            cur.pop_back();
            used[j] = 0;
        }
        used[i] = 0;
    };
    rec(0);
    return {best, best_m};
}

WeightedGraph random_complete(std::mt19937_64& rng, int n, int max_w) {
    std::uniform_int_distribution<int> wd(0, max_w);
    WeightedGraph g;
    g.node_count = n;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) g.add_edge(i, j, wd(rng));
    return g;
}

bool is_perfect(const Matching& m, int n) {
    std::vector<int> seen(n, 0);
    for (auto [a, b] : m) {
        if (a >= b) return false;
        ++seen[a];
        ++seen[b];
    }
    for (int c : seen)
        if (c != 1) return false;
    return static_cast<int>(m.size()) * 2 == n;
}

}  // namespace

TEST_CASE("trivial matchings") {
    WeightedGraph g;
    g.node_count = 2;
    g.add_edge(0, 1, 3);
    auto m = min_weight_perfect_matching(g);
    CHECK(m == Matching{{0, 1}});
    CHECK(matching_weight(g, m) == 3);
    CHECK(min_weight_perfect_matching(WeightedGraph{}).empty());
}

TEST_CASE("K4 example") {
    WeightedGraph g;
    g.node_count = 4;
    g.add_edge(0, 1, 1);
    g.add_edge(2, 3, 1);
    g.add_edge(0, 2, 2);
    g.add_edge(1, 3, 2);
    g.add_edge(0, 3, 5);
    g.add_edge(1, 2, 5);
    auto m = min_weight_perfect_matching(g);
    CHECK(m == Matching{{0, 1}, {2, 3}});
    CHECK(matching_weight(g, m) == 2);
}

TEST_CASE("errors") {
    WeightedGraph odd;
    odd.node_count = 3;
    odd.add_edge(0, 1, 1);
    odd.add_edge(1, 2, 1);
    CHECK_THROWS_AS(min_weight_perfect_matching(odd), std::invalid_argument);

    WeightedGraph path;
    path.node_count = 4;
    path.add_edge(0, 1, 1);
    path.add_edge(0, 2, 1);
    path.add_edge(0, 3, 1);
    CHECK_THROWS_AS(min_weight_perfect_matching(path), std::domain_error);

    WeightedGraph loop;
    loop.node_count = 2;
    loop.add_edge(1, 1, 1);
    CHECK_THROWS_AS(min_weight_perfect_matching(loop), std::invalid_argument);

    WeightedGraph dup;
    dup.node_count = 2;
    dup.add_edge(0, 1, 1);
    dup.add_edge(1, 0, 2);
    CHECK_THROWS_AS(min_weight_perfect_matching(dup), std::invalid_argument);
}

TEST_CASE("optimal and lexicographically smallest against brute force") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 400; ++trial) {
        const int n = 2 * std::uniform_int_distribution<int>(1, 5)(rng);
        // Small weight ranges create many ties.
        const int max_w = trial % 2 == 0 ? 20 : 3;
        WeightedGraph g = random_complete(rng, n, max_w);
        auto [best, best_m] = brute_force(g);
        Matching m = min_weight_perfect_matching(g);
        REQUIRE(is_perfect(m, n));
        CHECK(matching_weight(g, m) == best);
        CHECK(m == best_m);
    }
}

TEST_CASE("sparse graphs against brute force") {
    std::mt19937_64 rng(77);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const int n = 2 * std::uniform_int_distribution<int>(2, 5)(rng);
        WeightedGraph g;
        g.node_count = n;
        std::uniform_int_distribution<int> wd(0, 9);
        std::bernoulli_distribution keep(0.5);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (keep(rng)) g.add_edge(i, j, wd(rng));
        auto [best, best_m] = brute_force(g);
        if (best_m.empty()) {
            CHECK_THROWS_AS(min_weight_perfect_matching(g), std::domain_error);
            continue;
        }
        ++checked;
        Matching m = min_weight_perfect_matching(g);
        CHECK(matching_weight(g, m) == best);
        CHECK(m == best_m);
    }
    CHECK(checked > 50);
}

TEST_CASE("positive weight scaling leaves the matching unchanged") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        WeightedGraph g = random_complete(rng, 8, 15);
        WeightedGraph scaled = g;
        for (auto& e : scaled.edges) e.weight *= 7;
        CHECK(min_weight_perfect_matching(g) == min_weight_perfect_matching(scaled));
    }
}

TEST_CASE("max-weight matcher handles blossoms") {
    // Classic odd-cycle instance requiring a blossom.
    std::vector<WeightedEdge> edges{{0, 1, 8}, {0, 2, 9}, {1, 2, 10}, {2, 3, 7}};
    auto mate = max_weight_max_cardinality_matching(4, edges);
    CHECK(mate == std::vector<int>{1, 0, 3, 2});
    std::vector<WeightedEdge> nested{{0, 1, 9}, {0, 2, 9}, {1, 2, 10}, {1, 3, 8}, {2, 4, 8}, {3, 4, 10}, {4, 5, 6}};
    auto mate2 = max_weight_max_cardinality_matching(6, nested);
    CHECK(mate2 == std::vector<int>{2, 3, 0, 1, 5, 4});
}
