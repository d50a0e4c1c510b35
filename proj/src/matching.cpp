#include "qens/matching.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace qens {
namespace {

// Primal-dual weighted blossom algorithm, O(n^3). Follows the structure of
// Van Rantwijk's reference implementation: duals are stored doubled so that
// integer weights keep every quantity integral.
class BlossomMatcher {
public:
    BlossomMatcher(int n, const std::vector<WeightedEdge>& edges, bool max_cardinality)
        : n_(n), edges_(edges), max_cardinality_(max_cardinality) {}

    std::vector<int> run();

    /// Reduced cost of edge k under the final duals, including the duals of
    /// every blossom containing both endpoints. Zero for tight edges.
    std::int64_t reduced_cost(int k) const;

private:
    std::int64_t slack(int k) const {
        const auto& e = edges_[k];
        return dual_[e.u] + dual_[e.v] - 2 * e.weight;
    }
    int endpoint(int p) const { return p % 2 == 0 ? edges_[p / 2].u : edges_[p / 2].v; }

    template <typename F>
    void for_leaves(int b, F&& f) const {
        if (b < n_) {
            f(b);
            return;
        }
        for (int t : childs_[b]) for_leaves(t, f);
    }

    void assign_label(int w, int t, int p);
    int scan_blossom(int v, int w);
    void add_blossom(int base, int k);
    void expand_blossom(int b, bool endstage);
    void augment_blossom(int b, int v);
    void augment_matching(int k);

    int n_;
    std::vector<WeightedEdge> edges_;
    bool max_cardinality_;

    std::vector<std::vector<int>> neighbend_;
    std::vector<int> mate_, label_, labelend_, inblossom_, parent_, base_, bestedge_, unused_, queue_;
    std::vector<std::vector<int>> childs_, endps_, bestedges_;
    std::vector<bool> has_bestedges_;
    std::vector<std::int64_t> dual_;
    std::vector<char> allowedge_;
};

void BlossomMatcher::assign_label(int w, int t, int p) {
    const int b = inblossom_[w];
    label_[w] = label_[b] = t;
    labelend_[w] = labelend_[b] = p;
    bestedge_[w] = bestedge_[b] = -1;
    if (t == 1) {
        for_leaves(b, [&](int v) { queue_.push_back(v); });
    } else if (t == 2) {
        const int base = base_[b];
        assign_label(endpoint(mate_[base]), 1, mate_[base] ^ 1);
    }
}

int BlossomMatcher::scan_blossom(int v, int w) {
    std::vector<int> path;
    int base = -1;
    while (v != -1 || w != -1) {
        int b = inblossom_[v];
        if (label_[b] & 4) {
            base = base_[b];
            break;
        }
        path.push_back(b);
        label_[b] = 5;
        if (labelend_[b] == -1) {
            v = -1;
        } else {
            v = endpoint(labelend_[b]);
            b = inblossom_[v];
            v = endpoint(labelend_[b]);
        }
        if (w != -1) std::swap(v, w);
    }
    for (int b : path) label_[b] = 1;
    return base;
}

void BlossomMatcher::add_blossom(int base, int k) {
    int v = edges_[k].u;
    int w = edges_[k].v;
    const int bb = inblossom_[base];
    int bv = inblossom_[v];
    int bw = inblossom_[w];
    const int b = unused_.back();
    unused_.pop_back();
    base_[b] = base;
    parent_[b] = -1;
    parent_[bb] = b;
    auto& path = childs_[b];
    auto& endps = endps_[b];
    path.clear();
    endps.clear();
    while (bv != bb) {
        parent_[bv] = b;
        path.push_back(bv);
        endps.push_back(labelend_[bv]);
        v = endpoint(labelend_[bv]);
        bv = inblossom_[v];
    }
    path.push_back(bb);
    std::reverse(path.begin(), path.end());
    std::reverse(endps.begin(), endps.end());
    endps.push_back(2 * k);
    while (bw != bb) {
        parent_[bw] = b;
        path.push_back(bw);
        endps.push_back(labelend_[bw] ^ 1);
        w = endpoint(labelend_[bw]);
        bw = inblossom_[w];
    }
    label_[b] = 1;
    labelend_[b] = labelend_[bb];
    dual_[b] = 0;
    for_leaves(b, [&](int leaf) {
        if (label_[inblossom_[leaf]] == 2) queue_.push_back(leaf);
        inblossom_[leaf] = b;
    });

    std::vector<int> bestedgeto(2 * n_, -1);
    auto consider = [&](int e) {
        int i = edges_[e].u;
        int j = edges_[e].v;
        if (inblossom_[j] == b) std::swap(i, j);
        const int bj = inblossom_[j];
        if (bj != b && label_[bj] == 1 && (bestedgeto[bj] == -1 || slack(e) < slack(bestedgeto[bj])))
            bestedgeto[bj] = e;
    };
    for (int sub : path) {
        if (!has_bestedges_[sub]) {
            for_leaves(sub, [&](int leaf) {
                for (int p : neighbend_[leaf]) consider(p / 2);
            });
        } else {
            for (int e : bestedges_[sub]) consider(e);
        }
        bestedges_[sub].clear();
        has_bestedges_[sub] = false;
        bestedge_[sub] = -1;
    }
    bestedges_[b].clear();
    for (int e : bestedgeto)
        if (e != -1) bestedges_[b].push_back(e);
    has_bestedges_[b] = true;
    bestedge_[b] = -1;
    for (int e : bestedges_[b])
        if (bestedge_[b] == -1 || slack(e) < slack(bestedge_[b])) bestedge_[b] = e;
}

void BlossomMatcher::expand_blossom(int b, bool endstage) {
    for (int s : childs_[b]) {
        parent_[s] = -1;
        if (s < n_) {
            inblossom_[s] = s;
        } else if (endstage && dual_[s] == 0) {
            expand_blossom(s, endstage);
        } else {
            for_leaves(s, [&](int v) { inblossom_[v] = s; });
        }
    }
    if (!endstage && label_[b] == 2) {
        auto& ch = childs_[b];
        auto& ep = endps_[b];
        const int len = static_cast<int>(ch.size());
        const int entrychild = inblossom_[endpoint(labelend_[b] ^ 1)];
        int j = static_cast<int>(std::find(ch.begin(), ch.end(), entrychild) - ch.begin());
        int jstep, endptrick;
        if (j & 1) {
            j -= len;
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        auto at = [len](const std::vector<int>& vec, int idx) { return vec[((idx % len) + len) % len]; };
        int p = labelend_[b];
        while (j != 0) {
            label_[endpoint(p ^ 1)] = 0;
            label_[endpoint(at(ep, j - endptrick) ^ endptrick ^ 1)] = 0;
            assign_label(endpoint(p ^ 1), 2, p);
            allowedge_[at(ep, j - endptrick) / 2] = 1;
            j += jstep;
            p = at(ep, j - endptrick) ^ endptrick;
            allowedge_[p / 2] = 1;
            j += jstep;
        }
        int bv = at(ch, j);
        label_[endpoint(p ^ 1)] = label_[bv] = 2;
        labelend_[endpoint(p ^ 1)] = labelend_[bv] = p;
        bestedge_[bv] = -1;
        j += jstep;
        while (at(ch, j) != entrychild) {
            bv = at(ch, j);
            if (label_[bv] == 1) {
                j += jstep;
                continue;
            }
            int found = -1;
            for_leaves(bv, [&](int v) {
                if (found == -1 && label_[v] != 0) found = v;
            });
            if (found != -1) {
                label_[found] = 0;
                label_[endpoint(mate_[base_[bv]])] = 0;
                assign_label(found, 2, labelend_[found]);
            }
            j += jstep;
        }
    }
    label_[b] = labelend_[b] = -1;
    childs_[b].clear();
    endps_[b].clear();
    base_[b] = -1;
    bestedges_[b].clear();
    has_bestedges_[b] = false;
    bestedge_[b] = -1;
    unused_.push_back(b);
}

void BlossomMatcher::augment_blossom(int b, int v) {
    int t = v;
    while (parent_[t] != b) t = parent_[t];
    if (t >= n_) augment_blossom(t, v);
    auto& ch = childs_[b];
    auto& ep = endps_[b];
    const int len = static_cast<int>(ch.size());
    auto at = [len](const std::vector<int>& vec, int idx) { return vec[((idx % len) + len) % len]; };
    const int i = static_cast<int>(std::find(ch.begin(), ch.end(), t) - ch.begin());
    int j = i;
    int jstep, endptrick;
    if (i & 1) {
        j -= len;
        jstep = 1;
        endptrick = 0;
    } else {
        jstep = -1;
        endptrick = 1;
    }
    while (j != 0) {
        j += jstep;
        t = at(ch, j);
        const int p = at(ep, j - endptrick) ^ endptrick;
        if (t >= n_) augment_blossom(t, endpoint(p));
        j += jstep;
        t = at(ch, j);
        if (t >= n_) augment_blossom(t, endpoint(p ^ 1));
        mate_[endpoint(p)] = p ^ 1;
        mate_[endpoint(p ^ 1)] = p;
    }
    std::rotate(ch.begin(), ch.begin() + i, ch.end());
    std::rotate(ep.begin(), ep.begin() + i, ep.end());
    base_[b] = base_[ch[0]];
}

void BlossomMatcher::augment_matching(int k) {
    const int starts[2][2] = {{edges_[k].u, 2 * k + 1}, {edges_[k].v, 2 * k}};
    for (const auto& sp : starts) {
        int s = sp[0];
        int p = sp[1];
        while (true) {
            const int bs = inblossom_[s];
            if (bs >= n_) augment_blossom(bs, s);
            mate_[s] = p;
            if (labelend_[bs] == -1) break;
            const int t = endpoint(labelend_[bs]);
            const int bt = inblossom_[t];
            s = endpoint(labelend_[bt]);
            const int j = endpoint(labelend_[bt] ^ 1);
            if (bt >= n_) augment_blossom(bt, j);
            mate_[j] = labelend_[bt];
            p = labelend_[bt] ^ 1;
        }
    }
}

std::vector<int> BlossomMatcher::run() {
    const int n = n_;
    const int m = static_cast<int>(edges_.size());
    std::int64_t maxweight = 0;
    for (const auto& e : edges_) maxweight = std::max(maxweight, e.weight);

    neighbend_.assign(n, {});
    for (int k = 0; k < m; ++k) {
        neighbend_[edges_[k].u].push_back(2 * k + 1);
        neighbend_[edges_[k].v].push_back(2 * k);
    }
    mate_.assign(n, -1);
    label_.assign(2 * n, 0);
    labelend_.assign(2 * n, -1);
    inblossom_.resize(n);
    for (int i = 0; i < n; ++i) inblossom_[i] = i;
    parent_.assign(2 * n, -1);
    childs_.assign(2 * n, {});
    endps_.assign(2 * n, {});
    base_.assign(2 * n, -1);
    for (int i = 0; i < n; ++i) base_[i] = i;
    bestedge_.assign(2 * n, -1);
    bestedges_.assign(2 * n, {});
    has_bestedges_.assign(2 * n, false);
    unused_.clear();
    for (int b = n; b < 2 * n; ++b) unused_.push_back(b);
    dual_.assign(2 * n, 0);
    for (int i = 0; i < n; ++i) dual_[i] = maxweight;
    allowedge_.assign(m, 0);

    for (int stage = 0; stage < n; ++stage) {
        std::fill(label_.begin(), label_.end(), 0);
        std::fill(bestedge_.begin(), bestedge_.end(), -1);
        for (int b = n; b < 2 * n; ++b) {
            bestedges_[b].clear();
            has_bestedges_[b] = false;
        }
        std::fill(allowedge_.begin(), allowedge_.end(), 0);
        queue_.clear();
        for (int v = 0; v < n; ++v)
            if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);

        bool augmented = false;
        while (true) {
            while (!queue_.empty() && !augmented) {
                const int v = queue_.back();
                queue_.pop_back();
                for (int p : neighbend_[v]) {
                    const int k = p / 2;
                    const int w = endpoint(p);
                    if (inblossom_[v] == inblossom_[w]) continue;
                    std::int64_t kslack = 0;
                    if (!allowedge_[k]) {
                        kslack = slack(k);
                        if (kslack <= 0) allowedge_[k] = 1;
                    }
                    if (allowedge_[k]) {
                        if (label_[inblossom_[w]] == 0) {
                            assign_label(w, 2, p ^ 1);
                        } else if (label_[inblossom_[w]] == 1) {
                            const int base = scan_blossom(v, w);
                            if (base >= 0) {
                                add_blossom(base, k);
                            } else {
                                augment_matching(k);
                                augmented = true;
                                break;
                            }
                        } else if (label_[w] == 0) {
                            label_[w] = 2;
                            labelend_[w] = p ^ 1;
                        }
                    } else if (label_[inblossom_[w]] == 1) {
                        const int b = inblossom_[v];
                        if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
                    } else if (label_[w] == 0) {
                        if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) bestedge_[w] = k;
                    }
                }
            }
            if (augmented) break;

            int deltatype = -1;
            std::int64_t delta = 0;
            int deltaedge = -1;
            int deltablossom = -1;
            if (!max_cardinality_) {
                deltatype = 1;
                delta = *std::min_element(dual_.begin(), dual_.begin() + n);
            }
            for (int v = 0; v < n; ++v) {
                if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
                    const std::int64_t d = slack(bestedge_[v]);
                    if (deltatype == -1 || d < delta) {
                        delta = d;
                        deltatype = 2;
                        deltaedge = bestedge_[v];
                    }
                }
            }
            for (int b = 0; b < 2 * n; ++b) {
                if (parent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
                    const std::int64_t d = slack(bestedge_[b]) / 2;
                    if (deltatype == -1 || d < delta) {
                        delta = d;
                        deltatype = 3;
                        deltaedge = bestedge_[b];
                    }
                }
            }
            for (int b = n; b < 2 * n; ++b) {
                if (base_[b] >= 0 && parent_[b] == -1 && label_[b] == 2 && (deltatype == -1 || dual_[b] < delta)) {
                    delta = dual_[b];
                    deltatype = 4;
                    deltablossom = b;
                }
            }
            if (deltatype == -1) {
                deltatype = 1;
                delta = std::max<std::int64_t>(0, *std::min_element(dual_.begin(), dual_.begin() + n));
            }

            for (int v = 0; v < n; ++v) {
                if (label_[inblossom_[v]] == 1)
                    dual_[v] -= delta;
                else if (label_[inblossom_[v]] == 2)
                    dual_[v] += delta;
            }
            for (int b = n; b < 2 * n; ++b) {
                if (base_[b] >= 0 && parent_[b] == -1) {
                    if (label_[b] == 1)
                        dual_[b] += delta;
                    else if (label_[b] == 2)
                        dual_[b] -= delta;
                }
            }

            if (deltatype == 1) {
                break;
            } else if (deltatype == 2) {
                allowedge_[deltaedge] = 1;
                int i = edges_[deltaedge].u;
                if (label_[inblossom_[i]] == 0) i = edges_[deltaedge].v;
                queue_.push_back(i);
            } else if (deltatype == 3) {
                allowedge_[deltaedge] = 1;
                queue_.push_back(edges_[deltaedge].u);
            } else {
                expand_blossom(deltablossom, false);
            }
        }
        if (!augmented) break;
        for (int b = n; b < 2 * n; ++b)
            if (parent_[b] == -1 && base_[b] >= 0 && label_[b] == 1 && dual_[b] == 0) expand_blossom(b, true);
    }

    std::vector<int> mate(n, -1);
    for (int v = 0; v < n; ++v)
        if (mate_[v] >= 0) mate[v] = endpoint(mate_[v]);
    return mate;
}

std::int64_t BlossomMatcher::reduced_cost(int k) const {
    const int i = edges_[k].u;
    const int j = edges_[k].v;
    std::int64_t s = slack(k);
    std::vector<int> chain_i{i}, chain_j{j};
    while (parent_[chain_i.back()] != -1) chain_i.push_back(parent_[chain_i.back()]);
    while (parent_[chain_j.back()] != -1) chain_j.push_back(parent_[chain_j.back()]);
    auto ii = chain_i.rbegin();
    auto jj = chain_j.rbegin();
    for (; ii != chain_i.rend() && jj != chain_j.rend() && *ii == *jj; ++ii, ++jj) s += 2 * dual_[*ii];
    return s;
}

struct Problem {
    int n = 0;
    std::vector<WeightedEdge> edges;     // max-weight transformed
    std::vector<std::int64_t> original;  // original weight per edge
};

// Optimal perfect matching on the induced subgraph of `nodes`; returns the
// mate in original indices (-1 for nodes outside `nodes`) and its weight.
bool solve_subset(const WeightedGraph& g, const std::vector<std::vector<std::int64_t>>& w,
                  const std::vector<int>& nodes, std::vector<int>& mate_out, std::int64_t& weight_out) {
    const int k = static_cast<int>(nodes.size());
    std::vector<WeightedEdge> edges;
    std::int64_t maxw = 0;
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            if (w[nodes[a]][nodes[b]] >= 0) maxw = std::max(maxw, w[nodes[a]][nodes[b]]);
    for (int a = 0; a < k; ++a)
        for (int b = a + 1; b < k; ++b)
            if (w[nodes[a]][nodes[b]] >= 0) edges.push_back({a, b, maxw - w[nodes[a]][nodes[b]]});
    const std::vector<int> mate = BlossomMatcher(k, edges, true).run();
    mate_out.assign(g.node_count, -1);
    weight_out = 0;
    for (int a = 0; a < k; ++a) {
        if (mate[a] < 0) return false;
        mate_out[nodes[a]] = nodes[mate[a]];
        if (a < mate[a]) weight_out += w[nodes[a]][nodes[mate[a]]];
    }
    return true;
}

}  // namespace

void WeightedGraph::validate() const {
    if (node_count < 0) throw std::invalid_argument("negative node count");
    std::map<std::pair<int, int>, int> seen;
    for (const auto& e : edges) {
        if (e.u < 0 || e.v < 0 || e.u >= node_count || e.v >= node_count)
            throw std::invalid_argument("edge endpoint out of range");
        if (e.u == e.v) throw std::invalid_argument("self-loop at node " + std::to_string(e.u));
        if (e.weight < 0) throw std::invalid_argument("negative edge weight");
        if (!seen.emplace(std::minmax(e.u, e.v), 0).second)
            throw std::invalid_argument("duplicate edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) + ")");
    }
}

std::vector<int> max_weight_max_cardinality_matching(int node_count, const std::vector<WeightedEdge>& edges) {
    return BlossomMatcher(node_count, edges, true).run();
}

std::int64_t matching_weight(const WeightedGraph& graph, const Matching& matching) {
    std::map<std::pair<int, int>, std::int64_t> w;
    for (const auto& e : graph.edges) w[std::minmax(e.u, e.v)] = e.weight;
    std::int64_t total = 0;
    for (auto [a, b] : matching) {
        auto it = w.find(std::minmax(a, b));
        if (it == w.end()) throw std::invalid_argument("matching uses a pair that is not an edge");
        total += it->second;
    }
    return total;
}

Matching min_weight_perfect_matching(const WeightedGraph& graph) {
    graph.validate();
    const int n = graph.node_count;
    if (n % 2 != 0) throw std::invalid_argument("perfect matching needs an even node count, got " + std::to_string(n));
    if (n == 0) return {};

    // Adjacency matrix, -1 for absent edges.
    std::vector<std::vector<std::int64_t>> w(n, std::vector<std::int64_t>(n, -1));
    std::int64_t maxw = 0;
    for (const auto& e : graph.edges) {
        w[e.u][e.v] = w[e.v][e.u] = e.weight;
        maxw = std::max(maxw, e.weight);
    }
    std::vector<WeightedEdge> transformed;
    transformed.reserve(graph.edges.size());
    std::vector<std::vector<int>> edge_id(n, std::vector<int>(n, -1));
    for (const auto& e : graph.edges) {
        edge_id[e.u][e.v] = edge_id[e.v][e.u] = static_cast<int>(transformed.size());
        transformed.push_back({e.u, e.v, maxw - e.weight});
    }
    BlossomMatcher matcher(n, transformed, true);
    std::vector<int> mate = matcher.run();
    for (int v = 0; v < n; ++v)
        if (mate[v] < 0) throw std::domain_error("graph has no perfect matching");

    // Canonicalise: fix the smallest free node to its smallest feasible
    // partner. Every optimal matching uses only edges tight under the final
    // duals, so other edges are never candidates.
    std::vector<char> fixed(n, 0);
    for (int i = 0; i < n; ++i) {
        if (fixed[i]) continue;
        for (int j = i + 1; j < mate[i]; ++j) {
            if (fixed[j] || w[i][j] < 0 || matcher.reduced_cost(edge_id[i][j]) != 0) continue;
            // Cheap exchange: {i,mi},{j,mj} -> {i,j},{mi,mj} at equal weight.
            const int mi = mate[i];
            const int mj = mate[j];
            if (w[mi][mj] >= 0 && w[i][j] + w[mi][mj] == w[i][mi] + w[j][mj]) {
                mate[i] = j;
                mate[j] = i;
                mate[mi] = mj;
                mate[mj] = mi;
                break;
            }
            std::vector<int> rest;
            std::int64_t current = 0;
            for (int v = 0; v < n; ++v) {
                if (fixed[v] || v == i || v == j) continue;
                rest.push_back(v);
            }
            for (int v = 0; v < n; ++v)
                if (!fixed[v] && v < mate[v]) current += w[v][mate[v]];
            std::vector<int> sub_mate;
            std::int64_t sub_weight = 0;
            if (solve_subset(graph, w, rest, sub_mate, sub_weight) && sub_weight + w[i][j] == current) {
                for (int v : rest) mate[v] = sub_mate[v];
                mate[i] = j;
                mate[j] = i;
                break;
            }
        }
        fixed[i] = fixed[mate[i]] = 1;
    }

    Matching out;
    for (int v = 0; v < n; ++v)
        if (v < mate[v]) out.emplace_back(v, mate[v]);
    return out;
}

}  // namespace qens
