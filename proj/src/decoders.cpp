#include "qens/decoders.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "qens/matching.hpp"

namespace qens {

DecodingGraph::DecodingGraph(const CodeLayout& layout, StabilizerType type)
    : type_(type), nodes_(layout.type_count(type)), adj_(nodes_ + 1) {
    const int offset = static_cast<int>(layout.type_offset(type));
    const int bnd = static_cast<int>(nodes_);
    const auto& stabs = layout.stabilizers();
    // Column step: the qubit shares the stabilizer's row.
    auto is_column_step = [&](int node, int qubit) {
        if (node == bnd) return false;
        return layout.data_qubits()[qubit].row == stabs[node + offset].position.row;
    };
    for (std::size_t q = 0; q < layout.num_data_qubits(); ++q) {
        const auto& checks = type == StabilizerType::X ? layout.x_checks_of(q) : layout.z_checks_of(q);
        const int qi = static_cast<int>(q);
        if (checks.size() == 2) {
            const int a = checks[0] - offset;
            const int b = checks[1] - offset;
            adj_[a].push_back({b, qi});
            adj_[b].push_back({a, qi});
        } else if (checks.size() == 1) {
            const int a = checks[0] - offset;
            adj_[a].push_back({bnd, qi});
            adj_[bnd].push_back({a, qi});
        }
    }
    for (int v = 0; v <= bnd; ++v)
        std::sort(adj_[v].begin(), adj_[v].end(), [&](const Step& x, const Step& y) {
            return std::make_tuple(is_column_step(v, x.qubit), x.qubit) <
                   std::make_tuple(is_column_step(v, y.qubit), y.qubit);
        });

    // BFS from every node. Paths never pass through the boundary node.
    const std::size_t total = nodes_ + 1;
    dist_.assign(total * total, -1);
    std::deque<int> queue;
    for (int src = 0; src <= bnd; ++src) {
        int* d = &dist_[static_cast<std::size_t>(src) * total];
        d[src] = 0;
        queue.assign(1, src);
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            if (u == bnd && u != src) continue;
            for (const Step& s : adj_[u])
                if (d[s.node] < 0) {
                    d[s.node] = d[u] + 1;
                    queue.push_back(s.node);
                }
        }
    }
}

std::vector<int> DecodingGraph::path(int a, int b) const {
    std::vector<int> qubits;
    if (a == boundary()) std::swap(a, b);
    int cur = a;
    while (cur != b) {
        const int remaining = distance(cur, b);
        bool moved = false;
        for (const Step& s : adj_[cur]) {
            if (s.node == boundary() && s.node != b) continue;
            if (distance(s.node, b) == remaining - 1) {
                qubits.push_back(s.qubit);
                cur = s.node;
                moved = true;
                break;
            }
        }
        if (!moved) throw std::logic_error("decoding graph is disconnected");
    }
    return qubits;
}

namespace {

void check_length(const CodeLayout& layout, const Syndrome& s) {
    if (s.size() != layout.num_stabilizers())
        throw std::invalid_argument("syndrome has length " + std::to_string(s.size()) + ", expected " +
                                    std::to_string(layout.num_stabilizers()));
}

std::vector<int> defects_of(const CodeLayout& layout, const DecodingGraph& g, const Syndrome& s) {
    const std::size_t offset = layout.type_offset(g.type());
    std::vector<int> defects;
    for (int i = 0; i < g.size(); ++i)
        if (s.bits[offset + i]) defects.push_back(i);
    return defects;
}

void apply_path(const DecodingGraph& g, int a, int b, PauliOperator& recovery) {
    for (int q : g.path(a, b)) recovery.apply(q, g.detected_pauli());
}

void mwpm_correct(const DecodingGraph& g, const std::vector<int>& defects, PauliOperator& recovery) {
    const int d = static_cast<int>(defects.size());
    if (d == 0) return;
    WeightedGraph mg;
    mg.node_count = 2 * d;
    mg.edges.reserve(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) mg.add_edge(i, j, g.distance(defects[i], defects[j]));
    for (int i = 0; i < d; ++i) mg.add_edge(i, d + i, g.boundary_distance(defects[i]));
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) mg.add_edge(d + i, d + j, 0);
    for (auto [a, b] : min_weight_perfect_matching(mg)) {
        if (a >= d) continue;
        apply_path(g, defects[a], b < d ? defects[b] : g.boundary(), recovery);
    }
}

void hdrg_correct(const DecodingGraph& g, std::vector<int> alive, PauliOperator& recovery) {
    int max_radius = 0;
    for (int v = 0; v < g.size(); ++v) max_radius = std::max(max_radius, g.boundary_distance(v));
    for (int radius = 1; !alive.empty(); ++radius) {
        const int d = static_cast<int>(alive.size());
        std::vector<int> parent(d);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                if (g.distance(alive[i], alive[j]) <= radius) parent[find(i)] = find(j);

        std::vector<std::vector<int>> clusters(d);
        std::vector<char> touches(d, 0);
        for (int i = 0; i < d; ++i) {
            const int root = find(i);
            clusters[root].push_back(i);
            if (g.boundary_distance(alive[i]) <= radius) touches[root] = 1;
        }

        std::vector<int> survivors;
        for (int root = 0; root < d; ++root) {
            const auto& members = clusters[root];
            if (members.empty()) continue;
            const bool neutral = members.size() % 2 == 0 || touches[root];
            if (!neutral) {
                for (int i : members) survivors.push_back(alive[i]);
                continue;
            }
            // Greedy annihilation. Candidate (weight, a, b); b == -1 is the
            // boundary and sorts after every pair at equal weight and a.
            std::vector<std::tuple<int, int, int>> candidates;
            const int k = static_cast<int>(members.size());
            for (int x = 0; x < k; ++x) {
                const int a = alive[members[x]];
                for (int y = x + 1; y < k; ++y) candidates.emplace_back(g.distance(a, alive[members[y]]), a, alive[members[y]]);
                if (touches[root]) candidates.emplace_back(g.boundary_distance(a), a, g.size() + 1);
            }
            std::sort(candidates.begin(), candidates.end());
            std::vector<int> used;
            auto is_used = [&](int v) { return std::find(used.begin(), used.end(), v) != used.end(); };
            for (auto [w, a, b] : candidates) {
                if (is_used(a)) continue;
                if (b > g.size()) {
                    apply_path(g, a, g.boundary(), recovery);
                    used.push_back(a);
                } else if (!is_used(b)) {
                    apply_path(g, a, b, recovery);
                    used.push_back(a);
                    used.push_back(b);
                }
            }
        }
        std::sort(survivors.begin(), survivors.end());
        alive = std::move(survivors);
        if (radius > max_radius + 1 && !alive.empty()) throw std::logic_error("HDRG failed to terminate");
    }
}

}  // namespace

MwpmDecoder::MwpmDecoder(const CodeLayout& layout)
    : layout_(&layout), x_graph_(layout, StabilizerType::X), z_graph_(layout, StabilizerType::Z) {}

PauliOperator MwpmDecoder::decode(const Syndrome& s) const {
    check_length(*layout_, s);
    PauliOperator recovery(layout_->num_data_qubits());
    mwpm_correct(x_graph_, defects_of(*layout_, x_graph_, s), recovery);
    mwpm_correct(z_graph_, defects_of(*layout_, z_graph_, s), recovery);
    return recovery;
}

HdrgDecoder::HdrgDecoder(const CodeLayout& layout)
    : layout_(&layout), x_graph_(layout, StabilizerType::X), z_graph_(layout, StabilizerType::Z) {}

PauliOperator HdrgDecoder::decode(const Syndrome& s) const {
    check_length(*layout_, s);
    PauliOperator recovery(layout_->num_data_qubits());
    hdrg_correct(x_graph_, defects_of(*layout_, x_graph_, s), recovery);
    hdrg_correct(z_graph_, defects_of(*layout_, z_graph_, s), recovery);
    return recovery;
}

PauliOperator mwpm_decode(const CodeLayout& layout, const Syndrome& s) { return MwpmDecoder(layout).decode(s); }
PauliOperator hdrg_decode(const CodeLayout& layout, const Syndrome& s) { return HdrgDecoder(layout).decode(s); }

const std::vector<std::string>& decoder_names() {
    static const std::vector<std::string> names{"mwpm", "hdrg"};
    return names;
}

int decoder_label(std::string_view name) {
    const auto& names = decoder_names();
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::invalid_argument("unknown decoder '" + std::string(name) + "'");
    return static_cast<int>(it - names.begin());
}

std::unique_ptr<Decoder> make_decoder(std::string_view name, const CodeLayout& layout) {
    switch (decoder_label(name)) {
        case 0: return std::make_unique<MwpmDecoder>(layout);
        default: return std::make_unique<HdrgDecoder>(layout);
    }
}

std::vector<std::unique_ptr<Decoder>> make_decoders(const std::vector<std::string>& names, const CodeLayout& layout) {
    std::vector<std::unique_ptr<Decoder>> out;
    for (const auto& n : names) out.push_back(make_decoder(n, layout));
    return out;
}

}  // namespace qens
