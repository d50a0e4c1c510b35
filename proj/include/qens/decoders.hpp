#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "qens/code.hpp"

namespace qens {

/// Lattice of one stabilizer type: nodes are the stabilizers, edges are the
/// data qubits flagging two of them, and qubits flagging only one stabilizer
/// lead to a virtual boundary node with index size().
class DecodingGraph {
public:
    DecodingGraph(const CodeLayout& layout, StabilizerType type);

    StabilizerType type() const { return type_; }
    int size() const { return static_cast<int>(nodes_); }
    int boundary() const { return static_cast<int>(nodes_); }
    /// Shortest-path length between nodes; either may be boundary().
    int distance(int a, int b) const { return dist_[static_cast<std::size_t>(a) * (nodes_ + 1) + b]; }
    int boundary_distance(int a) const { return distance(a, boundary()); }
    /// Data qubits along the deterministic shortest path from a to b. Row
    /// steps are preferred over column steps, then lower qubit index.
    std::vector<int> path(int a, int b) const;
    /// Pauli that this graph's stabilizers detect.
    Pauli detected_pauli() const { return type_ == StabilizerType::X ? Pauli::Z : Pauli::X; }

private:
    struct Step {
        int node;
        int qubit;
    };

    StabilizerType type_;
    std::size_t nodes_;
    std::vector<std::vector<Step>> adj_;  // includes the boundary node
    std::vector<int> dist_;
};

/// Common decoder surface: a deterministic map from syndromes to recoveries
/// whose syndrome equals the input.
class Decoder {
public:
    virtual ~Decoder() = default;
    virtual std::string_view name() const = 0;
    virtual PauliOperator decode(const Syndrome& s) const = 0;
};

/// Minimum-weight perfect matching, X and Z defects decoded independently.
class MwpmDecoder final : public Decoder {
public:
    explicit MwpmDecoder(const CodeLayout& layout);
    std::string_view name() const override { return "mwpm"; }
    PauliOperator decode(const Syndrome& s) const override;

private:
    const CodeLayout* layout_;
    DecodingGraph x_graph_;
    DecodingGraph z_graph_;
};

/// Hard-decision renormalization group: clusters grown with a linear radius
/// schedule; neutral clusters are annihilated greedily.
class HdrgDecoder final : public Decoder {
public:
    explicit HdrgDecoder(const CodeLayout& layout);
    std::string_view name() const override { return "hdrg"; }
    PauliOperator decode(const Syndrome& s) const override;

private:
    const CodeLayout* layout_;
    DecodingGraph x_graph_;
    DecodingGraph z_graph_;
};

PauliOperator mwpm_decode(const CodeLayout& layout, const Syndrome& s);
PauliOperator hdrg_decode(const CodeLayout& layout, const Syndrome& s);

/// Stable registry: label 0 = "mwpm", label 1 = "hdrg".
const std::vector<std::string>& decoder_names();
int decoder_label(std::string_view name);
std::unique_ptr<Decoder> make_decoder(std::string_view name, const CodeLayout& layout);
/// Decoders for the given registry names, in order.
std::vector<std::unique_ptr<Decoder>> make_decoders(const std::vector<std::string>& names, const CodeLayout& layout);

}  // namespace qens
