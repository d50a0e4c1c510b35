#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qens {

/// Raised when a decoder or pipeline stage breaks a stated contract, for
/// example a recovery whose syndrome differs from the input syndrome.
class ContractViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Single-qubit Pauli with phase discarded. Bit 0 is the X component and
/// bit 1 the Z component, so multiplication is XOR.
enum class Pauli : std::uint8_t { I = 0, X = 1, Z = 2, Y = 3 };

inline Pauli operator*(Pauli a, Pauli b) {
    return static_cast<Pauli>(static_cast<std::uint8_t>(a) ^ static_cast<std::uint8_t>(b));
}
inline bool has_x(Pauli p) { return (static_cast<std::uint8_t>(p) & 1u) != 0; }
inline bool has_z(Pauli p) { return (static_cast<std::uint8_t>(p) & 2u) != 0; }
char pauli_char(Pauli p);

/// Logical class of a residual operator.
enum class LogicalClass : std::uint8_t { I = 0, X = 1, Z = 2, Y = 3 };
char logical_char(LogicalClass c);

/// Pauli operator on data qubits. Qubits beyond size() are identity, so an
/// operator built for one layout can be composed with one of any size.
class PauliOperator {
public:
    PauliOperator() = default;
    explicit PauliOperator(std::size_t qubits) : ops_(qubits, Pauli::I) {}

    Pauli at(std::size_t qubit) const { return qubit < ops_.size() ? ops_[qubit] : Pauli::I; }
    void set(std::size_t qubit, Pauli p);
    /// Left-multiplies qubit by p.
    void apply(std::size_t qubit, Pauli p);

    std::size_t size() const { return ops_.size(); }
    std::size_t weight() const;
    bool is_identity() const { return weight() == 0; }
    /// Sorted (qubit, pauli) pairs of the non-identity entries.
    std::vector<std::pair<std::size_t, Pauli>> support() const;
    const std::vector<Pauli>& dense() const { return ops_; }
    std::string to_string() const;

    friend bool operator==(const PauliOperator& a, const PauliOperator& b);

private:
    std::vector<Pauli> ops_;
};

PauliOperator compose(const PauliOperator& a, const PauliOperator& b);

/// Stabilizer flips: X-stabilizers in row-major order, then Z-stabilizers.
struct Syndrome {
    std::vector<std::uint8_t> bits;

    std::size_t size() const { return bits.size(); }
    std::size_t popcount() const;
    bool is_trivial() const { return popcount() == 0; }
    friend bool operator==(const Syndrome&, const Syndrome&) = default;
};

struct GridPoint {
    int row = 0;
    int col = 0;
    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

enum class StabilizerType : std::uint8_t { X = 0, Z = 1 };

struct Stabilizer {
    GridPoint position;
    StabilizerType type = StabilizerType::X;
    std::vector<int> support;  // data-qubit indices, ascending
};

enum class CellKind : std::uint8_t { data, x_stabilizer, z_stabilizer };

struct Cell {
    CellKind kind = CellKind::data;
    int index = -1;  // data-qubit index or syndrome index
};

/// Planar surface code of distance L on a (2L-1) x (2L-1) grid. Data qubits
/// sit on cells with even row+col, X-stabilizers on (odd, even) cells and
/// Z-stabilizers on (even, odd) cells. Immutable after construction.
class CodeLayout {
public:
    explicit CodeLayout(int distance);

    int distance() const { return distance_; }
    int grid_side() const { return 2 * distance_ - 1; }
    std::size_t num_data_qubits() const { return data_qubits_.size(); }
    std::size_t num_stabilizers() const { return stabilizers_.size(); }
    std::size_t num_x_stabilizers() const { return num_x_; }
    std::size_t num_z_stabilizers() const { return stabilizers_.size() - num_x_; }
    std::size_t num_cells() const { return cells_.size(); }

    const std::vector<GridPoint>& data_qubits() const { return data_qubits_; }
    /// Syndrome-indexed: X-stabilizers first, then Z-stabilizers.
    const std::vector<Stabilizer>& stabilizers() const { return stabilizers_; }
    /// Syndrome indices of the X-stabilizers touching qubit q.
    const std::vector<int>& x_checks_of(std::size_t q) const { return x_checks_[q]; }
    const std::vector<int>& z_checks_of(std::size_t q) const { return z_checks_[q]; }
    const Cell& cell(int row, int col) const { return cells_[row * grid_side() + col]; }
    /// First syndrome index of the given stabilizer type.
    std::size_t type_offset(StabilizerType t) const { return t == StabilizerType::X ? 0 : num_x_; }
    std::size_t type_count(StabilizerType t) const {
        return t == StabilizerType::X ? num_x_stabilizers() : num_z_stabilizers();
    }

    /// X on every data qubit of row 0.
    const std::vector<int>& logical_x_support() const { return logical_x_; }
    /// Z on every data qubit of column 0.
    const std::vector<int>& logical_z_support() const { return logical_z_; }

    PauliOperator logical_x() const;
    PauliOperator logical_z() const;
    /// The stabilizer generator at syndrome index i as a Pauli operator.
    PauliOperator stabilizer_operator(std::size_t i) const;

private:
    int distance_;
    std::size_t num_x_ = 0;
    std::vector<GridPoint> data_qubits_;
    std::vector<Stabilizer> stabilizers_;
    std::vector<std::vector<int>> x_checks_;
    std::vector<std::vector<int>> z_checks_;
    std::vector<Cell> cells_;
    std::vector<int> logical_x_;
    std::vector<int> logical_z_;
};

CodeLayout build_layout(int distance);

Syndrome extract_syndrome(const CodeLayout& layout, const PauliOperator& error);

/// Commutation class of residual = recovery * error against the fixed logical
/// representatives. Throws ContractViolation when the residual has a
/// non-trivial syndrome.
LogicalClass logical_outcome(const CodeLayout& layout, const PauliOperator& error,
                             const PauliOperator& recovery);

/// Per-type defect count: popcount of that type's syndrome segment.
std::size_t defect_count(const CodeLayout& layout, const Syndrome& s, StabilizerType t);

}  // namespace qens
