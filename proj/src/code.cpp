#include "qens/code.hpp"

#include <algorithm>

namespace qens {

char pauli_char(Pauli p) {
    switch (p) {
        case Pauli::I: return 'I';
        case Pauli::X: return 'X';
        case Pauli::Z: return 'Z';
        case Pauli::Y: return 'Y';
    }
    return '?';
}

char logical_char(LogicalClass c) { return pauli_char(static_cast<Pauli>(c)); }

void PauliOperator::set(std::size_t qubit, Pauli p) {
    if (qubit >= ops_.size()) {
        if (p == Pauli::I) return;
        ops_.resize(qubit + 1, Pauli::I);
    }
    ops_[qubit] = p;
}

void PauliOperator::apply(std::size_t qubit, Pauli p) { set(qubit, p * at(qubit)); }

std::size_t PauliOperator::weight() const {
    return static_cast<std::size_t>(std::count_if(ops_.begin(), ops_.end(), [](Pauli p) { return p != Pauli::I; }));
}

std::vector<std::pair<std::size_t, Pauli>> PauliOperator::support() const {
    std::vector<std::pair<std::size_t, Pauli>> out;
    for (std::size_t q = 0; q < ops_.size(); ++q)
        if (ops_[q] != Pauli::I) out.emplace_back(q, ops_[q]);
    return out;
}

std::string PauliOperator::to_string() const {
    std::string s;
    for (auto [q, p] : support()) {
        if (!s.empty()) s += ' ';
        s += pauli_char(p);
        s += std::to_string(q);
    }
    return s.empty() ? "I" : s;
}

bool operator==(const PauliOperator& a, const PauliOperator& b) {
    const std::size_t n = std::max(a.size(), b.size());
    for (std::size_t q = 0; q < n; ++q)
        if (a.at(q) != b.at(q)) return false;
    return true;
}

PauliOperator compose(const PauliOperator& a, const PauliOperator& b) {
    PauliOperator out(std::max(a.size(), b.size()));
    for (std::size_t q = 0; q < out.size(); ++q) out.set(q, a.at(q) * b.at(q));
    return out;
}

std::size_t Syndrome::popcount() const {
    return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

CodeLayout::CodeLayout(int distance) : distance_(distance) {
    if (distance < 2) throw std::invalid_argument("surface code distance must be >= 2, got " + std::to_string(distance));
    const int side = grid_side();
    cells_.resize(static_cast<std::size_t>(side) * side);

    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c)
            if ((r + c) % 2 == 0) {
                cells_[r * side + c] = {CellKind::data, static_cast<int>(data_qubits_.size())};
                data_qubits_.push_back({r, c});
            }

    auto add_stabilizers = [&](StabilizerType type, CellKind kind, int row_parity) {
        for (int r = 0; r < side; ++r) {
            if (r % 2 != row_parity) continue;
            for (int c = 0; c < side; ++c) {
                if ((r + c) % 2 == 0) continue;
                Stabilizer s{{r, c}, type, {}};
                const int nbrs[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
                for (auto& rc : nbrs)
                    if (rc[0] >= 0 && rc[0] < side && rc[1] >= 0 && rc[1] < side)
                        s.support.push_back(cells_[rc[0] * side + rc[1]].index);
                std::sort(s.support.begin(), s.support.end());
                cells_[r * side + c] = {kind, static_cast<int>(stabilizers_.size())};
                stabilizers_.push_back(std::move(s));
            }
        }
    };
    add_stabilizers(StabilizerType::X, CellKind::x_stabilizer, 1);
    num_x_ = stabilizers_.size();
    add_stabilizers(StabilizerType::Z, CellKind::z_stabilizer, 0);

    x_checks_.resize(data_qubits_.size());
    z_checks_.resize(data_qubits_.size());
    for (std::size_t i = 0; i < stabilizers_.size(); ++i)
        for (int q : stabilizers_[i].support)
            (stabilizers_[i].type == StabilizerType::X ? x_checks_ : z_checks_)[q].push_back(static_cast<int>(i));

    for (int c = 0; c < side; c += 2) logical_x_.push_back(cells_[c].index);
    for (int r = 0; r < side; r += 2) logical_z_.push_back(cells_[r * side].index);
}

PauliOperator CodeLayout::logical_x() const {
    PauliOperator p(num_data_qubits());
    for (int q : logical_x_) p.set(q, Pauli::X);
    return p;
}

PauliOperator CodeLayout::logical_z() const {
    PauliOperator p(num_data_qubits());
    for (int q : logical_z_) p.set(q, Pauli::Z);
    return p;
}

PauliOperator CodeLayout::stabilizer_operator(std::size_t i) const {
    const Stabilizer& s = stabilizers_.at(i);
    PauliOperator p(num_data_qubits());
    for (int q : s.support) p.set(q, s.type == StabilizerType::X ? Pauli::X : Pauli::Z);
    return p;
}

CodeLayout build_layout(int distance) { return CodeLayout(distance); }

Syndrome extract_syndrome(const CodeLayout& layout, const PauliOperator& error) {
    const std::size_t n = layout.num_data_qubits();
    Syndrome s;
    s.bits.assign(layout.num_stabilizers(), 0);
    const auto& ops = error.dense();
    for (std::size_t q = 0; q < ops.size(); ++q) {
        const Pauli p = ops[q];
        if (p == Pauli::I) continue;
        if (q >= n)
            throw std::out_of_range("Pauli operator acts on qubit " + std::to_string(q) + " outside a layout of " +
                                    std::to_string(n) + " data qubits");
        if (has_z(p))
            for (int i : layout.x_checks_of(q)) s.bits[i] ^= 1;
        if (has_x(p))
            for (int i : layout.z_checks_of(q)) s.bits[i] ^= 1;
    }
    return s;
}

LogicalClass logical_outcome(const CodeLayout& layout, const PauliOperator& error, const PauliOperator& recovery) {
    const PauliOperator residual = compose(recovery, error);
    if (!extract_syndrome(layout, residual).is_trivial())
        throw ContractViolation("recovery does not reproduce the error syndrome: residual " + residual.to_string());
    bool anti_z = false;  // X components on the logical-Z column
    bool anti_x = false;  // Z components on the logical-X row
    for (int q : layout.logical_z_support()) anti_z ^= has_x(residual.at(q));
    for (int q : layout.logical_x_support()) anti_x ^= has_z(residual.at(q));
    if (anti_z && anti_x) return LogicalClass::Y;
    if (anti_z) return LogicalClass::X;
    if (anti_x) return LogicalClass::Z;
    return LogicalClass::I;
}

std::size_t defect_count(const CodeLayout& layout, const Syndrome& s, StabilizerType t) {
    const std::size_t begin = layout.type_offset(t);
    const std::size_t end = begin + layout.type_count(t);
    std::size_t count = 0;
    for (std::size_t i = begin; i < end && i < s.bits.size(); ++i) count += s.bits[i] != 0;
    return count;
}

}  // namespace qens
