#include <random>
#include <set>

#include "doctest.h"
#include "qens/code.hpp"

using namespace qens;

namespace {

PauliOperator random_operator(std::mt19937_64& rng, std::size_t n, double density) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> kind(1, 3);
    PauliOperator p(n);
    for (std::size_t q = 0; q < n; ++q)
        if (u(rng) < density) p.set(q, static_cast<Pauli>(kind(rng)));
    return p;
}

std::size_t overlap(const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t c = 0;
    for (int x : a)
        for (int y : b) c += x == y;
    return c;
}

}  // namespace

TEST_CASE("layout counts match the surface code formulas") {
    for (int L = 2; L <= 13; ++L) {
        CodeLayout layout = build_layout(L);
        const std::size_t n = L * L + (L - 1) * (L - 1);
        const std::size_t m = 2 * L * (L - 1);
        CHECK(layout.num_data_qubits() == n);
        CHECK(layout.num_stabilizers() == m);
        CHECK(layout.num_x_stabilizers() == static_cast<std::size_t>(L * (L - 1)));
        CHECK(layout.num_z_stabilizers() == static_cast<std::size_t>(L * (L - 1)));
        CHECK(n + m == static_cast<std::size_t>((2 * L - 1) * (2 * L - 1)));
        CHECK(layout.num_cells() == n + m);
    }
    CodeLayout l5(5);
    CHECK(l5.num_data_qubits() == 41);
    CHECK(l5.num_stabilizers() == 40);
    CHECK(l5.num_cells() == 81);
    CodeLayout l2(2);
    CHECK(l2.num_data_qubits() == 5);
    CHECK(l2.num_stabilizers() == 4);
    CHECK(l2.num_cells() == 9);
    CodeLayout l3(3);
    CHECK(l3.num_data_qubits() == 13);
    CHECK(l3.num_x_stabilizers() == 6);
    CHECK(l3.num_z_stabilizers() == 6);
}

TEST_CASE("layout rejects distance below two") {
    CHECK_THROWS_AS(build_layout(1), std::invalid_argument);
    CHECK_THROWS_AS(build_layout(0), std::invalid_argument);
    CHECK_THROWS_AS(build_layout(-3), std::invalid_argument);
}

TEST_CASE("layout geometry and stabilizer supports") {
    for (int L = 2; L <= 9; ++L) {
        CodeLayout layout(L);
        const int side = 2 * L - 1;
        for (const auto& q : layout.data_qubits()) CHECK((q.row + q.col) % 2 == 0);
        for (const auto& s : layout.stabilizers()) {
            if (s.type == StabilizerType::X) {
                CHECK(s.position.row % 2 == 1);
                CHECK(s.position.col % 2 == 0);
            } else {
                CHECK(s.position.row % 2 == 0);
                CHECK(s.position.col % 2 == 1);
            }
            const bool on_edge = s.position.row == 0 || s.position.col == 0 || s.position.row == side - 1 ||
                                 s.position.col == side - 1;
            CHECK(s.support.size() >= 2);
            CHECK(s.support.size() <= 4);
            if (!on_edge) CHECK(s.support.size() == 4);
            if (s.support.size() < 4) CHECK(on_edge);
        }
        for (std::size_t q = 0; q < layout.num_data_qubits(); ++q) {
            const auto& pos = layout.data_qubits()[q];
            const bool bulk = pos.row > 0 && pos.col > 0 && pos.row < side - 1 && pos.col < side - 1;
            if (bulk) {
                CHECK(layout.x_checks_of(q).size() == 2);
                CHECK(layout.z_checks_of(q).size() == 2);
            }
        }
        // All stabilizer pairs commute: X/Z supports overlap evenly.
        for (std::size_t i = 0; i < layout.num_x_stabilizers(); ++i)
            for (std::size_t j = layout.num_x_stabilizers(); j < layout.num_stabilizers(); ++j)
                CHECK(overlap(layout.stabilizers()[i].support, layout.stabilizers()[j].support) % 2 == 0);
        CHECK(overlap(layout.logical_x_support(), layout.logical_z_support()) == 1);
        CHECK(extract_syndrome(layout, layout.logical_x()).is_trivial());
        CHECK(extract_syndrome(layout, layout.logical_z()).is_trivial());
    }
}

TEST_CASE("cells map back onto qubits and stabilizers") {
    CodeLayout layout(4);
    for (std::size_t q = 0; q < layout.num_data_qubits(); ++q) {
        const auto& pos = layout.data_qubits()[q];
        CHECK(layout.cell(pos.row, pos.col).kind == CellKind::data);
        CHECK(layout.cell(pos.row, pos.col).index == static_cast<int>(q));
    }
    for (std::size_t i = 0; i < layout.num_stabilizers(); ++i) {
        const auto& pos = layout.stabilizers()[i].position;
        CHECK(layout.cell(pos.row, pos.col).index == static_cast<int>(i));
    }
}

TEST_CASE("Pauli algebra") {
    PauliOperator a, b;
    a.set(3, Pauli::X);
    b.set(3, Pauli::X);
    CHECK(compose(a, b).is_identity());
    b.set(3, Pauli::Z);
    CHECK(compose(a, b).at(3) == Pauli::Y);
    CHECK(compose(a, b).weight() == 1);
    CHECK(PauliOperator().weight() == 0);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        PauliOperator r = random_operator(rng, 13, 0.4);
        CHECK(compose(r, r).is_identity());
    }
    PauliOperator padded(40);
    CHECK(padded == PauliOperator());
}

TEST_CASE("syndrome extraction") {
    CodeLayout layout(3);
    CHECK(extract_syndrome(layout, PauliOperator(13)).is_trivial());
    CHECK(extract_syndrome(layout, PauliOperator()).size() == 12);

    SUBCASE("single Z on a bulk qubit flags two adjacent X-stabilizers") {
        const int q = layout.cell(2, 2).index;
        PauliOperator e;
        e.set(q, Pauli::Z);
        Syndrome s = extract_syndrome(layout, e);
        CHECK(s.popcount() == 2);
        CHECK(defect_count(layout, s, StabilizerType::X) == 2);
        CHECK(s.bits[layout.cell(1, 2).index] == 1);
        CHECK(s.bits[layout.cell(3, 2).index] == 1);
    }
    SUBCASE("weight-one errors are always detected") {
        for (int L : {2, 3, 5, 7}) {
            CodeLayout l(L);
            for (std::size_t q = 0; q < l.num_data_qubits(); ++q)
                for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z}) {
                    PauliOperator e;
                    e.set(q, p);
                    const std::size_t bits = extract_syndrome(l, e).popcount();
                    CHECK(bits >= 1);
                    CHECK(bits <= 4);
                }
        }
    }
    SUBCASE("stabilizer group elements have trivial syndrome") {
        // All 2^12 products of the generators at L=3.
        const std::size_t m = layout.num_stabilizers();
        for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
            PauliOperator g(layout.num_data_qubits());
            for (std::size_t i = 0; i < m; ++i)
                if (mask >> i & 1u) g = compose(g, layout.stabilizer_operator(i));
            CHECK(extract_syndrome(layout, g).is_trivial());
        }
    }
    SUBCASE("out-of-range qubit") {
        PauliOperator e;
        e.set(13, Pauli::X);
        CHECK_THROWS_AS(extract_syndrome(layout, e), std::out_of_range);
    }
}

TEST_CASE("syndrome is linear under composition") {
    CodeLayout layout(3);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 2000; ++i) {
        PauliOperator a = random_operator(rng, 13, 0.3);
        PauliOperator b = random_operator(rng, 13, 0.3);
        Syndrome sa = extract_syndrome(layout, a);
        Syndrome sb = extract_syndrome(layout, b);
        Syndrome sab = extract_syndrome(layout, compose(a, b));
        for (std::size_t k = 0; k < sa.size(); ++k) REQUIRE(sab.bits[k] == (sa.bits[k] ^ sb.bits[k]));
    }
}

TEST_CASE("logical outcome classes") {
    CodeLayout layout(3);
    std::mt19937_64 rng(9);
    PauliOperator e = random_operator(rng, 13, 0.3);
    CHECK(logical_outcome(layout, e, e) == LogicalClass::I);
    CHECK(logical_outcome(layout, e, compose(e, layout.logical_x())) == LogicalClass::X);
    CHECK(logical_outcome(layout, e, compose(e, layout.logical_z())) == LogicalClass::Z);
    CHECK(logical_outcome(layout, e, compose(compose(e, layout.logical_x()), layout.logical_z())) == LogicalClass::Y);

    // Invariance under multiplication by any stabilizer product.
    const std::size_t m = layout.num_stabilizers();
    for (std::uint32_t mask = 0; mask < (1u << m); mask += 7) {
        PauliOperator g(layout.num_data_qubits());
        for (std::size_t i = 0; i < m; ++i)
            if (mask >> i & 1u) g = compose(g, layout.stabilizer_operator(i));
        CHECK(logical_outcome(layout, e, compose(e, g)) == LogicalClass::I);
        CHECK(logical_outcome(layout, e, compose(compose(e, g), layout.logical_x())) == LogicalClass::X);
    }
    for (std::size_t i = 0; i < m; ++i)
        CHECK(logical_outcome(layout, e, compose(compose(e, layout.logical_z()), layout.stabilizer_operator(i))) ==
              LogicalClass::Z);

    PauliOperator bad = e;
    bad.apply(layout.cell(2, 2).index, Pauli::X);
    CHECK_THROWS_AS(logical_outcome(layout, e, bad), ContractViolation);
}
