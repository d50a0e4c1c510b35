#include <cstdlib>
#include <stdexcept>

#include "doctest.h"
#include "qens/decoders.hpp"
#include "qens/noise.hpp"

using namespace qens;

namespace {

bool corrects(const CodeLayout& layout, const Decoder& d, const PauliOperator& e) {
    const PauliOperator r = d.decode(extract_syndrome(layout, e));
    return logical_outcome(layout, e, r) == LogicalClass::I;
}

}  // namespace

TEST_CASE("decoding graph distances follow the sublattice") {
    CodeLayout layout(5);
    DecodingGraph gx(layout, StabilizerType::X);
    const std::size_t nx = layout.num_x_stabilizers();
    for (std::size_t a = 0; a < nx; ++a)
        for (std::size_t b = 0; b < nx; ++b) {
            const auto& pa = layout.stabilizers()[a].position;
            const auto& pb = layout.stabilizers()[b].position;
            CHECK(gx.distance(a, b) == (std::abs(pa.row - pb.row) + std::abs(pa.col - pb.col)) / 2);
            CHECK(static_cast<int>(gx.path(a, b).size()) == gx.distance(a, b));
        }
    // X-stabilizers sit on odd rows; Z errors reach the top and bottom edges.
    const int side = layout.grid_side();
    for (std::size_t a = 0; a < nx; ++a) {
        const int r = layout.stabilizers()[a].position.row;
        CHECK(gx.boundary_distance(a) == std::min((r + 1) / 2, (side - r) / 2));
    }
    DecodingGraph gz(layout, StabilizerType::Z);
    for (int a = 0; a < gz.size(); ++a) {
        const int c = layout.stabilizers()[a + nx].position.col;
        CHECK(gz.boundary_distance(a) == std::min((c + 1) / 2, (side - c) / 2));
    }
}

TEST_CASE("paths reproduce their endpoints' syndrome") {
    CodeLayout layout(5);
    for (StabilizerType t : {StabilizerType::X, StabilizerType::Z}) {
        DecodingGraph g(layout, t);
        const std::size_t off = layout.type_offset(t);
        for (int a = 0; a < g.size(); ++a)
            for (int b = 0; b <= g.size(); ++b) {
                if (a == b) continue;
                PauliOperator chain;
                for (int q : g.path(a, b)) chain.apply(q, g.detected_pauli());
                Syndrome s = extract_syndrome(layout, chain);
                Syndrome want;
                want.bits.assign(layout.num_stabilizers(), 0);
                want.bits[off + a] = 1;
                if (b < g.size()) want.bits[off + b] = 1;
                CHECK(s == want);
            }
    }
}

TEST_CASE("zero syndrome gives identity") {
    CodeLayout layout(5);
    Syndrome zero{std::vector<std::uint8_t>(layout.num_stabilizers(), 0)};
    CHECK(mwpm_decode(layout, zero).is_identity());
    CHECK(hdrg_decode(layout, zero).is_identity());
}

TEST_CASE("malformed syndrome length") {
    CodeLayout layout(3);
    Syndrome bad{std::vector<std::uint8_t>(5, 0)};
    CHECK_THROWS_AS(mwpm_decode(layout, bad), std::invalid_argument);
    CHECK_THROWS_AS(hdrg_decode(layout, bad), std::invalid_argument);
}

TEST_CASE("MWPM corrects every error up to half the distance") {
    for (int L : {3, 5}) {
        CodeLayout layout(L);
        MwpmDecoder mwpm(layout);
        const std::size_t n = layout.num_data_qubits();
        const Pauli kinds[3] = {Pauli::X, Pauli::Y, Pauli::Z};
        long failures = 0;
        for (std::size_t q = 0; q < n; ++q)
            for (Pauli p : kinds) {
                PauliOperator e;
                e.set(q, p);
                failures += !corrects(layout, mwpm, e);
            }
        if (L == 5)
            for (std::size_t q1 = 0; q1 < n; ++q1)
                for (std::size_t q2 = q1 + 1; q2 < n; ++q2)
                    for (Pauli p1 : kinds)
                        for (Pauli p2 : kinds) {
                            PauliOperator e;
                            e.set(q1, p1);
                            e.set(q2, p2);
                            failures += !corrects(layout, mwpm, e);
                        }
        CHECK(failures == 0);
    }
}

TEST_CASE("HDRG corrects every weight-one error") {
    for (int L : {3, 5, 7}) {
        CodeLayout layout(L);
        HdrgDecoder hdrg(layout);
        long failures = 0;
        for (std::size_t q = 0; q < layout.num_data_qubits(); ++q)
            for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z}) {
                PauliOperator e;
                e.set(q, p);
                failures += !corrects(layout, hdrg, e);
            }
        CHECK(failures == 0);
    }
}

TEST_CASE("decoder contract and determinism on random syndromes") {
    for (int L : {3, 5, 7}) {
        CodeLayout layout(L);
        auto decoders = make_decoders(decoder_names(), layout);
        for (std::uint64_t t = 0; t < 1500; ++t) {
            const PauliOperator e = sample_error(layout, {0.12, 99, static_cast<std::uint64_t>(L)}, t);
            const Syndrome s = extract_syndrome(layout, e);
            for (const auto& d : decoders) {
                const PauliOperator r = d->decode(s);
                REQUIRE(extract_syndrome(layout, r) == s);
                REQUIRE(d->decode(s) == r);
            }
        }
    }
}

TEST_CASE("registry") {
    CHECK(decoder_label("mwpm") == 0);
    CHECK(decoder_label("hdrg") == 1);
    CHECK_THROWS_AS(decoder_label("union-find"), std::invalid_argument);
    CodeLayout layout(3);
    CHECK(make_decoder("hdrg", layout)->name() == "hdrg");
}

TEST_CASE("there are syndromes where HDRG succeeds and MWPM fails") {
    CodeLayout layout(5);
    MwpmDecoder mwpm(layout);
    HdrgDecoder hdrg(layout);
    int found = 0;
    for (std::uint64_t t = 0; t < 20000 && found == 0; ++t) {
        const PauliOperator e = sample_error(layout, {0.1, 1, 0}, t);
        found += !corrects(layout, mwpm, e) && corrects(layout, hdrg, e);
    }
    CHECK(found > 0);
}
