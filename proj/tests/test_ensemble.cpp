#include <random>
#include <sstream>

#include "doctest.h"
#include "qens/ensemble.hpp"
#include "qens/harness.hpp"
#include "qens/noise.hpp"

using namespace qens;

namespace {

struct Fixture {
    explicit Fixture(int L) : layout(L), mwpm(layout), hdrg(layout), decoders{&mwpm, &hdrg} {}
    CodeLayout layout;
    MwpmDecoder mwpm;
    HdrgDecoder hdrg;
    std::vector<const Decoder*> decoders;
};

// Classifier whose output ignores the input and always favours `label`.
nn::Model<float> forced_model(int L, int label) {
    nn::Model<float> m(nn::ModelSpec::cnn(L, 2, 2, 4));
    m.initialize(1);
    auto params = m.parameters();
    params[params.size() - 2].value->setZero();
    params.back().value->setZero();
    (*params.back().value)(0, label) = 5.0f;
    return m;
}

Syndrome random_syndrome_of_error(const CodeLayout& layout, double p, std::uint64_t seed, std::uint64_t t) {
    return extract_syndrome(layout, sample_error(layout, {p, seed, 17}, t));
}

}  // namespace

TEST_CASE("oracle selector prefers the lowest successful decoder") {
    CHECK(oracle_selector(0b01) == 0);
    CHECK(oracle_selector(0b10) == 1);
    CHECK(oracle_selector(0b11) == 0);
    CHECK(oracle_selector(0b100) == 2);
    CHECK_THROWS_AS(oracle_selector(0), std::invalid_argument);
}

TEST_CASE("outcome masks classify disagreements") {
    Fixture f(5);
    bool saw_mwpm_only = false, saw_both = false, saw_neither = false;
    for (std::uint64_t t = 0; t < 5000 && !(saw_mwpm_only && saw_both && saw_neither); ++t) {
        const PauliOperator e = sample_error(f.layout, {0.12, 3, 0}, t);
        const Syndrome s = extract_syndrome(f.layout, e);
        const std::uint8_t mask = outcome_mask(f.layout, f.decoders, e, s);
        const bool m_ok = logical_outcome(f.layout, e, f.mwpm.decode(s)) == LogicalClass::I;
        const bool h_ok = logical_outcome(f.layout, e, f.hdrg.decode(s)) == LogicalClass::I;
        CHECK(mask == ((m_ok ? 1 : 0) | (h_ok ? 2 : 0)));
        saw_mwpm_only |= mask == 1;
        saw_both |= mask == 3;
        saw_neither |= mask == 0;
    }
    CHECK(saw_mwpm_only);
    CHECK(saw_both);
    CHECK(saw_neither);
}

TEST_CASE("generate_dataset keeps exactly the disagreeing trials in trial order") {
    Fixture f(3);
    const double p = 0.1;
    GenerationReport report;
    GenerationOptions opts;
    opts.block_size = 64;
    const Dataset data = generate_dataset(f.layout, f.decoders, p, 150, 21, opts, &report);
    REQUIRE(data.samples.size() == 150);
    CHECK(data.distance == 3);
    CHECK(data.decoder_names == std::vector<std::string>{"mwpm", "hdrg"});
    CHECK(data.seed == 21);
    CHECK_NOTHROW(data.validate());

    // Independent replay of the trial stream.
    const NoiseConfig noise{p, 21, generation_stream(p)};
    std::vector<Sample> expect;
    std::uint64_t t = 0, both = 0, neither = 0;
    for (; expect.size() < 150; ++t) {
        const PauliOperator e = sample_error(f.layout, noise, t);
        const Syndrome s = extract_syndrome(f.layout, e);
        const bool m_ok = logical_outcome(f.layout, e, f.mwpm.decode(s)) == LogicalClass::I;
        const bool h_ok = logical_outcome(f.layout, e, f.hdrg.decode(s)) == LogicalClass::I;
        if (m_ok && h_ok) ++both;
        else if (!m_ok && !h_ok) ++neither;
        else expect.push_back({s, static_cast<std::uint8_t>((m_ok ? 1 : 0) | (h_ok ? 2 : 0)), m_ok ? 0 : 1});
    }
    CHECK(data.samples == expect);
    CHECK(report.trials == t);
    CHECK(report.all_succeeded == both);
    CHECK(report.all_failed == neither);
    CHECK(report.kept == 150);
    CHECK(report.discard_fraction() == doctest::Approx(double(both + neither) / double(t)));

    opts.threads = 3;
    CHECK(generate_dataset(f.layout, f.decoders, p, 150, 21, opts) == data);
    opts.block_size = 1000;
    CHECK(generate_dataset(f.layout, f.decoders, p, 150, 21, opts) == data);
    CHECK_FALSE(generate_dataset(f.layout, f.decoders, p, 150, 22, opts) == data);

    CHECK_THROWS_AS(generate_dataset(f.layout, f.decoders, 0.0, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(generate_dataset(f.layout, {&f.mwpm}, 0.1, 10, 1), std::invalid_argument);
    CHECK(generate_dataset(f.layout, f.decoders, 0.1, 0, 1).samples.empty());
}

TEST_CASE("ensemble decoding dispatches to the selected decoder") {
    Fixture f(5);
    const Syndrome zero{std::vector<std::uint8_t>(f.layout.num_stabilizers(), 0)};
    for (int label : {0, 1}) {
        const nn::Model<float> model = forced_model(5, label);
        EnsembleDecoder ens(f.layout, model, f.decoders);
        CHECK(ens.name() == "ensemble");
        CHECK(ensemble_decode(model, f.decoders, f.layout, zero).is_identity());
        for (std::uint64_t t = 0; t < 300; ++t) {
            const Syndrome s = random_syndrome_of_error(f.layout, 0.1, 5, t);
            CHECK(ens.select(s) == label);
            const PauliOperator r = ens.decode(s);
            CHECK(r == f.decoders[label]->decode(s));
            CHECK(extract_syndrome(f.layout, r) == s);
        }
    }
    const nn::Model<float> model = forced_model(5, 0);
    CHECK_THROWS_AS(EnsembleDecoder(f.layout, model, {&f.mwpm}), std::invalid_argument);
    const nn::Model<float> other = forced_model(3, 0);
    CHECK_THROWS_AS(EnsembleDecoder(f.layout, other, f.decoders), std::invalid_argument);
    EnsembleDecoder ens(f.layout, model, f.decoders);
    CHECK_THROWS_AS(ens.decode(Syndrome{{1, 0}}), std::invalid_argument);
}

TEST_CASE("oracle ensemble success equals at-least-one-success, exactly") {
    Fixture f(5);
    nn::Model<float> model(nn::ModelSpec::cnn(5, 2, 4, 8));
    model.initialize(9);
    EnsembleDecoder ens(f.layout, model, f.decoders);
    for (double p : {0.06, 0.1, 0.14}) {
        const std::uint64_t trials = 3000;
        const SuitePoint r = evaluate_suite(f.layout, f.decoders, &ens, true, p, trials, 4);
        CHECK(r.names == std::vector<std::string>{"mwpm", "hdrg", "ensemble", "oracle"});

        std::uint64_t none = 0, m_fail = 0, h_fail = 0, e_fail = 0;
        const NoiseConfig noise{p, 4, evaluation_stream(p)};
        for (std::uint64_t t = 0; t < trials; ++t) {
            const PauliOperator e = sample_error(f.layout, noise, t);
            const Syndrome s = extract_syndrome(f.layout, e);
            const bool m_ok = logical_outcome(f.layout, e, f.mwpm.decode(s)) == LogicalClass::I;
            const bool h_ok = logical_outcome(f.layout, e, f.hdrg.decode(s)) == LogicalClass::I;
            none += !m_ok && !h_ok;
            m_fail += !m_ok;
            h_fail += !h_ok;
            e_fail += logical_outcome(f.layout, e, ens.decode(s)) != LogicalClass::I;
        }
        CHECK(r.at("oracle").failures == none);
        CHECK(r.at("mwpm").failures == m_fail);
        CHECK(r.at("hdrg").failures == h_fail);
        CHECK(r.at("ensemble").failures == e_fail);
        CHECK(r.at("oracle").failures <= std::min(m_fail, h_fail));
        CHECK(r.at("ensemble").failures >= r.at("oracle").failures);
    }
}

TEST_CASE("suite ensemble column matches evaluating the ensemble directly") {
    Fixture f(3);
    nn::Model<float> model(nn::ModelSpec::cnn(3, 2, 4, 8));
    model.initialize(13);
    EnsembleDecoder ens(f.layout, model, f.decoders);
    EvalOptions opts;
    opts.block_size = 256;
    const CurvePoint direct = evaluate(ens, f.layout, 0.12, 4000, 8, opts);
    const SuitePoint suite = evaluate_suite(f.layout, f.decoders, &ens, false, 0.12, 4000, 8, opts);
    CHECK(suite.at("ensemble") == direct);
    CHECK(suite.names.size() == 3);
    // Ensemble over a different decoder list takes the direct path.
    const SuitePoint other = evaluate_suite(f.layout, {&f.mwpm, &f.hdrg, &f.mwpm}, &ens, false, 0.12, 4000, 8, opts);
    CHECK(other.at("ensemble") == direct);
}

TEST_CASE("dataset file round trip and layout") {
    Fixture f(3);
    const Dataset data = generate_dataset(f.layout, f.decoders, 0.1, 40, 3);
    std::stringstream buf;
    save_dataset(data, buf);
    const std::string bytes = buf.str();
    const std::size_t m = 12, per = (m + 7) / 8 + 2;
    REQUIRE(bytes.size() == 4 + 2 + 2 + 1 + 8 + 8 + 8 + 40 * per);
    CHECK(bytes.substr(0, 4) == "QESD");
    CHECK(bytes[4] == 1);
    CHECK(bytes[5] == 0);
    CHECK(bytes[6] == 3);
    CHECK(bytes[8] == 2);
    CHECK(static_cast<unsigned char>(bytes[25]) == 40);
    const Dataset back = load_dataset(buf);
    CHECK(back == data);
    std::stringstream again;
    save_dataset(back, again);
    CHECK(again.str() == bytes);

    // Bit i of byte i/8 is syndrome bit i.
    Dataset one;
    one.distance = 3;
    one.decoder_names = {"mwpm", "hdrg"};
    one.physical_error_rate = 0.1;
    Sample s;
    s.syndrome.bits.assign(m, 0);
    s.syndrome.bits[0] = 1;
    s.syndrome.bits[9] = 1;
    s.outcome_mask = 2;
    s.label = 1;
    one.samples.push_back(s);
    std::stringstream ob;
    save_dataset(one, ob);
    const std::string ob_bytes = ob.str();
    CHECK(static_cast<unsigned char>(ob_bytes[33]) == 0x01);
    CHECK(static_cast<unsigned char>(ob_bytes[34]) == 0x02);
    CHECK(ob_bytes[35] == 2);
    CHECK(ob_bytes[36] == 1);

    // Unanimous masks are rejected on load.
    std::string corrupt = ob_bytes;
    corrupt[35] = 3;
    std::stringstream cb(corrupt);
    CHECK_THROWS(load_dataset(cb));
    std::string relabel = ob_bytes;
    relabel[36] = 0;
    std::stringstream rb(relabel);
    CHECK_THROWS(load_dataset(rb));
    std::stringstream truncated(ob_bytes.substr(0, ob_bytes.size() - 1));
    CHECK_THROWS(load_dataset(truncated));

    std::ostringstream csv;
    write_dataset_csv(one, csv);
    CHECK(csv.str() == "index,syndrome,outcome_mask,label\n0,100000000100,2,1\n");

    Dataset reversed = one;
    reversed.decoder_names = {"hdrg", "mwpm"};
    std::stringstream rv;
    CHECK_THROWS_AS(save_dataset(reversed, rv), std::invalid_argument);
}

TEST_CASE("dataset inputs and labels") {
    Fixture f(3);
    const Dataset data = generate_dataset(f.layout, f.decoders, 0.1, 30, 3);
    const auto spec = nn::ModelSpec::cnn(3, 2);
    const auto x = dataset_inputs(spec, f.layout, data);
    CHECK(x.rows() == 30);
    CHECK(x.cols() == 25);
    const auto y = dataset_labels(data);
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(y[i] == data.samples[i].label);
        CHECK(x.row(static_cast<Eigen::Index>(i)).sum() == static_cast<float>(data.samples[i].syndrome.popcount()));
    }
}
