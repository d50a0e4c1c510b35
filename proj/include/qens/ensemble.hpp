#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qens/code.hpp"
#include "qens/decoders.hpp"
#include "qens/nn/model.hpp"

namespace qens {

/// Bit l set iff decoder l's recovery leaves no logical error.
std::uint8_t outcome_mask(const CodeLayout& layout, const std::vector<const Decoder*>& decoders,
                          const PauliOperator& error, const Syndrome& s);

/// Lowest-index successful decoder. Throws invalid_argument on a zero mask.
int oracle_selector(std::uint8_t outcome_mask);

/// A syndrome on which the decoders disagree: 0 < popcount(outcome_mask) < k,
/// and label == oracle_selector(outcome_mask).
struct Sample {
    Syndrome syndrome;
    std::uint8_t outcome_mask = 0;
    int label = 0;
    friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
    int distance = 0;
    std::vector<std::string> decoder_names;
    double physical_error_rate = 0.0;
    std::uint64_t seed = 0;
    std::vector<Sample> samples;

    /// Throws runtime_error on a sample with the wrong length, a unanimous
    /// mask or a label that is not the preferred successful decoder.
    void validate() const;
    friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct GenerationOptions {
    unsigned threads = 1;
    std::uint64_t block_size = 4096;
};

struct GenerationReport {
    std::uint64_t trials = 0;
    std::uint64_t all_succeeded = 0;
    std::uint64_t all_failed = 0;
    std::uint64_t kept = 0;

    double discard_fraction() const {
        return trials ? static_cast<double>(all_succeeded + all_failed) / static_cast<double>(trials) : 0.0;
    }
};

/// RNG stream for dataset generation at rate p; disjoint from the
/// evaluation streams.
std::uint64_t generation_stream(double p);

/// Samples errors at rate p until target_count disagreeing trials are kept.
/// Trial t uses draw index t of generation_stream(p), so the samples and
/// their order do not depend on options.threads.
Dataset generate_dataset(const CodeLayout& layout, const std::vector<const Decoder*>& decoders, double p,
                         std::size_t target_count, std::uint64_t seed, const GenerationOptions& options = {},
                         GenerationReport* report = nullptr);

/// Algorithm 1: the classifier picks a decoder, whose recovery is returned
/// unmodified. The model must have one output per decoder.
class EnsembleDecoder final : public Decoder {
public:
    EnsembleDecoder(const CodeLayout& layout, const nn::Model<float>& model, std::vector<const Decoder*> decoders);

    std::string_view name() const override { return "ensemble"; }
    PauliOperator decode(const Syndrome& s) const override;
    int select(const Syndrome& s) const;
    std::vector<int> select_batch(const std::vector<Syndrome>& syndromes) const;
    const std::vector<const Decoder*>& decoders() const { return decoders_; }

private:
    const CodeLayout* layout_;
    const nn::Model<float>* model_;
    std::vector<const Decoder*> decoders_;
};

PauliOperator ensemble_decode(const nn::Model<float>& model, const std::vector<const Decoder*>& decoders,
                              const CodeLayout& layout, const Syndrome& s);

/// Model input rows for every sample, plus their labels.
nn::Matrix<float> dataset_inputs(const nn::ModelSpec& spec, const CodeLayout& layout, const Dataset& data);
std::vector<int> dataset_labels(const Dataset& data);

/// Binary dataset file: "QESD", version, distance, k, p, seed, count, then per
/// sample a ceil(m/8)-byte syndrome bitmap (bit i of byte i/8 is syndrome bit
/// i), the outcome mask and the label. Decoder names are the first k of
/// decoder_names().
void save_dataset(const Dataset& data, std::ostream& out);
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(std::istream& in);
Dataset load_dataset(const std::string& path);
/// index,syndrome,outcome_mask,label with the syndrome as a 0/1 string.
void write_dataset_csv(const Dataset& data, std::ostream& out);

}  // namespace qens
