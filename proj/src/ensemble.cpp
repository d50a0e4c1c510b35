#include "qens/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "qens/binary_io.hpp"
#include "qens/noise.hpp"
#include "qens/parallel.hpp"

namespace qens {

std::uint8_t outcome_mask(const CodeLayout& layout, const std::vector<const Decoder*>& decoders,
                          const PauliOperator& error, const Syndrome& s) {
    std::uint8_t mask = 0;
    for (std::size_t l = 0; l < decoders.size(); ++l)
        if (logical_outcome(layout, error, decoders[l]->decode(s)) == LogicalClass::I) mask |= std::uint8_t(1u << l);
    return mask;
}

int oracle_selector(std::uint8_t outcome_mask) {
    if (outcome_mask == 0) throw std::invalid_argument("oracle selector needs at least one successful decoder");
    return std::countr_zero(outcome_mask);
}

void Dataset::validate() const {
    const int k = static_cast<int>(decoder_names.size());
    if (k < 2 || k > 8) throw std::runtime_error("dataset must name between 2 and 8 decoders");
    const std::size_t m = static_cast<std::size_t>(2 * distance * (distance - 1));
    const unsigned full = (1u << k) - 1;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Sample& s = samples[i];
        const std::string where = "dataset sample " + std::to_string(i);
        if (s.syndrome.size() != m) throw std::runtime_error(where + " has the wrong syndrome length");
        if (s.outcome_mask == 0 || s.outcome_mask >= full)
            throw std::runtime_error(where + " has a unanimous or out-of-range outcome mask");
        if (s.label != oracle_selector(s.outcome_mask)) throw std::runtime_error(where + " label disagrees with its mask");
    }
}

std::uint64_t generation_stream(double p) { return mix64(std::bit_cast<std::uint64_t>(p) ^ 0x67656e2d64617461ULL); }

namespace {

enum TrialKind : std::uint8_t { kAllFailed = 0, kAllSucceeded = 1, kKept = 2 };

struct Block {
    std::vector<std::uint8_t> kinds;
    std::vector<Sample> samples;
};

}  // namespace

Dataset generate_dataset(const CodeLayout& layout, const std::vector<const Decoder*>& decoders, double p,
                         std::size_t target_count, std::uint64_t seed, const GenerationOptions& options,
                         GenerationReport* report) {
    if (decoders.size() < 2 || decoders.size() > 8) throw std::invalid_argument("dataset generation needs 2 to 8 decoders");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("dataset generation needs 0 < p < 1");
    if (options.block_size == 0) throw std::invalid_argument("block size must be positive");
    const NoiseConfig noise{p, seed, generation_stream(p)};
    const unsigned full = (1u << decoders.size()) - 1;

    Dataset data;
    data.distance = layout.distance();
    for (const Decoder* d : decoders) data.decoder_names.emplace_back(d->name());
    data.physical_error_rate = p;
    data.seed = seed;
    data.samples.reserve(target_count);

    GenerationReport stats;
    const unsigned workers = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
    const std::size_t round = 2 * static_cast<std::size_t>(workers);
    std::uint64_t next_block = 0;
    std::vector<Block> blocks(round);
    while (data.samples.size() < target_count) {
        parallel_for(round, workers, [&](std::size_t i) {
            Block& b = blocks[i];
            b.kinds.clear();
            b.samples.clear();
            const std::uint64_t first = (next_block + i) * options.block_size;
            for (std::uint64_t t = first; t < first + options.block_size; ++t) {
                const PauliOperator error = sample_error(layout, noise, t);
                Syndrome s = extract_syndrome(layout, error);
                const std::uint8_t mask = outcome_mask(layout, decoders, error, s);
                if (mask == 0) {
                    b.kinds.push_back(kAllFailed);
                } else if (mask == full) {
                    b.kinds.push_back(kAllSucceeded);
                } else {
                    b.kinds.push_back(kKept);
                    b.samples.push_back({std::move(s), mask, oracle_selector(mask)});
                }
            }
        });
        next_block += round;
        for (Block& b : blocks) {
            std::size_t taken = 0;
            for (std::uint8_t kind : b.kinds) {
                if (data.samples.size() >= target_count) break;
                ++stats.trials;
                if (kind == kAllFailed) ++stats.all_failed;
                else if (kind == kAllSucceeded) ++stats.all_succeeded;
                else data.samples.push_back(std::move(b.samples[taken++]));
            }
        }
        if (data.samples.empty() && stats.trials >= std::uint64_t{1} << 30)
            throw std::runtime_error("no disagreeing trials after 2^30 draws; error rate too low");
    }
    stats.kept = data.samples.size();
    if (report) *report = stats;
    return data;
}

EnsembleDecoder::EnsembleDecoder(const CodeLayout& layout, const nn::Model<float>& model,
                                 std::vector<const Decoder*> decoders)
    : layout_(&layout), model_(&model), decoders_(std::move(decoders)) {
    if (decoders_.empty()) throw std::invalid_argument("ensemble needs at least one decoder");
    if (model.spec().output_classes != static_cast<int>(decoders_.size()))
        throw std::invalid_argument("model has " + std::to_string(model.spec().output_classes) + " outputs but " +
                                    std::to_string(decoders_.size()) + " decoders were given");
    if (model.spec().distance() != layout.distance())
        throw std::invalid_argument("model was trained for distance " + std::to_string(model.spec().distance()));
}

int EnsembleDecoder::select(const Syndrome& s) const { return select_batch({s})[0]; }

std::vector<int> EnsembleDecoder::select_batch(const std::vector<Syndrome>& syndromes) const {
    const nn::ModelSpec& spec = model_->spec();
    nn::Matrix<float> x(static_cast<Eigen::Index>(syndromes.size()), spec.input_size());
    for (std::size_t i = 0; i < syndromes.size(); ++i)
        nn::encode_input(spec, *layout_, syndromes[i], x.row(static_cast<Eigen::Index>(i)).data());
    return nn::predict_labels<float>(model_->infer(x));
}

PauliOperator EnsembleDecoder::decode(const Syndrome& s) const {
    if (s.size() != layout_->num_stabilizers())
        throw std::invalid_argument("syndrome has length " + std::to_string(s.size()) + ", expected " +
                                    std::to_string(layout_->num_stabilizers()));
    return decoders_[static_cast<std::size_t>(select(s))]->decode(s);
}

PauliOperator ensemble_decode(const nn::Model<float>& model, const std::vector<const Decoder*>& decoders,
                              const CodeLayout& layout, const Syndrome& s) {
    return EnsembleDecoder(layout, model, decoders).decode(s);
}

nn::Matrix<float> dataset_inputs(const nn::ModelSpec& spec, const CodeLayout& layout, const Dataset& data) {
    nn::Matrix<float> x(static_cast<Eigen::Index>(data.samples.size()), spec.input_size());
    for (std::size_t i = 0; i < data.samples.size(); ++i)
        nn::encode_input(spec, layout, data.samples[i].syndrome, x.row(static_cast<Eigen::Index>(i)).data());
    return x;
}

std::vector<int> dataset_labels(const Dataset& data) {
    std::vector<int> labels;
    labels.reserve(data.samples.size());
    for (const Sample& s : data.samples) labels.push_back(s.label);
    return labels;
}

namespace {
constexpr char kDatasetMagic[4] = {'Q', 'E', 'S', 'D'};
constexpr std::uint16_t kDatasetVersion = 1;
}  // namespace

void save_dataset(const Dataset& data, std::ostream& out) {
    data.validate();
    const auto& registry = decoder_names();
    if (data.decoder_names.size() > registry.size() ||
        !std::equal(data.decoder_names.begin(), data.decoder_names.end(), registry.begin()))
        throw std::invalid_argument("dataset decoders must be a prefix of the registry order");
    out.write(kDatasetMagic, 4);
    io::write_le<std::uint16_t>(out, kDatasetVersion);
    io::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(data.distance));
    io::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(data.decoder_names.size()));
    io::write_le<double>(out, data.physical_error_rate);
    io::write_le<std::uint64_t>(out, data.seed);
    io::write_le<std::uint64_t>(out, data.samples.size());
    const std::size_t m = static_cast<std::size_t>(2 * data.distance * (data.distance - 1));
    std::vector<char> bitmap((m + 7) / 8);
    for (const Sample& s : data.samples) {
        std::fill(bitmap.begin(), bitmap.end(), 0);
        for (std::size_t i = 0; i < m; ++i)
            if (s.syndrome.bits[i]) bitmap[i / 8] = static_cast<char>(bitmap[i / 8] | (1 << (i % 8)));
        out.write(bitmap.data(), static_cast<std::streamsize>(bitmap.size()));
        io::write_le<std::uint8_t>(out, s.outcome_mask);
        io::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(s.label));
    }
    if (!out) throw std::runtime_error("failed to write dataset");
}

void save_dataset(const Dataset& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    save_dataset(data, out);
}

Dataset load_dataset(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kDatasetMagic, 4) != 0) throw std::runtime_error("not a dataset file (bad magic)");
    const auto version = io::read_le<std::uint16_t>(in);
    if (version != kDatasetVersion) throw std::runtime_error("unsupported dataset file version " + std::to_string(version));
    Dataset data;
    data.distance = io::read_le<std::uint16_t>(in);
    if (data.distance < 2) throw std::runtime_error("dataset distance must be at least 2");
    const auto k = io::read_le<std::uint8_t>(in);
    const auto& registry = decoder_names();
    if (k < 2 || k > registry.size()) throw std::runtime_error("dataset names an unknown number of decoders");
    data.decoder_names.assign(registry.begin(), registry.begin() + k);
    data.physical_error_rate = io::read_le<double>(in);
    data.seed = io::read_le<std::uint64_t>(in);
    const auto count = io::read_le<std::uint64_t>(in);
    const std::size_t m = static_cast<std::size_t>(2 * data.distance * (data.distance - 1));
    std::vector<char> bitmap((m + 7) / 8);
    for (std::uint64_t n = 0; n < count; ++n) {
        in.read(bitmap.data(), static_cast<std::streamsize>(bitmap.size()));
        if (!in) throw std::runtime_error("unexpected end of file");
        Sample s;
        s.syndrome.bits.resize(m);
        for (std::size_t i = 0; i < m; ++i) s.syndrome.bits[i] = (bitmap[i / 8] >> (i % 8)) & 1;
        s.outcome_mask = io::read_le<std::uint8_t>(in);
        s.label = io::read_le<std::uint8_t>(in);
        data.samples.push_back(std::move(s));
    }
    data.validate();
    return data;
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset file " + path);
    return load_dataset(in);
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
    out << "index,syndrome,outcome_mask,label\n";
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
        const Sample& s = data.samples[i];
        out << i << ',';
        for (auto b : s.syndrome.bits) out << (b ? '1' : '0');
        out << ',' << static_cast<int>(s.outcome_mask) << ',' << s.label << '\n';
    }
}

}  // namespace qens
