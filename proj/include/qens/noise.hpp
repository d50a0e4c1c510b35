#pragma once

#include <cstdint>

#include "qens/code.hpp"

namespace qens {

/// Counter-based generator: the stream is a pure function of
/// (seed, stream_id, counter), so trials can be drawn in any order or on any
/// worker and still reproduce bit-for-bit.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t counter);

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    /// Uniform in [0, bound) by rejection; bound > 0.
    std::uint64_t next_below(std::uint64_t bound);

private:
    std::uint64_t state_;
};

std::uint64_t mix64(std::uint64_t x);

struct NoiseConfig {
    double physical_error_rate = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    void validate() const;
};

/// Depolarizing error for trial `draw_index`: each data qubit independently
/// gets X, Y or Z with probability p/3 each.
PauliOperator sample_error(const CodeLayout& layout, const NoiseConfig& config, std::uint64_t draw_index);

/// Sequential view over sample_error with an internal draw counter.
class ErrorSampler {
public:
    ErrorSampler(const CodeLayout& layout, NoiseConfig config, std::uint64_t first_index = 0);

    PauliOperator next() { return sample_error(*layout_, config_, index_++); }
    std::uint64_t index() const { return index_; }

private:
    const CodeLayout* layout_;
    NoiseConfig config_;
    std::uint64_t index_;
};

}  // namespace qens
