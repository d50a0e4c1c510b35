#include "qens/noise.hpp"

#include <stdexcept>
#include <string>

namespace qens {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t counter)
    : state_(mix64(mix64(mix64(seed) ^ stream_id) ^ counter)) {}

std::uint64_t CounterRng::next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t CounterRng::next_below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % bound;
}

void NoiseConfig::validate() const {
    if (!(physical_error_rate >= 0.0 && physical_error_rate <= 1.0))
        throw std::invalid_argument("physical error rate must lie in [0, 1], got " + std::to_string(physical_error_rate));
}

PauliOperator sample_error(const CodeLayout& layout, const NoiseConfig& config, std::uint64_t draw_index) {
    config.validate();
    const double p = config.physical_error_rate;
    constexpr Pauli kinds[3] = {Pauli::X, Pauli::Y, Pauli::Z};
    PauliOperator error(layout.num_data_qubits());
    CounterRng rng(config.seed, config.stream_id, draw_index);
    for (std::size_t q = 0; q < layout.num_data_qubits(); ++q) {
        const double u = rng.next_double();
        if (u < p) {
            int k = static_cast<int>(u * 3.0 / p);
            error.set(q, kinds[k > 2 ? 2 : k]);
        }
    }
    return error;
}

ErrorSampler::ErrorSampler(const CodeLayout& layout, NoiseConfig config, std::uint64_t first_index)
    : layout_(&layout), config_(config), index_(first_index) {
    config_.validate();
}

}  // namespace qens
