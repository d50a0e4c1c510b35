#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qens/code.hpp"
#include "qens/decoders.hpp"
#include "qens/ensemble.hpp"

namespace qens {

struct CurvePoint {
    double physical_error_rate = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;

    double logical_error_rate() const { return trials ? static_cast<double>(failures) / static_cast<double>(trials) : 0.0; }
    /// Binomial standard error sqrt(rate (1 - rate) / trials).
    double std_error() const;
    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

using Curve = std::vector<CurvePoint>;
/// Curves keyed by decoder name, in insertion order.
using NamedCurves = std::vector<std::pair<std::string, Curve>>;

/// Error-rate grid lo, lo+step, ..., hi (inclusive within half a step).
std::vector<double> make_grid(double lo, double hi, double step);

struct RunConfig {
    int distance = 5;
    std::vector<double> grid = make_grid(0.04, 0.16, 0.01);
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    std::vector<std::string> decoders{"mwpm", "hdrg"};
    std::string model_path;
    std::string output_path;
    unsigned threads = 1;

    /// Grid strictly increasing inside (0, 1); trials >= 1.
    void validate() const;
};

/// RNG stream for evaluation at rate p. Every decoder evaluated at p with the
/// same seed sees the same errors.
std::uint64_t evaluation_stream(double p);

/// Order-independent digest of the errors drawn for trials [0, trials).
std::uint64_t error_stream_checksum(const CodeLayout& layout, double p, std::uint64_t trials, std::uint64_t seed);

struct EvalOptions {
    unsigned threads = 1;
    std::uint64_t block_size = 4096;
};

/// Failures (residual logical class != I) over `trials` paired draws.
CurvePoint evaluate(const Decoder& decoder, const CodeLayout& layout, double p, std::uint64_t trials,
                    std::uint64_t seed, const EvalOptions& options = {});

struct SuitePoint {
    std::vector<std::string> names;
    std::vector<CurvePoint> points;

    const CurvePoint& at(const std::string& name) const;
};

/// One paired pass at rate p for every decoder, then the ensemble (when
/// given) and the oracle selector (when requested). Trials on which the
/// constituents agree are not classified: the ensemble inherits their shared
/// outcome, which equals running it.
SuitePoint evaluate_suite(const CodeLayout& layout, const std::vector<const Decoder*>& decoders,
                          const EnsembleDecoder* ensemble, bool include_oracle, double p, std::uint64_t trials,
                          std::uint64_t seed, const EvalOptions& options = {});

/// Root of rate(p) - p by linear interpolation across the first sign change
/// (a grid point with rate == p is returned as is). nullopt when the curve
/// does not cross. Throws invalid_argument on fewer than two points or a
/// grid that is not strictly increasing.
std::optional<double> pseudo_threshold(const Curve& curve);

struct ReportRow {
    double physical_error_rate = 0.0;
    std::vector<CurvePoint> points;  // one per report name
    double ratio = 0.0;              // baseline rate / candidate rate
    double improvement = 0.0;        // baseline rate - candidate rate
};

struct ComparisonReport {
    std::string baseline = "mwpm";
    std::string candidate = "ensemble";
    std::vector<std::string> names;
    std::vector<ReportRow> rows;
    std::vector<std::optional<double>> thresholds;  // one per name
    /// Candidate threshold over baseline threshold, in percent above 100%.
    std::optional<double> gain_percent;

    std::optional<double> threshold(const std::string& name) const;
};

/// Throws invalid_argument when the curves do not share one grid or lack the
/// baseline or candidate.
ComparisonReport comparison_report(const NamedCurves& curves, const std::string& baseline = "mwpm",
                                   const std::string& candidate = "ensemble");

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Long format, one row per (decoder, p), after a "# key: value" header.
void write_curves_csv(std::ostream& out, const NamedCurves& curves, const Metadata& metadata = {});
NamedCurves read_curves_csv(std::istream& in, Metadata* metadata = nullptr);

void write_thresholds_csv(std::ostream& out, const NamedCurves& curves, const Metadata& metadata = {});

void write_report_csv(std::ostream& out, const ComparisonReport& report, const Metadata& metadata = {});
ComparisonReport read_report_csv(std::istream& in, Metadata* metadata = nullptr);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace qens
