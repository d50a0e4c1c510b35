#include "qens/harness.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qens/noise.hpp"
#include "qens/parallel.hpp"

namespace qens {

double CurvePoint::std_error() const {
    if (trials == 0) return 0.0;
    const double r = logical_error_rate();
    return std::sqrt(r * (1.0 - r) / static_cast<double>(trials));
}

std::vector<double> make_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("grid needs lo <= hi and a positive step");
    std::vector<double> grid;
    const long n = std::lround(std::floor((hi - lo) / step + 0.5));
    for (long i = 0; i <= n; ++i) {
        // Rounded to 12 decimals so 0.04 + 3*0.01 prints as 0.07.
        const double v = std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12;
        grid.push_back(v);
    }
    return grid;
}

void RunConfig::validate() const {
    if (distance < 2) throw std::invalid_argument("distance must be at least 2");
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (grid.empty()) throw std::invalid_argument("error-rate grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0 && grid[i] < 1.0)) throw std::invalid_argument("error rates must lie in (0, 1)");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("error-rate grid must be strictly increasing");
    }
    for (const auto& d : decoders)
        if (d != "ensemble" && d != "oracle") decoder_label(d);
}

std::uint64_t evaluation_stream(double p) { return mix64(std::bit_cast<std::uint64_t>(p)); }

namespace {

std::uint64_t trial_digest(const PauliOperator& error, std::uint64_t t) {
    std::uint64_t h = mix64(t);
    const auto& ops = error.dense();
    for (std::size_t q = 0; q < ops.size(); ++q)
        if (ops[q] != Pauli::I) h = mix64(h ^ ((q << 2) | static_cast<std::uint64_t>(ops[q])));
    return h;
}

struct Counts {
    std::vector<std::uint64_t> failures;
};

template <typename Body>
std::vector<std::uint64_t> run_blocks(std::uint64_t trials, std::size_t columns, const EvalOptions& options, Body body) {
    if (options.block_size == 0) throw std::invalid_argument("block size must be positive");
    const std::uint64_t blocks = (trials + options.block_size - 1) / options.block_size;
    std::vector<Counts> per_block(blocks);
    parallel_for(blocks, options.threads, [&](std::size_t b) {
        per_block[b].failures.assign(columns, 0);
        const std::uint64_t first = b * options.block_size;
        body(first, std::min(trials, first + options.block_size), per_block[b].failures);
    });
    std::vector<std::uint64_t> total(columns, 0);
    for (const auto& c : per_block)
        for (std::size_t i = 0; i < columns; ++i) total[i] += c.failures[i];
    return total;
}

}  // namespace

std::uint64_t error_stream_checksum(const CodeLayout& layout, double p, std::uint64_t trials, std::uint64_t seed) {
    const NoiseConfig noise{p, seed, evaluation_stream(p)};
    std::uint64_t sum = 0;
    for (std::uint64_t t = 0; t < trials; ++t) sum += trial_digest(sample_error(layout, noise, t), t);
    return sum;
}

CurvePoint evaluate(const Decoder& decoder, const CodeLayout& layout, double p, std::uint64_t trials,
                    std::uint64_t seed, const EvalOptions& options) {
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    const NoiseConfig noise{p, seed, evaluation_stream(p)};
    noise.validate();
    const auto total = run_blocks(trials, 1, options, [&](std::uint64_t lo, std::uint64_t hi, auto& failures) {
        for (std::uint64_t t = lo; t < hi; ++t) {
            const PauliOperator error = sample_error(layout, noise, t);
            const PauliOperator recovery = decoder.decode(extract_syndrome(layout, error));
            if (logical_outcome(layout, error, recovery) != LogicalClass::I) ++failures[0];
        }
    });
    return {p, trials, total[0]};
}

const CurvePoint& SuitePoint::at(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::out_of_range("no curve named " + name);
    return points[static_cast<std::size_t>(it - names.begin())];
}

SuitePoint evaluate_suite(const CodeLayout& layout, const std::vector<const Decoder*>& decoders,
                          const EnsembleDecoder* ensemble, bool include_oracle, double p, std::uint64_t trials,
                          std::uint64_t seed, const EvalOptions& options) {
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (decoders.empty() || decoders.size() > 8) throw std::invalid_argument("suite needs 1 to 8 decoders");
    const NoiseConfig noise{p, seed, evaluation_stream(p)};
    noise.validate();
    const std::size_t k = decoders.size();
    const unsigned full = (1u << k) - 1;
    const bool shared = ensemble && ensemble->decoders() == decoders;
    const std::size_t ens_col = k;
    const std::size_t oracle_col = k + (ensemble ? 1 : 0);
    const std::size_t columns = oracle_col + (include_oracle ? 1 : 0);

    const auto total = run_blocks(trials, columns, options, [&](std::uint64_t lo, std::uint64_t hi, auto& failures) {
        std::vector<Syndrome> mixed;
        std::vector<std::uint8_t> mixed_masks;
        for (std::uint64_t t = lo; t < hi; ++t) {
            const PauliOperator error = sample_error(layout, noise, t);
            Syndrome s = extract_syndrome(layout, error);
            const std::uint8_t mask = outcome_mask(layout, decoders, error, s);
            for (std::size_t l = 0; l < k; ++l)
                if (!(mask >> l & 1)) ++failures[l];
            if (include_oracle && mask == 0) ++failures[oracle_col];
            if (!ensemble) continue;
            if (!shared) {
                if (logical_outcome(layout, error, ensemble->decode(s)) != LogicalClass::I) ++failures[ens_col];
            } else if (mask == 0) {
                ++failures[ens_col];
            } else if (mask != full) {
                mixed.push_back(std::move(s));
                mixed_masks.push_back(mask);
            }
        }
        if (!mixed.empty()) {
            const std::vector<int> labels = ensemble->select_batch(mixed);
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (!(mixed_masks[i] >> labels[i] & 1)) ++failures[ens_col];
        }
    });

    SuitePoint out;
    for (std::size_t l = 0; l < k; ++l) out.names.emplace_back(decoders[l]->name());
    if (ensemble) out.names.emplace_back("ensemble");
    if (include_oracle) out.names.emplace_back("oracle");
    for (std::size_t c = 0; c < columns; ++c) out.points.push_back({p, trials, total[c]});
    return out;
}

std::optional<double> pseudo_threshold(const Curve& curve) {
    if (curve.size() < 2) throw std::invalid_argument("pseudo-threshold needs at least two points");
    for (std::size_t i = 1; i < curve.size(); ++i)
        if (!(curve[i].physical_error_rate > curve[i - 1].physical_error_rate))
            throw std::invalid_argument("curve error rates must be strictly increasing");
    auto f = [&](std::size_t i) { return curve[i].logical_error_rate() - curve[i].physical_error_rate; };
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const double fi = f(i);
        if (fi == 0.0) return curve[i].physical_error_rate;
        if (i + 1 == curve.size()) break;
        const double fj = f(i + 1);
        if ((fi < 0.0) != (fj < 0.0) && fj != 0.0) {
            const double x0 = curve[i].physical_error_rate;
            const double x1 = curve[i + 1].physical_error_rate;
            return x0 + (x1 - x0) * (-fi) / (fj - fi);
        }
    }
    return std::nullopt;
}

std::optional<double> ComparisonReport::threshold(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw std::out_of_range("no curve named " + name);
    return thresholds[static_cast<std::size_t>(it - names.begin())];
}

namespace {

double rate_ratio(double baseline, double candidate) {
    if (candidate > 0.0) return baseline / candidate;
    return baseline > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
}

std::optional<double> threshold_or_none(const Curve& c) { return c.size() >= 2 ? pseudo_threshold(c) : std::nullopt; }

std::optional<double> gain(const std::optional<double>& base, const std::optional<double>& cand) {
    if (!base || !cand || *base == 0.0) return std::nullopt;
    return (*cand - *base) / *base * 100.0;
}

}  // namespace

ComparisonReport comparison_report(const NamedCurves& curves, const std::string& baseline,
                                   const std::string& candidate) {
    ComparisonReport r;
    r.baseline = baseline;
    r.candidate = candidate;
    if (curves.empty()) throw std::invalid_argument("no curves to compare");
    const Curve& first = curves.front().second;
    std::size_t bi = curves.size(), ci = curves.size();
    for (std::size_t n = 0; n < curves.size(); ++n) {
        const auto& [name, curve] = curves[n];
        if (curve.size() != first.size()) throw std::invalid_argument("curve " + name + " is on a different grid");
        for (std::size_t i = 0; i < curve.size(); ++i)
            if (curve[i].physical_error_rate != first[i].physical_error_rate)
                throw std::invalid_argument("curve " + name + " is on a different grid");
        if (name == baseline) bi = n;
        if (name == candidate) ci = n;
        r.names.push_back(name);
        r.thresholds.push_back(threshold_or_none(curve));
    }
    if (bi == curves.size()) throw std::invalid_argument("baseline curve " + baseline + " missing");
    if (ci == curves.size()) throw std::invalid_argument("candidate curve " + candidate + " missing");
    for (std::size_t i = 0; i < first.size(); ++i) {
        ReportRow row;
        row.physical_error_rate = first[i].physical_error_rate;
        for (const auto& [name, curve] : curves) row.points.push_back(curve[i]);
        const double b = curves[bi].second[i].logical_error_rate();
        const double c = curves[ci].second[i].logical_error_rate();
        row.ratio = rate_ratio(b, c);
        row.improvement = b - c;
        r.rows.push_back(std::move(row));
    }
    r.gain_percent = gain(r.thresholds[bi], r.thresholds[ci]);
    return r;
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::runtime_error("bad number '" + s + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::runtime_error("bad count '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

void write_metadata(std::ostream& out, const Metadata& metadata) {
    for (const auto& [k, v] : metadata) out << "# " << k << ": " << v << '\n';
}

// Reads "# key: value" lines up to and including the column header.
std::vector<std::string> read_header(std::istream& in, Metadata* metadata) {
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            const auto colon = line.find(": ");
            if (metadata && colon != std::string::npos)
                metadata->emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
            continue;
        }
        if (line.empty()) continue;
        return split(line, ',');
    }
    throw std::runtime_error("CSV has no column header");
}

std::string threshold_text(const std::optional<double>& t) { return t ? format_double(*t) : "out-of-range"; }

std::optional<double> parse_threshold(const std::string& s) {
    if (s == "out-of-range") return std::nullopt;
    return parse_double(s);
}

}  // namespace

void write_curves_csv(std::ostream& out, const NamedCurves& curves, const Metadata& metadata) {
    write_metadata(out, metadata);
    out << "# logical_error_rate: failures / trials\n";
    out << "# std_error: sqrt(rate * (1 - rate) / trials)\n";
    out << "decoder,p,trials,failures,logical_error_rate,std_error\n";
    for (const auto& [name, curve] : curves)
        for (const CurvePoint& c : curve)
            out << name << ',' << format_double(c.physical_error_rate) << ',' << c.trials << ',' << c.failures << ','
                << format_double(c.logical_error_rate()) << ',' << format_double(c.std_error()) << '\n';
}

NamedCurves read_curves_csv(std::istream& in, Metadata* metadata) {
    const auto header = read_header(in, metadata);
    if (header.size() < 4 || header[0] != "decoder" || header[1] != "p" || header[2] != "trials" ||
        header[3] != "failures")
        throw std::runtime_error("not a curves CSV");
    NamedCurves curves;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() < 4) throw std::runtime_error("short curves CSV row");
        CurvePoint c{parse_double(cells[1]), parse_u64(cells[2]), parse_u64(cells[3])};
        if (c.failures > c.trials || c.trials == 0) throw std::runtime_error("curves CSV row has invalid counts");
        auto it = std::find_if(curves.begin(), curves.end(), [&](const auto& e) { return e.first == cells[0]; });
        if (it == curves.end()) {
            curves.emplace_back(cells[0], Curve{});
            it = std::prev(curves.end());
        }
        it->second.push_back(c);
    }
    return curves;
}

void write_thresholds_csv(std::ostream& out, const NamedCurves& curves, const Metadata& metadata) {
    write_metadata(out, metadata);
    out << "# pseudo_threshold: root of rate - p, linear interpolation at the first sign change\n";
    out << "decoder,pseudo_threshold\n";
    for (const auto& [name, curve] : curves) out << name << ',' << threshold_text(threshold_or_none(curve)) << '\n';
}

void write_report_csv(std::ostream& out, const ComparisonReport& report, const Metadata& metadata) {
    write_metadata(out, metadata);
    out << "# baseline: " << report.baseline << '\n';
    out << "# candidate: " << report.candidate << '\n';
    out << "# ratio: " << report.baseline << " rate / " << report.candidate
        << " rate (values above 1 mean the candidate is better)\n";
    out << "# improvement: " << report.baseline << " rate - " << report.candidate << " rate\n";
    out << "# pseudo_threshold: root of rate - p, linear interpolation at the first sign change\n";
    for (std::size_t n = 0; n < report.names.size(); ++n)
        out << "# threshold." << report.names[n] << ": " << threshold_text(report.thresholds[n]) << '\n';
    out << "# gain_percent: " << threshold_text(report.gain_percent) << '\n';
    out << "p,trials";
    for (const auto& n : report.names) out << ',' << n << "_failures," << n << "_rate," << n << "_se";
    out << ",ratio,improvement\n";
    for (const ReportRow& row : report.rows) {
        out << format_double(row.physical_error_rate) << ',' << (row.points.empty() ? 0 : row.points[0].trials);
        for (const CurvePoint& c : row.points)
            out << ',' << c.failures << ',' << format_double(c.logical_error_rate()) << ','
                << format_double(c.std_error());
        out << ',' << format_double(row.ratio) << ',' << format_double(row.improvement) << '\n';
    }
}

ComparisonReport read_report_csv(std::istream& in, Metadata* metadata) {
    Metadata meta;
    const auto header = read_header(in, &meta);
    if (header.size() < 4 || header[0] != "p" || header[1] != "trials" || (header.size() - 4) % 3 != 0)
        throw std::runtime_error("not a report CSV");
    ComparisonReport r;
    const std::size_t n = (header.size() - 4) / 3;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string& col = header[2 + 3 * i];
        const auto suffix = col.rfind("_failures");
        if (suffix == std::string::npos) throw std::runtime_error("report CSV column " + col + " is unexpected");
        r.names.push_back(col.substr(0, suffix));
    }
    std::map<std::string, std::string> keys(meta.begin(), meta.end());
    if (keys.count("baseline")) r.baseline = keys["baseline"];
    if (keys.count("candidate")) r.candidate = keys["candidate"];
    for (const auto& name : r.names) {
        auto it = keys.find("threshold." + name);
        r.thresholds.push_back(it == keys.end() ? std::nullopt : parse_threshold(it->second));
    }
    if (keys.count("gain_percent")) r.gain_percent = parse_threshold(keys["gain_percent"]);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size()) throw std::runtime_error("report CSV row has the wrong width");
        ReportRow row;
        row.physical_error_rate = parse_double(cells[0]);
        const std::uint64_t trials = parse_u64(cells[1]);
        for (std::size_t i = 0; i < n; ++i)
            row.points.push_back({row.physical_error_rate, trials, parse_u64(cells[2 + 3 * i])});
        row.ratio = parse_double(cells[cells.size() - 2]);
        row.improvement = parse_double(cells.back());
        r.rows.push_back(std::move(row));
    }
    if (metadata) *metadata = std::move(meta);
    return r;
}

}  // namespace qens
