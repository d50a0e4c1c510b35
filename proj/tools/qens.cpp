#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qens/code.hpp"
#include "qens/decoders.hpp"
#include "qens/ensemble.hpp"
#include "qens/harness.hpp"
#include "qens/nn/model.hpp"
#include "qens/nn/train.hpp"

using namespace qens;

namespace {

struct GenDataArgs {
    int distance = 5;
    double error_rate = 0.10;
    std::size_t samples = 200000;
    std::uint64_t seed = 1;
    std::vector<std::string> decoders{"mwpm", "hdrg"};
    std::string out;
    std::string csv;
    unsigned threads = 1;
};

struct TrainArgs {
    std::string dataset;
    std::string out;
    std::string log;
    std::string arch = "cnn";
    int filters = 64;
    int dense = 512;
    std::uint64_t seed = 1;
    nn::TrainConfig config;
};

struct EvalArgs {
    int distance = 5;
    std::string grid = "0.04:0.16:0.01";
    std::vector<double> error_rates;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    std::vector<std::string> decoders{"mwpm", "hdrg"};
    std::string model;
    std::string out;
    unsigned threads = 1;
};

struct CurvesArgs {
    std::string curves;
    std::string out;
    std::string baseline = "mwpm";
    std::string candidate = "ensemble";
};

// Writes to `path`, or stdout when it is empty or "-".
template <typename F>
void with_output(const std::string& path, F write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write(out);
    if (!out) throw std::runtime_error("failed to write " + path);
}

std::string join(const std::vector<std::string>& items) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? "," : "") + items[i];
    return s;
}

// "lo:hi:step" or a comma-separated list.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> values;
    std::string cell;
    if (text.find(':') != std::string::npos) {
        std::istringstream in(text);
        while (std::getline(in, cell, ':')) values.push_back(std::stod(cell));
        if (values.size() != 3) throw std::invalid_argument("grid range must be lo:hi:step");
        return make_grid(values[0], values[1], values[2]);
    }
    std::istringstream in(text);
    while (std::getline(in, cell, ',')) values.push_back(std::stod(cell));
    return values;
}

NamedCurves read_curves_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open curves file " + path);
    return read_curves_csv(in);
}

void run_gen_data(const GenDataArgs& a) {
    const CodeLayout layout(a.distance);
    const auto owned = make_decoders(a.decoders, layout);
    std::vector<const Decoder*> decoders;
    for (const auto& d : owned) decoders.push_back(d.get());
    GenerationReport report;
    GenerationOptions options;
    options.threads = a.threads;
    const Dataset data = generate_dataset(layout, decoders, a.error_rate, a.samples, a.seed, options, &report);
    save_dataset(data, a.out);
    if (!a.csv.empty()) with_output(a.csv, [&](std::ostream& o) { write_dataset_csv(data, o); });
    std::size_t per_label[8] = {};
    for (const Sample& s : data.samples) ++per_label[s.label];
    std::cerr << "kept " << report.kept << " of " << report.trials << " trials (discard fraction "
              << format_double(report.discard_fraction()) << ", all succeeded " << report.all_succeeded
              << ", all failed " << report.all_failed << ")\n";
    for (std::size_t l = 0; l < decoders.size(); ++l)
        std::cerr << "label " << l << " (" << decoders[l]->name() << "): " << per_label[l] << "\n";
}

void run_train(const TrainArgs& a) {
    const Dataset data = load_dataset(a.dataset);
    const CodeLayout layout(data.distance);
    const int k = static_cast<int>(data.decoder_names.size());
    const nn::ModelSpec spec =
        a.arch == "mlp" ? nn::ModelSpec::mlp(data.distance, k) : nn::ModelSpec::cnn(data.distance, k, a.filters, a.dense);
    nn::Model<float> model(spec);
    model.initialize(a.seed);
    const auto x = dataset_inputs(spec, layout, data);
    const auto y = dataset_labels(data);
    nn::TrainConfig config = a.config;
    config.seed = a.seed;
    const nn::TrainingLog log = nn::train(model, x, y, config, [](const nn::EpochRecord& e) {
        std::cerr << "epoch " << e.epoch << " loss " << format_double(e.loss) << " accuracy "
                  << format_double(e.accuracy) << " lr " << format_double(e.learning_rate) << "\n";
    });
    std::cerr << "stopped: " << log.stop_reason << "\n";
    nn::save_model(model, a.out);
    if (!a.log.empty()) with_output(a.log, [&](std::ostream& o) { log.write_csv(o); });
}

void run_eval(const EvalArgs& a) {
    RunConfig cfg;
    cfg.distance = a.distance;
    cfg.grid = a.error_rates.empty() ? parse_grid(a.grid) : a.error_rates;
    cfg.trials = a.trials;
    cfg.seed = a.seed;
    cfg.decoders = a.decoders;
    cfg.model_path = a.model;
    cfg.threads = a.threads;
    cfg.validate();

    const CodeLayout layout(cfg.distance);
    const auto owned = make_decoders(decoder_names(), layout);
    std::vector<const Decoder*> constituents;
    for (const auto& d : owned) constituents.push_back(d.get());

    bool want_ensemble = false, want_oracle = false;
    for (const auto& d : cfg.decoders) {
        want_ensemble |= d == "ensemble";
        want_oracle |= d == "oracle";
    }
    std::optional<nn::Model<float>> model;
    std::unique_ptr<EnsembleDecoder> ensemble;
    if (want_ensemble) {
        if (cfg.model_path.empty()) throw std::invalid_argument("--model is required to evaluate the ensemble");
        model.emplace(nn::load_model(cfg.model_path));
        const int k = model->spec().output_classes;
        constituents.resize(std::min<std::size_t>(constituents.size(), static_cast<std::size_t>(k)));
        ensemble = std::make_unique<EnsembleDecoder>(layout, *model, constituents);
    }

    NamedCurves curves;
    for (const auto& d : cfg.decoders) curves.emplace_back(d, Curve{});
    EvalOptions options;
    options.threads = cfg.threads;
    for (double p : cfg.grid) {
        const SuitePoint r =
            evaluate_suite(layout, constituents, ensemble.get(), want_oracle, p, cfg.trials, cfg.seed, options);
        for (auto& [name, curve] : curves) curve.push_back(r.at(name));
        std::cerr << "p " << format_double(p);
        for (auto& [name, curve] : curves) std::cerr << " " << name << " " << format_double(curve.back().logical_error_rate());
        std::cerr << "\n";
    }
    const Metadata meta{{"distance", std::to_string(cfg.distance)},
                        {"seed", std::to_string(cfg.seed)},
                        {"trials", std::to_string(cfg.trials)},
                        {"decoders", join(cfg.decoders)},
                        {"noise", "depolarizing code capacity"},
                        {"pairing", "every decoder sees the same errors at each p"}};
    with_output(a.out, [&](std::ostream& o) { write_curves_csv(o, curves, meta); });
}

void run_threshold(const CurvesArgs& a) {
    const NamedCurves curves = read_curves_file(a.curves);
    for (const auto& [name, curve] : curves) {
        const auto t = pseudo_threshold(curve);
        std::cerr << name << ": " << (t ? format_double(*t) : "out-of-range") << "\n";
    }
    with_output(a.out, [&](std::ostream& o) { write_thresholds_csv(o, curves); });
}

void run_report(const CurvesArgs& a) {
    const ComparisonReport r = comparison_report(read_curves_file(a.curves), a.baseline, a.candidate);
    std::cerr << "gain of " << r.candidate << " over " << r.baseline << " pseudo-threshold: "
              << (r.gain_percent ? format_double(*r.gain_percent) + "%" : "out-of-range") << "\n";
    with_output(a.out, [&](std::ostream& o) { write_report_csv(o, r); });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Neural ensemble decoding for the planar surface code"};
    app.set_config("--config", "", "TOML or INI file with option values; command-line flags win");
    app.require_subcommand(1);

    GenDataArgs gen;
    auto* g = app.add_subcommand("gen-data", "Generate a filtered training dataset");
    g->add_option("--distance", gen.distance, "Code distance L")->capture_default_str()->check(CLI::Range(2, 255));
    g->add_option("--error-rate", gen.error_rate, "Physical error rate")->capture_default_str();
    g->add_option("--samples", gen.samples, "Number of kept samples")->capture_default_str();
    g->add_option("--seed", gen.seed, "Seed")->capture_default_str();
    g->add_option("--decoders", gen.decoders, "Decoders in preference order")->delimiter(',')->capture_default_str();
    g->add_option("--out", gen.out, "Dataset file")->required();
    g->add_option("--csv", gen.csv, "Also write the samples as CSV");
    g->add_option("--threads", gen.threads, "Worker threads (0 = all cores)")->capture_default_str();

    TrainArgs tr;
    std::vector<double> label_weights;
    auto* t = app.add_subcommand("train", "Train the decoder-selection classifier");
    t->add_option("--dataset", tr.dataset, "Dataset file")->required();
    t->add_option("--out,--model", tr.out, "Model file to write")->required();
    t->add_option("--log", tr.log, "Training log CSV");
    t->add_option("--seed", tr.seed, "Seed for initialisation and shuffling")->capture_default_str();
    t->add_option("--arch", tr.arch, "cnn or mlp")->check(CLI::IsMember({"cnn", "mlp"}))->capture_default_str();
    t->add_option("--filters", tr.filters, "Filters per conv layer")->capture_default_str();
    t->add_option("--dense", tr.dense, "Width of the dense layer")->capture_default_str();
    t->add_option("--epochs", tr.config.max_epochs, "Maximum epochs")->capture_default_str();
    t->add_option("--batch-size", tr.config.batch_size, "Mini-batch size")->capture_default_str();
    t->add_option("--learning-rate", tr.config.learning_rate, "Initial learning rate")->capture_default_str();
    t->add_option("--plateau-factor", tr.config.plateau_factor, "Learning-rate factor on plateau")->capture_default_str();
    t->add_option("--plateau-patience", tr.config.plateau_patience, "Epochs before reducing")->capture_default_str();
    t->add_option("--min-delta", tr.config.min_delta, "Smallest loss decrease that counts")->capture_default_str();
    t->add_option("--min-learning-rate", tr.config.min_learning_rate, "Stop below this rate")->capture_default_str();
    t->add_option("--early-stop-patience", tr.config.early_stop_patience, "Stalled epochs before stopping")
        ->capture_default_str();
    t->add_option("--label-weights", label_weights, "Per-class loss weights")->delimiter(',');
    t->add_option("--validation-fraction", tr.config.validation_fraction, "Held-out fraction to monitor")
        ->capture_default_str();
    t->add_flag("--restore-best", tr.config.restore_best, "Keep the best monitored epoch");

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Logical error rate curves");
    e->add_option("--distance", ev.distance, "Code distance L")->capture_default_str()->check(CLI::Range(2, 255));
    auto* grid_opt = e->add_option("--grid", ev.grid, "lo:hi:step or a comma list")->capture_default_str();
    e->add_option("--error-rate", ev.error_rates, "Error rate(s), instead of --grid")->delimiter(',')->excludes(grid_opt);
    e->add_option("--trials", ev.trials, "Trials per error rate")->capture_default_str();
    e->add_option("--seed", ev.seed, "Seed")->capture_default_str();
    e->add_option("--decoder,--decoders", ev.decoders, "mwpm, hdrg, ensemble, oracle")->delimiter(',')
        ->check(CLI::IsMember({"mwpm", "hdrg", "ensemble", "oracle"}))->capture_default_str();
    e->add_option("--model", ev.model, "Model file (for ensemble)");
    e->add_option("--out", ev.out, "Curves CSV (default stdout)");
    e->add_option("--threads", ev.threads, "Worker threads (0 = all cores)")->capture_default_str();

    CurvesArgs th;
    auto* h = app.add_subcommand("threshold", "Pseudo-thresholds of every curve");
    h->add_option("--curves", th.curves, "Curves CSV from eval")->required();
    h->add_option("--out", th.out, "Thresholds CSV (default stdout)");

    CurvesArgs rp;
    auto* r = app.add_subcommand("report", "Compare a candidate against a baseline");
    r->add_option("--curves", rp.curves, "Curves CSV from eval")->required();
    r->add_option("--baseline", rp.baseline, "Baseline decoder")->capture_default_str();
    r->add_option("--candidate", rp.candidate, "Candidate decoder")->capture_default_str();
    r->add_option("--out", rp.out, "Report CSV (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (g->parsed()) run_gen_data(gen);
        if (t->parsed()) {
            tr.config.label_weights = label_weights;
            run_train(tr);
        }
        if (e->parsed()) run_eval(ev);
        if (h->parsed()) run_threshold(th);
        if (r->parsed()) run_report(rp);
    } catch (const ContractViolation& ex) {
        std::cerr << "contract violation: " << ex.what() << "\n";
        return 3;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
