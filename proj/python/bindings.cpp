#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qens/code.hpp"
#include "qens/decoders.hpp"
#include "qens/ensemble.hpp"
#include "qens/harness.hpp"
#include "qens/noise.hpp"
#include "qens/nn/model.hpp"
#include "qens/nn/train.hpp"

namespace py = pybind11;
using namespace qens;

namespace {

PauliOperator pauli_from_string(const std::string& s) {
    PauliOperator op(s.size());
    for (std::size_t q = 0; q < s.size(); ++q) {
        switch (s[q]) {
            case 'I': break;
            case 'X': op.set(q, Pauli::X); break;
            case 'Y': op.set(q, Pauli::Y); break;
            case 'Z': op.set(q, Pauli::Z); break;
            default: throw std::invalid_argument("Pauli strings use only I, X, Y, Z");
        }
    }
    return op;
}

// Dense string over n qubits, one of I/X/Y/Z per qubit.
std::string dense_string(const PauliOperator& op, std::size_t n) {
    std::string s(n, 'I');
    for (std::size_t q = 0; q < n; ++q) s[q] = pauli_char(op.at(q));
    return s;
}

Syndrome to_syndrome(const std::vector<int>& bits) {
    Syndrome s;
    for (int b : bits) {
        if (b != 0 && b != 1) throw std::invalid_argument("syndrome bits must be 0 or 1");
        s.bits.push_back(static_cast<std::uint8_t>(b));
    }
    return s;
}

std::vector<int> from_syndrome(const Syndrome& s) { return {s.bits.begin(), s.bits.end()}; }

// Owns a layout and the registry decoders so Python objects stay valid.
struct Toolkit {
    explicit Toolkit(int distance) : layout(distance), owned(make_decoders(decoder_names(), layout)) {
        for (const auto& d : owned) decoders.push_back(d.get());
    }
    CodeLayout layout;
    std::vector<std::unique_ptr<Decoder>> owned;
    std::vector<const Decoder*> decoders;
    std::optional<nn::Model<float>> model;
    std::unique_ptr<EnsembleDecoder> ensemble;

    const Decoder& decoder(const std::string& name) const {
        if (name == "ensemble") {
            if (!ensemble) throw std::invalid_argument("load a model before using the ensemble");
            return *ensemble;
        }
        return *decoders.at(static_cast<std::size_t>(decoder_label(name)));
    }
};

}  // namespace

PYBIND11_MODULE(_qens, m) {
    m.doc() = "Neural ensemble decoding for the planar surface code";

    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_RuntimeError);

    py::class_<CodeLayout>(m, "CodeLayout")
        .def(py::init<int>(), py::arg("distance"))
        .def_property_readonly("distance", &CodeLayout::distance)
        .def_property_readonly("grid_side", &CodeLayout::grid_side)
        .def_property_readonly("num_data_qubits", &CodeLayout::num_data_qubits)
        .def_property_readonly("num_stabilizers", &CodeLayout::num_stabilizers)
        .def_property_readonly("num_x_stabilizers", &CodeLayout::num_x_stabilizers)
        .def_property_readonly("num_z_stabilizers", &CodeLayout::num_z_stabilizers)
        .def("data_qubits",
             [](const CodeLayout& l) {
                 std::vector<std::pair<int, int>> out;
                 for (const auto& g : l.data_qubits()) out.emplace_back(g.row, g.col);
                 return out;
             })
        .def("stabilizers", [](const CodeLayout& l) {
            std::vector<std::tuple<int, int, std::string, std::vector<int>>> out;
            for (const auto& s : l.stabilizers())
                out.emplace_back(s.position.row, s.position.col, s.type == StabilizerType::X ? "X" : "Z", s.support);
            return out;
        });

    m.def("decoder_names", &decoder_names);

    m.def(
        "sample_error",
        [](const CodeLayout& l, double p, std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
            return dense_string(sample_error(l, {p, seed, stream}, index), l.num_data_qubits());
        },
        py::arg("layout"), py::arg("p"), py::arg("seed"), py::arg("stream") = 0, py::arg("index") = 0,
        "Depolarizing error as a Pauli string over the data qubits.");
    m.def(
        "extract_syndrome",
        [](const CodeLayout& l, const std::string& error) { return from_syndrome(extract_syndrome(l, pauli_from_string(error))); },
        py::arg("layout"), py::arg("error"));
    m.def(
        "logical_outcome",
        [](const CodeLayout& l, const std::string& error, const std::string& recovery) {
            return std::string(1, logical_char(logical_outcome(l, pauli_from_string(error), pauli_from_string(recovery))));
        },
        py::arg("layout"), py::arg("error"), py::arg("recovery"));
    m.def("oracle_selector", &oracle_selector, py::arg("outcome_mask"));

    py::class_<CurvePoint>(m, "CurvePoint")
        .def(py::init([](double p, std::uint64_t trials, std::uint64_t failures) { return CurvePoint{p, trials, failures}; }),
             py::arg("p"), py::arg("trials"), py::arg("failures"))
        .def_readonly("physical_error_rate", &CurvePoint::physical_error_rate)
        .def_readonly("trials", &CurvePoint::trials)
        .def_readonly("failures", &CurvePoint::failures)
        .def_property_readonly("logical_error_rate", &CurvePoint::logical_error_rate)
        .def_property_readonly("std_error", &CurvePoint::std_error)
        .def("__repr__", [](const CurvePoint& c) {
            return "CurvePoint(p=" + format_double(c.physical_error_rate) + ", trials=" + std::to_string(c.trials) +
                   ", failures=" + std::to_string(c.failures) + ")";
        });

    m.def("pseudo_threshold", &pseudo_threshold, py::arg("curve"),
          "Root of rate - p by linear interpolation; None when the curve does not cross.");
    m.def("make_grid", &make_grid, py::arg("lo"), py::arg("hi"), py::arg("step"));

    py::class_<Toolkit>(m, "Toolkit", "A code layout with its decoders and an optional trained ensemble.")
        .def(py::init<int>(), py::arg("distance"))
        .def_property_readonly("layout", [](const Toolkit& t) -> const CodeLayout& { return t.layout; },
                               py::return_value_policy::reference_internal)
        .def(
            "decode",
            [](const Toolkit& t, const std::string& name, const std::vector<int>& syndrome) {
                return dense_string(t.decoder(name).decode(to_syndrome(syndrome)), t.layout.num_data_qubits());
            },
            py::arg("decoder"), py::arg("syndrome"), "Recovery as a Pauli string.")
        .def(
            "load_model",
            [](Toolkit& t, const std::string& path) {
                t.ensemble.reset();
                t.model.emplace(nn::load_model(path));
                std::vector<const Decoder*> ds(t.decoders.begin(),
                                               t.decoders.begin() + std::min<std::size_t>(t.decoders.size(),
                                                                                          t.model->spec().output_classes));
                t.ensemble = std::make_unique<EnsembleDecoder>(t.layout, *t.model, ds);
            },
            py::arg("path"))
        .def(
            "select",
            [](const Toolkit& t, const std::vector<int>& syndrome) {
                if (!t.ensemble) throw std::invalid_argument("load a model first");
                return t.ensemble->select(to_syndrome(syndrome));
            },
            py::arg("syndrome"), "Decoder label the classifier picks.")
        .def(
            "generate_dataset",
            [](const Toolkit& t, const std::string& path, double p, std::size_t samples, std::uint64_t seed,
               unsigned threads) {
                GenerationReport report;
                GenerationOptions options;
                options.threads = threads;
                Dataset data;
                {
                    py::gil_scoped_release release;
                    data = generate_dataset(t.layout, t.decoders, p, samples, seed, options, &report);
                }
                save_dataset(data, path);
                return py::dict(py::arg("trials") = report.trials, py::arg("kept") = report.kept,
                                py::arg("all_succeeded") = report.all_succeeded,
                                py::arg("all_failed") = report.all_failed,
                                py::arg("discard_fraction") = report.discard_fraction());
            },
            py::arg("path"), py::arg("p"), py::arg("samples"), py::arg("seed"), py::arg("threads") = 1,
            "Writes a dataset file and returns generation statistics.")
        .def(
            "evaluate",
            [](const Toolkit& t, const std::string& name, double p, std::uint64_t trials, std::uint64_t seed,
               unsigned threads) {
                EvalOptions options;
                options.threads = threads;
                const Decoder& d = t.decoder(name);
                py::gil_scoped_release release;
                return evaluate(d, t.layout, p, trials, seed, options);
            },
            py::arg("decoder"), py::arg("p"), py::arg("trials"), py::arg("seed"), py::arg("threads") = 1)
        .def(
            "evaluate_suite",
            [](const Toolkit& t, double p, std::uint64_t trials, std::uint64_t seed, bool oracle, unsigned threads) {
                EvalOptions options;
                options.threads = threads;
                SuitePoint r;
                {
                    py::gil_scoped_release release;
                    r = evaluate_suite(t.layout, t.ensemble ? t.ensemble->decoders() : t.decoders, t.ensemble.get(),
                                       oracle, p, trials, seed, options);
                }
                py::dict out;
                for (std::size_t i = 0; i < r.names.size(); ++i) out[py::str(r.names[i])] = r.points[i];
                return out;
            },
            py::arg("p"), py::arg("trials"), py::arg("seed"), py::arg("oracle") = true, py::arg("threads") = 1,
            "Paired curve points for every decoder, the ensemble when loaded, and the oracle.");

    m.def(
        "load_dataset",
        [](const std::string& path) {
            const Dataset d = load_dataset(path);
            py::list samples;
            for (const Sample& s : d.samples) samples.append(py::make_tuple(from_syndrome(s.syndrome), s.outcome_mask, s.label));
            return py::dict(py::arg("distance") = d.distance, py::arg("decoders") = d.decoder_names,
                            py::arg("p") = d.physical_error_rate, py::arg("seed") = d.seed,
                            py::arg("samples") = samples);
        },
        py::arg("path"), "Dataset as a dict; samples are (syndrome, outcome_mask, label) tuples.");

    m.def(
        "train_model",
        [](const std::string& dataset, const std::string& out, std::uint64_t seed, int epochs, int filters, int dense,
           int batch_size) {
            const Dataset data = load_dataset(dataset);
            const CodeLayout layout(data.distance);
            const auto spec = nn::ModelSpec::cnn(data.distance, static_cast<int>(data.decoder_names.size()), filters, dense);
            nn::Model<float> model(spec);
            model.initialize(seed);
            nn::TrainConfig cfg;
            cfg.seed = seed;
            cfg.max_epochs = epochs;
            cfg.batch_size = batch_size;
            nn::TrainingLog log;
            {
                py::gil_scoped_release release;
                log = nn::train(model, dataset_inputs(spec, layout, data), dataset_labels(data), cfg);
            }
            nn::save_model(model, out);
            py::list epochs_out;
            for (const auto& e : log.epochs)
                epochs_out.append(py::dict(py::arg("epoch") = e.epoch, py::arg("loss") = e.loss,
                                           py::arg("accuracy") = e.accuracy, py::arg("lr") = e.learning_rate));
            return epochs_out;
        },
        py::arg("dataset"), py::arg("out"), py::arg("seed") = 1, py::arg("epochs") = 30, py::arg("filters") = 64,
        py::arg("dense") = 512, py::arg("batch_size") = 256, "Trains the CNN classifier and writes the model file.");
}
