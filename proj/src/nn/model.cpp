#include "qens/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "qens/binary_io.hpp"
#include "qens/noise.hpp"

namespace qens::nn {

ModelSpec ModelSpec::cnn(int distance, int classes, int filters, int dense) {
    ModelSpec s;
    s.type = ModelType::cnn;
    s.input_grid_side = 2 * distance - 1;
    for (int k = distance; k >= 2; --k) s.conv_layers.push_back({k, filters});
    s.dense_layers = {dense};
    s.output_classes = classes;
    return s;
}

ModelSpec ModelSpec::mlp(int distance, int classes) {
    ModelSpec s;
    s.type = ModelType::mlp;
    s.input_grid_side = 2 * distance - 1;
    s.dense_layers = {512, 512, 512, 512, 256};
    s.output_classes = classes;
    return s;
}

int ModelSpec::input_size() const {
    if (type == ModelType::cnn) return input_grid_side * input_grid_side;
    const int L = distance();
    return 2 * L * (L - 1);
}

void ModelSpec::validate() const {
    if (input_grid_side < 3 || input_grid_side % 2 == 0) throw std::invalid_argument("grid side must be odd and >= 3");
    if (output_classes < 1) throw std::invalid_argument("model needs at least one output class");
    if (type == ModelType::mlp && !conv_layers.empty()) throw std::invalid_argument("mlp models have no conv layers");
    for (const auto& c : conv_layers)
        if (c.kernel < 1 || c.filters < 1) throw std::invalid_argument("invalid conv layer");
    for (int w : dense_layers)
        if (w < 1) throw std::invalid_argument("invalid dense width");
}

template <typename T>
Tensor<T> embed_syndrome(const CodeLayout& layout, const Syndrome& s) {
    if (s.size() != layout.num_stabilizers()) throw std::invalid_argument("syndrome length does not match layout");
    const int side = layout.grid_side();
    Tensor<T> t{{side, side, 1}, std::vector<T>(static_cast<std::size_t>(side) * side, T(0))};
    for (std::size_t i = 0; i < layout.num_stabilizers(); ++i) {
        const auto& pos = layout.stabilizers()[i].position;
        t.values[pos.row * side + pos.col] = s.bits[i] ? T(1) : T(0);
    }
    return t;
}

template <typename T>
void encode_input(const ModelSpec& spec, const CodeLayout& layout, const Syndrome& s, T* row) {
    if (spec.input_grid_side != layout.grid_side()) throw std::invalid_argument("model was built for another distance");
    if (s.size() != layout.num_stabilizers()) throw std::invalid_argument("syndrome length does not match layout");
    if (spec.type == ModelType::mlp) {
        for (std::size_t i = 0; i < s.size(); ++i) row[i] = s.bits[i] ? T(1) : T(0);
        return;
    }
    const int side = layout.grid_side();
    std::fill(row, row + side * side, T(0));
    for (std::size_t i = 0; i < layout.num_stabilizers(); ++i) {
        const auto& pos = layout.stabilizers()[i].position;
        row[pos.row * side + pos.col] = s.bits[i] ? T(1) : T(0);
    }
}

template <typename T>
Model<T>::Model(ModelSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    build();
}

template <typename T>
Model<T>::Model(const Model& other) : spec_(other.spec_) {
    build();
    auto dst = parameters();
    auto src = other.parameter_values();
    for (std::size_t i = 0; i < dst.size(); ++i) *dst[i].value = *src[i];
}

template <typename T>
Model<T>& Model<T>::operator=(const Model& other) {
    if (this != &other) {
        Model copy(other);
        *this = std::move(copy);
    }
    return *this;
}

template <typename T>
void Model<T>::build() {
    layers_.clear();
    int width = spec_.input_size();
    if (spec_.type == ModelType::cnn) {
        const int side = spec_.input_grid_side;
        int channels = 1;
        for (const auto& c : spec_.conv_layers) {
            layers_.push_back(std::make_unique<Conv2D<T>>(side, side, channels, c.kernel, c.filters));
            channels = c.filters;
            width = side * side * channels;
            layers_.push_back(std::make_unique<Relu<T>>(width));
        }
    }
    for (int w : spec_.dense_layers) {
        layers_.push_back(std::make_unique<Dense<T>>(width, w));
        layers_.push_back(std::make_unique<Relu<T>>(w));
        width = w;
    }
    layers_.push_back(std::make_unique<Dense<T>>(width, spec_.output_classes));
}

template <typename T>
void Model<T>::initialize(std::uint64_t seed) {
    std::uint64_t layer_index = 0;
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        auto params = layers_[li]->parameters();
        if (params.empty()) continue;
        Matrix<T>& w = *params[0].value;
        Matrix<T>& b = *params[1].value;
        const bool output_layer = li + 1 == layers_.size();
        const double fan_in = static_cast<double>(w.rows());
        const double fan_out = static_cast<double>(w.cols());
        const double limit = output_layer ? std::sqrt(6.0 / (fan_in + fan_out)) : std::sqrt(6.0 / fan_in);
        CounterRng rng(seed, 0x696e6974ULL, layer_index++);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<T>((2.0 * rng.next_double() - 1.0) * limit);
        b.setZero();
    }
}

template <typename T>
Matrix<T> Model<T>::logits(const Matrix<T>& inputs) {
    if (inputs.cols() != spec_.input_size())
        throw std::invalid_argument("model input has width " + std::to_string(inputs.cols()) + ", expected " +
                                    std::to_string(spec_.input_size()));
    activations_.resize(layers_.size());
    const Matrix<T>* cur = &inputs;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        layers_[i]->forward(*cur, activations_[i]);
        cur = &activations_[i];
    }
    return activations_.back();
}

template <typename T>
Matrix<T> Model<T>::forward(const Matrix<T>& inputs) {
    return softmax<T>(logits(inputs));
}

template <typename T>
Matrix<T> Model<T>::infer(const Matrix<T>& inputs) const {
    if (inputs.cols() != spec_.input_size()) throw std::invalid_argument("model input width mismatch");
    // Chunked so the im2col buffers stay cache-sized.
    constexpr Eigen::Index chunk = 128;
    Matrix<T> out(inputs.rows(), spec_.output_classes);
    Matrix<T> a, b;
    for (Eigen::Index r0 = 0; r0 < inputs.rows(); r0 += chunk) {
        const Eigen::Index rows = std::min(chunk, inputs.rows() - r0);
        a = inputs.middleRows(r0, rows);
        for (const auto& layer : layers_) {
            layer->infer(a, b);
            std::swap(a, b);
        }
        out.middleRows(r0, rows) = softmax<T>(a);
    }
    return out;
}

template <typename T>
Tensor<T> Model<T>::forward(const Tensor<T>& input) {
    Matrix<T> x = Eigen::Map<const Matrix<T>>(input.values.data(), 1, static_cast<Eigen::Index>(input.values.size()));
    Matrix<T> p = forward(x);
    return {{spec_.output_classes}, std::vector<T>(p.data(), p.data() + p.size())};
}

template <typename T>
T Model<T>::loss_and_gradients(const Matrix<T>& inputs, const std::vector<int>& labels,
                               const std::vector<T>& label_weights) {
    const Eigen::Index batch = inputs.rows();
    if (static_cast<Eigen::Index>(labels.size()) != batch) throw std::invalid_argument("one label per input row required");
    const int k = spec_.output_classes;
    if (!label_weights.empty() && static_cast<int>(label_weights.size()) != k)
        throw std::invalid_argument("label weights must have one entry per class");
    const Matrix<T> z = logits(inputs);

    Matrix<T> grad(batch, k);
    T weight_sum = 0;
    T loss = 0;
    for (Eigen::Index r = 0; r < batch; ++r) {
        const int y = labels[r];
        if (y < 0 || y >= k) throw std::invalid_argument("label out of range");
        const T w = label_weights.empty() ? T(1) : label_weights[y];
        const T mx = z.row(r).maxCoeff();
        const auto shifted = (z.row(r).array() - mx).eval();
        const T sum = shifted.exp().sum();
        loss += w * (std::log(sum) - shifted(y));
        grad.row(r) = shifted.exp() / sum;
        grad(r, y) -= T(1);
        grad.row(r) *= w;
        weight_sum += w;
    }
    if (weight_sum <= T(0)) throw std::invalid_argument("label weights sum to zero on this batch");
    grad /= weight_sum;

    Matrix<T> upstream = std::move(grad);
    Matrix<T> downstream;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        layers_[i]->backward(upstream, i == 0 ? nullptr : &downstream);
        if (i > 0) std::swap(upstream, downstream);
    }
    return loss / weight_sum;
}

template <typename T>
std::vector<Parameter<T>> Model<T>::parameters() {
    std::vector<Parameter<T>> out;
    for (auto& layer : layers_)
        for (auto& p : layer->parameters()) out.push_back(p);
    return out;
}

template <typename T>
std::vector<const Matrix<T>*> Model<T>::parameter_values() const {
    std::vector<const Matrix<T>*> out;
    for (const auto& layer : layers_)
        for (auto& p : layer->parameters()) out.push_back(p.value);
    return out;
}

template <typename T>
std::size_t Model<T>::parameter_count() const {
    std::size_t n = 0;
    for (const auto* m : parameter_values()) n += static_cast<std::size_t>(m->size());
    return n;
}

template <typename T>
template <typename U>
Model<U> Model<T>::cast() const {
    Model<U> out(spec_);
    auto dst = out.parameters();
    auto src = parameter_values();
    for (std::size_t i = 0; i < dst.size(); ++i) *dst[i].value = src[i]->template cast<U>();
    return out;
}

template <typename T>
std::vector<int> predict_labels(const Matrix<T>& probabilities) {
    std::vector<int> labels(static_cast<std::size_t>(probabilities.rows()));
    for (Eigen::Index r = 0; r < probabilities.rows(); ++r) {
        int best = 0;
        for (Eigen::Index c = 1; c < probabilities.cols(); ++c)
            if (probabilities(r, c) > probabilities(r, best)) best = static_cast<int>(c);
        labels[r] = best;
    }
    return labels;
}

template <typename T>
int predict_label(const Model<T>& model, const Tensor<T>& input) {
    const Matrix<T> x = Eigen::Map<const Matrix<T>>(input.values.data(), 1, static_cast<Eigen::Index>(input.values.size()));
    return predict_labels<T>(model.infer(x))[0];
}

namespace {
constexpr char kModelMagic[4] = {'Q', 'E', 'N', 'N'};
constexpr std::uint16_t kModelVersion = 1;
}  // namespace

void save_model(const Model<float>& model, std::ostream& out) {
    const ModelSpec& s = model.spec();
    out.write(kModelMagic, 4);
    io::write_le<std::uint16_t>(out, kModelVersion);
    io::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(s.type));
    io::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.input_grid_side));
    io::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.output_classes));
    io::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.conv_layers.size()));
    for (const auto& c : s.conv_layers) {
        io::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(c.kernel));
        io::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(c.filters));
    }
    io::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(s.dense_layers.size()));
    for (int w : s.dense_layers) io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(w));
    io::write_le<std::uint64_t>(out, model.parameter_count());
    for (const auto* m : model.parameter_values())
        for (Eigen::Index i = 0; i < m->size(); ++i) io::write_le<float>(out, m->data()[i]);
    if (!out) throw std::runtime_error("failed to write model");
}

void save_model(const Model<float>& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    save_model(model, out);
}

Model<float> load_model(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kModelMagic, 4) != 0) throw std::runtime_error("not a model file (bad magic)");
    const auto version = io::read_le<std::uint16_t>(in);
    if (version != kModelVersion) throw std::runtime_error("unsupported model file version " + std::to_string(version));
    ModelSpec s;
    const auto type = io::read_le<std::uint8_t>(in);
    if (type > 1) throw std::runtime_error("unknown model type in file");
    s.type = static_cast<ModelType>(type);
    s.input_grid_side = io::read_le<std::uint16_t>(in);
    s.output_classes = io::read_le<std::uint16_t>(in);
    const auto convs = io::read_le<std::uint16_t>(in);
    for (int i = 0; i < convs; ++i) {
        ConvSpec c;
        c.kernel = io::read_le<std::uint16_t>(in);
        c.filters = io::read_le<std::uint16_t>(in);
        s.conv_layers.push_back(c);
    }
    const auto dense = io::read_le<std::uint16_t>(in);
    for (int i = 0; i < dense; ++i) s.dense_layers.push_back(static_cast<int>(io::read_le<std::uint32_t>(in)));
    Model<float> model(s);
    const auto count = io::read_le<std::uint64_t>(in);
    if (count != model.parameter_count()) throw std::runtime_error("model file parameter count does not match its spec");
    for (auto& p : model.parameters())
        for (Eigen::Index i = 0; i < p.value->size(); ++i) p.value->data()[i] = io::read_le<float>(in);
    return model;
}

Model<float> load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file " + path);
    return load_model(in);
}

template Tensor<float> embed_syndrome<float>(const CodeLayout&, const Syndrome&);
template Tensor<double> embed_syndrome<double>(const CodeLayout&, const Syndrome&);
template void encode_input<float>(const ModelSpec&, const CodeLayout&, const Syndrome&, float*);
template void encode_input<double>(const ModelSpec&, const CodeLayout&, const Syndrome&, double*);
template class Model<float>;
template class Model<double>;
template Model<double> Model<float>::cast<double>() const;
template Model<float> Model<double>::cast<float>() const;
template Model<float> Model<float>::cast<float>() const;
template Model<double> Model<double>::cast<double>() const;
template std::vector<int> predict_labels<float>(const Matrix<float>&);
template std::vector<int> predict_labels<double>(const Matrix<double>&);
template int predict_label<float>(const Model<float>&, const Tensor<float>&);
template int predict_label<double>(const Model<double>&, const Tensor<double>&);

}  // namespace qens::nn
