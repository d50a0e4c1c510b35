#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "qens/code.hpp"
#include "qens/nn/layers.hpp"

namespace qens::nn {

/// Shape plus row-major values.
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> values;

    std::size_t size() const { return values.size(); }
};

enum class ModelType : std::uint8_t { cnn = 0, mlp = 1 };

struct ConvSpec {
    int kernel = 2;
    int filters = 64;
    friend bool operator==(const ConvSpec&, const ConvSpec&) = default;
};

struct ModelSpec {
    ModelType type = ModelType::cnn;
    int input_grid_side = 9;
    std::vector<ConvSpec> conv_layers;
    std::vector<int> dense_layers;
    int output_classes = 2;

    /// Kernels L, L-1, ..., 2 with `filters` each, then one dense layer.
    static ModelSpec cnn(int distance, int classes, int filters = 64, int dense = 512);
    /// Four hidden layers of 512 then one of 256.
    static ModelSpec mlp(int distance, int classes);

    int distance() const { return (input_grid_side + 1) / 2; }
    /// Flattened input width: the syndrome grid for cnn, the raw syndrome for mlp.
    int input_size() const;
    void validate() const;
    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Syndrome placed on the (2L-1)x(2L-1) grid: each stabilizer's bit at its
/// own cell, data-qubit cells zero. Shape (2L-1, 2L-1, 1).
template <typename T>
Tensor<T> embed_syndrome(const CodeLayout& layout, const Syndrome& s);

/// Writes the model input for `s` into `row` (input_size() entries).
template <typename T>
void encode_input(const ModelSpec& spec, const CodeLayout& layout, const Syndrome& s, T* row);

/// Feed-forward classifier: ReLU hidden layers, linear output layer; softmax
/// is applied by forward() and by the loss.
template <typename T>
class Model {
public:
    explicit Model(ModelSpec spec);
    Model(const Model& other);
    Model& operator=(const Model& other);
    Model(Model&&) noexcept = default;
    Model& operator=(Model&&) noexcept = default;

    const ModelSpec& spec() const { return spec_; }

    /// He-uniform for ReLU layers, Glorot-uniform for the output layer, zero
    /// biases. Deterministic in seed.
    void initialize(std::uint64_t seed);

    /// Pre-softmax scores, one row per input row.
    Matrix<T> logits(const Matrix<T>& inputs);
    /// Class probabilities, one row per input row.
    Matrix<T> forward(const Matrix<T>& inputs);
    Tensor<T> forward(const Tensor<T>& input);
    /// Probabilities without touching cached state; safe for concurrent
    /// callers on a frozen model.
    Matrix<T> infer(const Matrix<T>& inputs) const;

    /// Weighted mean cross-entropy of the batch; fills every parameter
    /// gradient. Empty label_weights means all ones.
    T loss_and_gradients(const Matrix<T>& inputs, const std::vector<int>& labels,
                         const std::vector<T>& label_weights = {});

    std::vector<Parameter<T>> parameters();
    std::vector<const Matrix<T>*> parameter_values() const;
    std::size_t parameter_count() const;
    /// Output of every layer from the last forward pass, in layer order.
    const std::vector<Matrix<T>>& activations() const { return activations_; }

    template <typename U>
    Model<U> cast() const;

private:
    void build();

    ModelSpec spec_;
    std::vector<std::unique_ptr<Layer<T>>> layers_;
    std::vector<Matrix<T>> activations_;
};

/// Argmax per row; ties go to the lower label.
template <typename T>
std::vector<int> predict_labels(const Matrix<T>& probabilities);
template <typename T>
int predict_label(const Model<T>& model, const Tensor<T>& input);

/// Binary model file: "QENN", version, spec, then every parameter tensor in
/// declaration order as little-endian float32.
void save_model(const Model<float>& model, std::ostream& out);
void save_model(const Model<float>& model, const std::string& path);
Model<float> load_model(std::istream& in);
Model<float> load_model(const std::string& path);

}  // namespace qens::nn
