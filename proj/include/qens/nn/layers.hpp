#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace qens::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A trainable tensor and its gradient, both owned by a layer.
template <typename T>
struct Parameter {
    std::string name;
    Matrix<T>* value = nullptr;
    Matrix<T>* grad = nullptr;
};

/// Layers map a batch (one row per sample) to a batch. forward() caches what
/// backward() needs, so calls must alternate on the same batch.
template <typename T>
class Layer {
public:
    virtual ~Layer() = default;
    virtual void forward(const Matrix<T>& in, Matrix<T>& out) = 0;
    /// Same result as forward() without caching; safe for concurrent callers.
    virtual void infer(const Matrix<T>& in, Matrix<T>& out) const = 0;
    /// Writes parameter gradients and, when grad_in is non-null, the gradient
    /// with respect to the layer input.
    virtual void backward(const Matrix<T>& grad_out, Matrix<T>* grad_in) = 0;
    virtual std::vector<Parameter<T>> parameters() { return {}; }
    virtual int output_size() const = 0;
};

template <typename T>
class Dense final : public Layer<T> {
public:
    Dense(int in, int out);
    void forward(const Matrix<T>& in, Matrix<T>& out) override;
    void infer(const Matrix<T>& in, Matrix<T>& out) const override;
    void backward(const Matrix<T>& grad_out, Matrix<T>* grad_in) override;
    std::vector<Parameter<T>> parameters() override;
    int output_size() const override { return static_cast<int>(weight_.cols()); }

    Matrix<T>& weight() { return weight_; }
    Matrix<T>& bias() { return bias_; }

private:
    Matrix<T> weight_, bias_, grad_weight_, grad_bias_;
    Matrix<T> input_;
};

/// 2-D convolution with "same" padding over an NHWC-flattened input. For
/// even kernels the extra padding row/column goes to the bottom/right.
template <typename T>
class Conv2D final : public Layer<T> {
public:
    Conv2D(int height, int width, int in_channels, int kernel, int filters);
    void forward(const Matrix<T>& in, Matrix<T>& out) override;
    void infer(const Matrix<T>& in, Matrix<T>& out) const override;
    void backward(const Matrix<T>& grad_out, Matrix<T>* grad_in) override;
    std::vector<Parameter<T>> parameters() override;
    int output_size() const override { return height_ * width_ * filters_; }

    Matrix<T>& weight() { return weight_; }  // (k*k*C, F), row = (ky*k + kx)*C + c
    Matrix<T>& bias() { return bias_; }

private:
    void im2col(const Matrix<T>& in, Matrix<T>& columns) const;
    void apply(const Matrix<T>& columns, Eigen::Index batch, Matrix<T>& out) const;

    int height_, width_, channels_, kernel_, filters_, pad_;
    Matrix<T> weight_, bias_, grad_weight_, grad_bias_;
    Matrix<T> columns_;
};

template <typename T>
class Relu final : public Layer<T> {
public:
    explicit Relu(int size) : size_(size) {}
    void forward(const Matrix<T>& in, Matrix<T>& out) override;
    void infer(const Matrix<T>& in, Matrix<T>& out) const override { out = in.cwiseMax(T(0)); }
    void backward(const Matrix<T>& grad_out, Matrix<T>* grad_in) override;
    int output_size() const override { return size_; }

private:
    int size_;
    Matrix<T> output_;
};

/// Row-wise numerically stable softmax.
template <typename T>
Matrix<T> softmax(const Matrix<T>& logits);

}  // namespace qens::nn
