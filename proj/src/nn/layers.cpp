#include "qens/nn/layers.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace qens::nn {

template <typename T>
Dense<T>::Dense(int in, int out)
    : weight_(Matrix<T>::Zero(in, out)),
      bias_(Matrix<T>::Zero(1, out)),
      grad_weight_(Matrix<T>::Zero(in, out)),
      grad_bias_(Matrix<T>::Zero(1, out)) {}

template <typename T>
void Dense<T>::forward(const Matrix<T>& in, Matrix<T>& out) {
    if (in.cols() != weight_.rows()) throw std::invalid_argument("dense layer input width mismatch");
    input_ = in;
    out.noalias() = in * weight_;
    out.rowwise() += bias_.row(0);
}

template <typename T>
void Dense<T>::infer(const Matrix<T>& in, Matrix<T>& out) const {
    if (in.cols() != weight_.rows()) throw std::invalid_argument("dense layer input width mismatch");
    out.noalias() = in * weight_;
    out.rowwise() += bias_.row(0);
}

template <typename T>
void Dense<T>::backward(const Matrix<T>& grad_out, Matrix<T>* grad_in) {
    grad_weight_.noalias() = input_.transpose() * grad_out;
    grad_bias_ = grad_out.colwise().sum();
    if (grad_in) grad_in->noalias() = grad_out * weight_.transpose();
}

template <typename T>
std::vector<Parameter<T>> Dense<T>::parameters() {
    return {{"weight", &weight_, &grad_weight_}, {"bias", &bias_, &grad_bias_}};
}

template <typename T>
Conv2D<T>::Conv2D(int height, int width, int in_channels, int kernel, int filters)
    : height_(height),
      width_(width),
      channels_(in_channels),
      kernel_(kernel),
      filters_(filters),
      pad_((kernel - 1) / 2),
      weight_(Matrix<T>::Zero(kernel * kernel * in_channels, filters)),
      bias_(Matrix<T>::Zero(1, filters)),
      grad_weight_(Matrix<T>::Zero(kernel * kernel * in_channels, filters)),
      grad_bias_(Matrix<T>::Zero(1, filters)) {
    if (kernel < 1 || filters < 1 || in_channels < 1) throw std::invalid_argument("invalid convolution shape");
}

template <typename T>
void Conv2D<T>::im2col(const Matrix<T>& in, Matrix<T>& columns) const {
    const int hwc = height_ * width_ * channels_;
    if (in.cols() != hwc) throw std::invalid_argument("convolution input width mismatch");
    const Eigen::Index batch = in.rows();
    const int k = kernel_;
    const int c = channels_;
    columns.resize(batch * height_ * width_, static_cast<Eigen::Index>(k) * k * c);
    for (Eigen::Index b = 0; b < batch; ++b) {
        const T* src = in.data() + b * hwc;
        for (int y = 0; y < height_; ++y)
            for (int x = 0; x < width_; ++x) {
                T* row = columns.data() + ((b * height_ + y) * width_ + x) * columns.cols();
                for (int ky = 0; ky < k; ++ky) {
                    const int iy = y + ky - pad_;
                    for (int kx = 0; kx < k; ++kx) {
                        const int ix = x + kx - pad_;
                        T* dst = row + (ky * k + kx) * c;
                        if (iy < 0 || iy >= height_ || ix < 0 || ix >= width_)
                            std::fill(dst, dst + c, T(0));
                        else
                            std::memcpy(dst, src + (iy * width_ + ix) * c, sizeof(T) * c);
                    }
                }
            }
    }
}

template <typename T>
void Conv2D<T>::apply(const Matrix<T>& columns, Eigen::Index batch, Matrix<T>& out) const {
    out.resize(batch, static_cast<Eigen::Index>(height_) * width_ * filters_);
    Eigen::Map<Matrix<T>> out_rows(out.data(), batch * height_ * width_, filters_);
    out_rows.noalias() = columns * weight_;
    out_rows.rowwise() += bias_.row(0);
}

template <typename T>
void Conv2D<T>::forward(const Matrix<T>& in, Matrix<T>& out) {
    im2col(in, columns_);
    apply(columns_, in.rows(), out);
}

template <typename T>
void Conv2D<T>::infer(const Matrix<T>& in, Matrix<T>& out) const {
    Matrix<T> columns;
    im2col(in, columns);
    apply(columns, in.rows(), out);
}

template <typename T>
void Conv2D<T>::backward(const Matrix<T>& grad_out, Matrix<T>* grad_in) {
    const Eigen::Index batch = grad_out.rows();
    Eigen::Map<const Matrix<T>> g(grad_out.data(), batch * height_ * width_, filters_);
    grad_weight_.noalias() = columns_.transpose() * g;
    grad_bias_ = g.colwise().sum();
    if (!grad_in) return;
    const Matrix<T> dcols = g * weight_.transpose();
    const int hwc = height_ * width_ * channels_;
    const int k = kernel_;
    const int c = channels_;
    grad_in->setZero(batch, hwc);
    for (Eigen::Index b = 0; b < batch; ++b) {
        T* dst = grad_in->data() + b * hwc;
        for (int y = 0; y < height_; ++y)
            for (int x = 0; x < width_; ++x) {
                const T* row = dcols.data() + ((b * height_ + y) * width_ + x) * dcols.cols();
                for (int ky = 0; ky < k; ++ky) {
                    const int iy = y + ky - pad_;
                    if (iy < 0 || iy >= height_) continue;
                    for (int kx = 0; kx < k; ++kx) {
                        const int ix = x + kx - pad_;
                        if (ix < 0 || ix >= width_) continue;
                        const T* s = row + (ky * k + kx) * c;
                        T* d = dst + (iy * width_ + ix) * c;
                        for (int ch = 0; ch < c; ++ch) d[ch] += s[ch];
                    }
                }
            }
    }
}

template <typename T>
std::vector<Parameter<T>> Conv2D<T>::parameters() {
    return {{"kernel", &weight_, &grad_weight_}, {"bias", &bias_, &grad_bias_}};
}

template <typename T>
void Relu<T>::forward(const Matrix<T>& in, Matrix<T>& out) {
    out = in.cwiseMax(T(0));
    output_ = out;
}

template <typename T>
void Relu<T>::backward(const Matrix<T>& grad_out, Matrix<T>* grad_in) {
    if (!grad_in) return;
    *grad_in = (output_.array() > T(0)).select(grad_out, T(0));
}

template <typename T>
Matrix<T> softmax(const Matrix<T>& logits) {
    Matrix<T> p(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const T mx = logits.row(r).maxCoeff();
        p.row(r) = (logits.row(r).array() - mx).exp();
        p.row(r) /= p.row(r).sum();
    }
    return p;
}

template class Dense<float>;
template class Dense<double>;
template class Conv2D<float>;
template class Conv2D<double>;
template class Relu<float>;
template class Relu<double>;
template Matrix<float> softmax(const Matrix<float>&);
template Matrix<double> softmax(const Matrix<double>&);

}  // namespace qens::nn
