#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "qens/nn/model.hpp"

namespace qens::nn {

/// AMSGrad state: Adam moments plus the running elementwise maximum of the
/// second moment, one entry per parameter tensor.
template <typename T>
struct OptimizerState {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    std::vector<Matrix<T>> first_moment;
    std::vector<Matrix<T>> second_moment;
    std::vector<Matrix<T>> max_second_moment;
};

/// One AMSGrad update of every parameter from its stored gradient:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,  vmax <- max(vmax, v)
///   p <- p - lr * m/(1-b1^t) / (sqrt(vmax/(1-b2^t)) + eps)
/// Moments are allocated on the first call.
template <typename T>
void amsgrad_step(OptimizerState<T>& state, const std::vector<Parameter<T>>& params);

/// Learning-rate reduction on plateau plus early stopping. An epoch counts as
/// an improvement when its loss beats the best so far by at least min_delta.
class PlateauSchedule {
public:
    PlateauSchedule(double learning_rate, double factor, int patience, double min_delta, double min_learning_rate,
                    int early_stop_patience);

    /// Feeds one epoch's monitored loss; returns true when training should stop.
    bool update(double loss);
    double learning_rate() const { return learning_rate_; }
    bool improved() const { return improved_; }
    const std::string& stop_reason() const { return stop_reason_; }

private:
    double learning_rate_, factor_, min_delta_, min_learning_rate_;
    int patience_, early_stop_patience_;
    double best_ = std::numeric_limits<double>::infinity();
    int since_reduction_ = 0;
    int since_improvement_ = 0;
    bool improved_ = false;
    std::string stop_reason_;
};

struct TrainConfig {
    int batch_size = 256;
    int max_epochs = 30;
    double learning_rate = 1e-3;
    double plateau_factor = 0.5;
    int plateau_patience = 2;
    double min_delta = 1e-4;
    double min_learning_rate = 1e-5;
    /// Epochs without improvement before stopping outright.
    int early_stop_patience = 6;
    /// One weight per class; empty means all ones.
    std::vector<double> label_weights;
    std::uint64_t seed = 0;
    /// Fraction of samples held out to monitor instead of the training loss.
    double validation_fraction = 0.0;
    /// Restore the parameters of the best monitored epoch when done.
    bool restore_best = false;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0;
    double loss = 0.0;
    double accuracy = 0.0;
    double learning_rate = 0.0;
    double val_loss = std::numeric_limits<double>::quiet_NaN();
    double val_accuracy = std::numeric_limits<double>::quiet_NaN();
};

struct TrainingLog {
    std::vector<EpochRecord> epochs;
    std::string stop_reason;

    /// epoch,loss,accuracy,lr (plus val_loss,val_accuracy when monitored).
    void write_csv(std::ostream& out) const;
};

/// Mini-batch AMSGrad with plateau scheduling. Deterministic for a given
/// model initialisation, data and config.seed.
template <typename T>
TrainingLog train(Model<T>& model, const Matrix<T>& inputs, const std::vector<int>& labels, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Mean cross-entropy and accuracy of the model on a labelled set.
template <typename T>
std::pair<double, double> evaluate_classifier(Model<T>& model, const Matrix<T>& inputs, const std::vector<int>& labels,
                                              int batch_size = 1024);

}  // namespace qens::nn
