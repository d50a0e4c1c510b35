#include "qens/nn/train.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "qens/noise.hpp"

namespace qens::nn {

template <typename T>
void amsgrad_step(OptimizerState<T>& state, const std::vector<Parameter<T>>& params) {
    if (state.first_moment.empty()) {
        for (const auto& p : params) {
            state.first_moment.push_back(Matrix<T>::Zero(p.value->rows(), p.value->cols()));
            state.second_moment.push_back(Matrix<T>::Zero(p.value->rows(), p.value->cols()));
            state.max_second_moment.push_back(Matrix<T>::Zero(p.value->rows(), p.value->cols()));
        }
    }
    if (state.first_moment.size() != params.size()) throw std::invalid_argument("optimizer state does not match parameters");
    ++state.step;
    const T b1 = static_cast<T>(state.beta1);
    const T b2 = static_cast<T>(state.beta2);
    const T lr = static_cast<T>(state.learning_rate);
    const T eps = static_cast<T>(state.epsilon);
    const T c1 = static_cast<T>(1.0 - std::pow(state.beta1, static_cast<double>(state.step)));
    const T c2 = static_cast<T>(1.0 - std::pow(state.beta2, static_cast<double>(state.step)));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto g = params[i].grad->array();
        auto m = state.first_moment[i].array();
        auto v = state.second_moment[i].array();
        auto vmax = state.max_second_moment[i].array();
        if (g.size() != m.size()) throw std::invalid_argument("gradient shape does not match optimizer state");
        m = b1 * m + (T(1) - b1) * g;
        v = b2 * v + (T(1) - b2) * g.square();
        vmax = vmax.max(v);
        params[i].value->array() -= lr * (m / c1) / ((vmax / c2).sqrt() + eps);
    }
}

PlateauSchedule::PlateauSchedule(double learning_rate, double factor, int patience, double min_delta,
                                 double min_learning_rate, int early_stop_patience)
    : learning_rate_(learning_rate),
      factor_(factor),
      min_delta_(min_delta),
      min_learning_rate_(min_learning_rate),
      patience_(patience),
      early_stop_patience_(early_stop_patience) {}

bool PlateauSchedule::update(double loss) {
    improved_ = loss < best_ - min_delta_;
    if (improved_) {
        best_ = loss;
        since_reduction_ = 0;
        since_improvement_ = 0;
        return false;
    }
    ++since_reduction_;
    ++since_improvement_;
    if (since_reduction_ >= patience_) {
        learning_rate_ *= factor_;
        since_reduction_ = 0;
    }
    if (learning_rate_ < min_learning_rate_) {
        stop_reason_ = "learning rate below minimum";
        return true;
    }
    if (since_improvement_ >= early_stop_patience_) {
        stop_reason_ = "loss stopped improving";
        return true;
    }
    return false;
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("batch size must be positive");
    if (max_epochs < 1) throw std::invalid_argument("max epochs must be positive");
    if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) throw std::invalid_argument("plateau factor must lie in (0, 1)");
    if (plateau_patience < 1 || early_stop_patience < 1) throw std::invalid_argument("patience must be positive");
    if (!(min_delta >= 0.0)) throw std::invalid_argument("min_delta must be non-negative");
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
        throw std::invalid_argument("validation fraction must lie in [0, 1)");
}

void TrainingLog::write_csv(std::ostream& out) const {
    const bool val = !epochs.empty() && !std::isnan(epochs.front().val_loss);
    out << "epoch,loss,accuracy,lr" << (val ? ",val_loss,val_accuracy" : "") << '\n';
    out << std::setprecision(17);
    for (const auto& e : epochs) {
        out << e.epoch << ',' << e.loss << ',' << e.accuracy << ',' << e.learning_rate;
        if (val) out << ',' << e.val_loss << ',' << e.val_accuracy;
        out << '\n';
    }
}

namespace {

template <typename T>
void gather_rows(const Matrix<T>& src, const std::vector<std::size_t>& order, std::size_t begin, std::size_t end,
                 Matrix<T>& dst) {
    dst.resize(static_cast<Eigen::Index>(end - begin), src.cols());
    for (std::size_t i = begin; i < end; ++i) dst.row(static_cast<Eigen::Index>(i - begin)) = src.row(static_cast<Eigen::Index>(order[i]));
}

void shuffle(std::vector<std::size_t>& v, std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    CounterRng rng(seed, stream, counter);
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.next_below(i)]);
}

}  // namespace

template <typename T>
std::pair<double, double> evaluate_classifier(Model<T>& model, const Matrix<T>& inputs, const std::vector<int>& labels,
                                              int batch_size) {
    const auto n = static_cast<std::size_t>(inputs.rows());
    if (n == 0) return {0.0, 0.0};
    double loss = 0.0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < n; begin += batch_size) {
        const std::size_t end = std::min(n, begin + static_cast<std::size_t>(batch_size));
        const Matrix<T> z = model.logits(inputs.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)));
        for (Eigen::Index r = 0; r < z.rows(); ++r) {
            const int y = labels[begin + r];
            const double mx = z.row(r).maxCoeff();
            double sum = 0.0;
            int best = 0;
            for (Eigen::Index c = 0; c < z.cols(); ++c) {
                sum += std::exp(static_cast<double>(z(r, c)) - mx);
                if (z(r, c) > z(r, best)) best = static_cast<int>(c);
            }
            loss += std::log(sum) - (static_cast<double>(z(r, y)) - mx);
            correct += best == y;
        }
    }
    return {loss / static_cast<double>(n), static_cast<double>(correct) / static_cast<double>(n)};
}

template <typename T>
TrainingLog train(Model<T>& model, const Matrix<T>& inputs, const std::vector<int>& labels, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
    config.validate();
    const auto n = static_cast<std::size_t>(inputs.rows());
    if (n == 0) throw std::invalid_argument("cannot train on an empty dataset");
    if (labels.size() != n) throw std::invalid_argument("one label per sample required");
    const int k = model.spec().output_classes;
    for (int y : labels)
        if (y < 0 || y >= k) throw std::invalid_argument("label " + std::to_string(y) + " out of range");
    std::vector<T> weights;
    if (!config.label_weights.empty()) {
        if (static_cast<int>(config.label_weights.size()) != k) throw std::invalid_argument("need one label weight per class");
        for (double w : config.label_weights) weights.push_back(static_cast<T>(w));
    }

    constexpr std::uint64_t kSplitStream = 0x73706c6974ULL;
    constexpr std::uint64_t kShuffleStream = 0x73687566ULL;
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::vector<std::size_t> train_idx = all;
    Matrix<T> val_inputs;
    std::vector<int> val_labels;
    if (config.validation_fraction > 0.0) {
        shuffle(all, config.seed, kSplitStream, 0);
        const auto n_val = static_cast<std::size_t>(std::floor(config.validation_fraction * static_cast<double>(n)));
        if (n_val == 0 || n_val >= n) throw std::invalid_argument("validation split leaves an empty set");
        std::vector<std::size_t> val_idx(all.end() - static_cast<std::ptrdiff_t>(n_val), all.end());
        std::sort(val_idx.begin(), val_idx.end());
        train_idx.assign(all.begin(), all.end() - static_cast<std::ptrdiff_t>(n_val));
        std::sort(train_idx.begin(), train_idx.end());
        gather_rows(inputs, val_idx, 0, val_idx.size(), val_inputs);
        for (auto i : val_idx) val_labels.push_back(labels[i]);
    }

    OptimizerState<T> state;
    state.learning_rate = config.learning_rate;
    PlateauSchedule schedule(config.learning_rate, config.plateau_factor, config.plateau_patience, config.min_delta,
                             config.min_learning_rate, config.early_stop_patience);
    TrainingLog log;
    std::unique_ptr<Model<T>> best;
    Matrix<T> batch;
    std::vector<int> batch_labels;
    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::vector<std::size_t> order = train_idx;
        shuffle(order, config.seed, kShuffleStream, static_cast<std::uint64_t>(epoch));
        double loss_sum = 0.0;
        std::size_t correct = 0;
        const double lr_used = state.learning_rate;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(config.batch_size));
            gather_rows(inputs, order, begin, end, batch);
            batch_labels.resize(end - begin);
            for (std::size_t i = begin; i < end; ++i) batch_labels[i - begin] = labels[order[i]];
            const T loss = model.loss_and_gradients(batch, batch_labels, weights);
            loss_sum += static_cast<double>(loss) * static_cast<double>(end - begin);
            const auto predicted = predict_labels<T>(model.activations().back());
            for (std::size_t i = 0; i < predicted.size(); ++i) correct += predicted[i] == batch_labels[i];
            amsgrad_step(state, model.parameters());
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss = loss_sum / static_cast<double>(order.size());
        rec.accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
        rec.learning_rate = lr_used;
        double monitored = rec.loss;
        if (!val_labels.empty()) {
            std::tie(rec.val_loss, rec.val_accuracy) = evaluate_classifier(model, val_inputs, val_labels);
            monitored = rec.val_loss;
        }
        log.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);
        const bool stop = schedule.update(monitored);
        if (config.restore_best && schedule.improved()) best = std::make_unique<Model<T>>(model);
        state.learning_rate = schedule.learning_rate();
        if (stop) {
            log.stop_reason = schedule.stop_reason();
            break;
        }
    }
    if (log.stop_reason.empty()) log.stop_reason = "reached max epochs";
    if (config.restore_best && best) model = *best;
    return log;
}

template void amsgrad_step<float>(OptimizerState<float>&, const std::vector<Parameter<float>>&);
template void amsgrad_step<double>(OptimizerState<double>&, const std::vector<Parameter<double>>&);
template TrainingLog train<float>(Model<float>&, const Matrix<float>&, const std::vector<int>&, const TrainConfig&,
                                  const std::function<void(const EpochRecord&)>&);
template TrainingLog train<double>(Model<double>&, const Matrix<double>&, const std::vector<int>&, const TrainConfig&,
                                   const std::function<void(const EpochRecord&)>&);
template std::pair<double, double> evaluate_classifier<float>(Model<float>&, const Matrix<float>&, const std::vector<int>&, int);
template std::pair<double, double> evaluate_classifier<double>(Model<double>&, const Matrix<double>&, const std::vector<int>&, int);

}  // namespace qens::nn
