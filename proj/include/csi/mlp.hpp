#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "csi/error.hpp"
#include "csi/linalg.hpp"
#include "csi/nn.hpp"
#include "csi/preprocess.hpp"
#include "csi/rng.hpp"

namespace csi {

// Softmax classifier over rectifier hidden layers, trained with
// cross-entropy and hand-written backpropagation. Inputs are standardized
// with a normalizer fit on the classifier's own training inputs.
struct MlpClassifier {
    std::vector<DenseLayer> layers;  // last layer outputs K logits
    Normalizer input_norm;
    std::size_t class_count = 0;

    std::size_t input_dims() const { return layers.front().in_dims(); }

    void zero_gradients() {
        for (auto& l : layers) l.zero_gradients();
    }

    void apply_gradients(double learning_rate, double scale) {
        for (auto& l : layers) l.apply_gradients(learning_rate, scale);
    }
};

inline MlpClassifier mlp_init(std::size_t input_dims, std::span<const std::size_t> hidden,
                              std::size_t class_count, std::uint64_t seed) {
    if (input_dims == 0 || class_count < 2) throw ConfigError("MLP needs inputs and >= 2 classes");
    Rng rng(seed);
    MlpClassifier clf;
    clf.class_count = class_count;
    std::size_t prev = input_dims;
    for (std::size_t h : hidden) {
        if (h == 0) throw ConfigError("hidden width must be positive");
        clf.layers.emplace_back(h, prev, rng);
        prev = h;
    }
    clf.layers.emplace_back(class_count, prev, rng);
    clf.input_norm.mean.assign(input_dims, 0.0);
    clf.input_norm.stddev.assign(input_dims, 1.0);
    clf.input_norm.constant_columns.assign(input_dims, false);
    return clf;
}

namespace detail {

struct MlpTape {
    std::vector<std::vector<double>> activations;  // input + each layer output
    std::vector<double> probs;
};

inline void mlp_forward(const MlpClassifier& clf, std::span<const double> input, MlpTape& tape) {
    if (input.size() != clf.input_dims()) throw ShapeError("input does not match MLP width");
    tape.activations.resize(clf.layers.size() + 1);
    tape.activations[0].assign(input.begin(), input.end());
    for (std::size_t c = 0; c < input.size(); ++c)
        tape.activations[0][c] =
            (input[c] - clf.input_norm.mean[c]) / clf.input_norm.stddev[c];
    for (std::size_t l = 0; l < clf.layers.size(); ++l) {
        auto& out = tape.activations[l + 1];
        out.resize(clf.layers[l].out_dims());
        clf.layers[l].forward(tape.activations[l], out);
        if (l + 1 < clf.layers.size()) relu(out);
    }
    tape.probs.resize(clf.class_count);
    softmax(tape.activations.back(), tape.probs);
}

// Cross-entropy backward; returns the sample loss.
inline double mlp_backward(MlpClassifier& clf, const MlpTape& tape, int label) {
    const double p = std::max(tape.probs[static_cast<std::size_t>(label)], 1e-300);
    const double loss = -std::log(p);

    std::vector<double> grad(tape.probs);
    grad[static_cast<std::size_t>(label)] -= 1.0;  // d loss / d logits
    for (std::size_t l = clf.layers.size(); l-- > 0;) {
        std::vector<double> g_in(l > 0 ? clf.layers[l].in_dims() : 0);
        clf.layers[l].backward(tape.activations[l], grad, g_in);
        if (l > 0) {
            relu_backward(tape.activations[l], g_in);
            grad = std::move(g_in);
        }
    }
    return loss;
}

}  // namespace detail

struct MlpTrainResult {
    std::vector<double> loss_history;  // mean cross-entropy per epoch
};

inline MlpTrainResult mlp_train(MlpClassifier& clf, const Matrix& inputs,
                                std::span<const int> labels, const TrainConfig& config) {
    config.validate();
    if (inputs.rows() == 0) throw EmptyResultError("cannot train on empty data");
    if (inputs.rows() != labels.size()) throw ShapeError("label count does not match input rows");
    for (int l : labels)
        if (l < 0 || static_cast<std::size_t>(l) >= clf.class_count)
            throw ConfigError("label outside class range");

    clf.input_norm = fit_normalizer(inputs);
    Rng rng(derive_seed(config.seed, 0x371));
    const std::size_t n = inputs.rows();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    MlpTrainResult result;
    detail::MlpTape tape;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_indices(order, rng);
        double epoch_loss = 0.0;
        for (std::size_t batch_start = 0; batch_start < n; batch_start += config.batch_size) {
            const std::size_t batch_end = std::min(n, batch_start + config.batch_size);
            const auto batch_n = static_cast<double>(batch_end - batch_start);
            clf.zero_gradients();
            double batch_loss = 0.0;
            for (std::size_t i = batch_start; i < batch_end; ++i) {
                detail::mlp_forward(clf, inputs.row(order[i]), tape);
                batch_loss += detail::mlp_backward(clf, tape, labels[order[i]]);
            }
            if (!std::isfinite(batch_loss))
                throw TrainingError("MLP training diverged", epoch);
            clf.apply_gradients(config.learning_rate, 1.0 / batch_n);
            epoch_loss += batch_loss;
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(n));
    }
    return result;
}

struct MlpPrediction {
    int label = 0;
    std::vector<double> probabilities;
};

// Argmax of the softmax; ties resolve to the lowest class id.
inline MlpPrediction mlp_predict(const MlpClassifier& clf, std::span<const double> input) {
    detail::MlpTape tape;
    detail::mlp_forward(clf, input, tape);
    MlpPrediction pred;
    pred.probabilities = tape.probs;
    std::size_t best = 0;
    for (std::size_t i = 1; i < tape.probs.size(); ++i)
        if (tape.probs[i] > tape.probs[best]) best = i;
    pred.label = static_cast<int>(best);
    return pred;
}

// Finite-difference check of the cross-entropy gradients on one sample.
inline double mlp_gradient_check(MlpClassifier& clf, std::span<const double> input, int label,
                                 double fd_step) {
    detail::MlpTape tape;
    clf.zero_gradients();
    detail::mlp_forward(clf, input, tape);
    detail::mlp_backward(clf, tape, label);

    ParameterView params;
    for (auto& l : clf.layers) params.add_layer(l);

    auto loss_at = [&]() {
        detail::MlpTape t;
        detail::mlp_forward(clf, input, t);
        return -std::log(std::max(t.probs[static_cast<std::size_t>(label)], 1e-300));
    };

    double worst = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        const double analytic = *params.gradients[p];
        if (std::abs(analytic) <= 1e-8) continue;
        double* value = params.values[p];
        const double saved = *value;
        *value = saved + fd_step;
        const double up = loss_at();
        *value = saved - fd_step;
        const double down = loss_at();
        *value = saved;
        const double numeric = (up - down) / (2.0 * fd_step);
        const double rel = std::abs(analytic - numeric) /
                           std::max({std::abs(analytic), std::abs(numeric), 1e-12});
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace csi
