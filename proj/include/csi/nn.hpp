#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "csi/error.hpp"
#include "csi/linalg.hpp"
#include "csi/rng.hpp"

namespace csi {

// Fully connected layer y = W x + b with explicit gradient buffers.
// Backpropagation in this library is written by hand and checked against
// finite differences; there is no autograd.
struct DenseLayer {
    Matrix weights;  // out x in
    std::vector<double> bias;
    Matrix grad_weights;
    std::vector<double> grad_bias;

    DenseLayer() = default;
    DenseLayer(std::size_t out, std::size_t in, Rng& rng) {
        weights = Matrix(out, in);
        bias.assign(out, 0.0);
        // Scaled-uniform init over [-a, a], a = sqrt(6 / (in + out)).
        const double a = std::sqrt(6.0 / static_cast<double>(in + out));
        for (auto& w : weights.data()) w = rng.uniform(-a, a);
        zero_gradients();
    }

    std::size_t in_dims() const { return weights.cols(); }
    std::size_t out_dims() const { return weights.rows(); }

    void zero_gradients() {
        grad_weights = Matrix(weights.rows(), weights.cols());
        grad_bias.assign(bias.size(), 0.0);
    }

    void forward(std::span<const double> in, std::span<double> out) const {
        for (std::size_t r = 0; r < weights.rows(); ++r)
            out[r] = dot(weights.row(r), in) + bias[r];
    }

    // Accumulates parameter gradients for (d_out, input) and writes the
    // gradient w.r.t. the input into d_in (which may be empty for the
    // first layer).
    void backward(std::span<const double> input, std::span<const double> d_out,
                  std::span<double> d_in) {
        for (std::size_t r = 0; r < weights.rows(); ++r) {
            const double g = d_out[r];
            grad_bias[r] += g;
            auto gw = grad_weights.row(r);
            for (std::size_t c = 0; c < weights.cols(); ++c) gw[c] += g * input[c];
        }
        if (!d_in.empty()) {
            std::fill(d_in.begin(), d_in.end(), 0.0);
            for (std::size_t r = 0; r < weights.rows(); ++r) {
                const double g = d_out[r];
                auto wr = weights.row(r);
                for (std::size_t c = 0; c < weights.cols(); ++c) d_in[c] += g * wr[c];
            }
        }
    }

    void apply_gradients(double learning_rate, double scale) {
        const double step = learning_rate * scale;
        auto& w = weights.data();
        const auto& gw = grad_weights.data();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * gw[i];
        for (std::size_t i = 0; i < bias.size(); ++i) bias[i] -= step * grad_bias[i];
    }

    std::size_t parameter_count() const { return weights.data().size() + bias.size(); }
};

inline void relu(std::span<double> v) {
    for (auto& x : v) x = x > 0.0 ? x : 0.0;
}

// d_pre[i] = d_post[i] * relu'(pre[i]) computed from the activation output.
inline void relu_backward(std::span<const double> activated, std::span<double> grad) {
    for (std::size_t i = 0; i < grad.size(); ++i)
        if (activated[i] <= 0.0) grad[i] = 0.0;
}

inline void softmax(std::span<const double> logits, std::span<double> probs) {
    double max_logit = logits[0];
    for (double l : logits) max_logit = std::max(max_logit, l);
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = std::exp(logits[i] - max_logit);
        total += probs[i];
    }
    for (auto& p : probs) p /= total;
}

// Deterministic Fisher-Yates shuffle driven by the library generator.
inline void shuffle_indices(std::vector<std::size_t>& indices, Rng& rng) {
    for (std::size_t i = indices.size(); i > 1; --i)
        std::swap(indices[i - 1], indices[rng.below(i)]);
}

// Flat views over every parameter of a set of layers, used by the finite
// difference gradient checks.
struct ParameterView {
    std::vector<double*> values;
    std::vector<const double*> gradients;

    void add_layer(DenseLayer& layer) {
        for (auto& w : layer.weights.data()) values.push_back(&w);
        for (auto& b : layer.bias) values.push_back(&b);
        for (const auto& g : layer.grad_weights.data()) gradients.push_back(&g);
        for (const auto& g : layer.grad_bias) gradients.push_back(&g);
    }

    std::size_t size() const { return values.size(); }
};

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    double learning_rate = 0.01;
    double kl_weight = 1.0;  // VAE only
    std::uint64_t seed = 0;

    void validate() const {
        if (epochs == 0 || batch_size == 0) throw ConfigError("epochs and batch size must be positive");
        if (learning_rate < 0.0) throw ConfigError("learning rate must be non-negative");
        if (kl_weight < 0.0) throw ConfigError("KL weight must be non-negative");
    }
};

}  // namespace csi
