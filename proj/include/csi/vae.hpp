#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "csi/error.hpp"
#include "csi/linalg.hpp"
#include "csi/nn.hpp"
#include "csi/rng.hpp"

namespace csi {

inline constexpr std::size_t kLatentDims = 2;
inline constexpr double kLogVarClamp = 10.0;

// Per-frame code: a bi-dimensional Gaussian stored as four values. The
// log-variance parameterization is internal; stored codes expose
// (mu_1, mu_2, sigma_1, sigma_2).
struct LatentCode {
    double mu[kLatentDims] = {0.0, 0.0};
    double log_var[kLatentDims] = {0.0, 0.0};

    double sigma(std::size_t i) const { return std::exp(0.5 * log_var[i]); }

    // (mu_1, mu_2, sigma_1, sigma_2)
    std::vector<double> as_vector() const {
        return {mu[0], mu[1], sigma(0), sigma(1)};
    }

    static LatentCode from_vector(std::span<const double> v) {
        LatentCode code;
        code.mu[0] = v[0];
        code.mu[1] = v[1];
        for (std::size_t i = 0; i < kLatentDims; ++i) {
            const double sigma = std::max(v[2 + i], 1e-12);
            code.log_var[i] = 2.0 * std::log(sigma);
        }
        return code;
    }
};

// Encoder D -> h1 -> h2 -> 4 (mu, log-variance), decoder 2 -> h2 -> h1 -> D.
// Rectifier on hidden layers, linear outputs.
struct VaeModel {
    DenseLayer enc1, enc2, enc_head;
    DenseLayer dec1, dec2, dec_out;
    std::size_t input_dims = 0;
    std::size_t hidden1 = 0;
    std::size_t hidden2 = 0;

    std::size_t parameter_count() const {
        return enc1.parameter_count() + enc2.parameter_count() + enc_head.parameter_count() +
               dec1.parameter_count() + dec2.parameter_count() + dec_out.parameter_count();
    }

    void zero_gradients() {
        enc1.zero_gradients();
        enc2.zero_gradients();
        enc_head.zero_gradients();
        dec1.zero_gradients();
        dec2.zero_gradients();
        dec_out.zero_gradients();
    }

    void apply_gradients(double learning_rate, double scale) {
        enc1.apply_gradients(learning_rate, scale);
        enc2.apply_gradients(learning_rate, scale);
        enc_head.apply_gradients(learning_rate, scale);
        dec1.apply_gradients(learning_rate, scale);
        dec2.apply_gradients(learning_rate, scale);
        dec_out.apply_gradients(learning_rate, scale);
    }
};

inline VaeModel vae_init(std::size_t input_dims, std::size_t hidden1, std::size_t hidden2,
                         std::uint64_t seed) {
    if (input_dims == 0 || hidden1 == 0 || hidden2 == 0)
        throw ConfigError("VAE dimensions must be positive");
    Rng rng(seed);
    VaeModel m;
    m.input_dims = input_dims;
    m.hidden1 = hidden1;
    m.hidden2 = hidden2;
    m.enc1 = DenseLayer(hidden1, input_dims, rng);
    m.enc2 = DenseLayer(hidden2, hidden1, rng);
    m.enc_head = DenseLayer(2 * kLatentDims, hidden2, rng);
    m.dec1 = DenseLayer(hidden2, kLatentDims, rng);
    m.dec2 = DenseLayer(hidden1, hidden2, rng);
    m.dec_out = DenseLayer(input_dims, hidden1, rng);
    return m;
}

namespace detail {

// Activations kept alive for the backward pass.
struct VaeTape {
    std::vector<double> input;
    std::vector<double> e1, e2, head;  // head = (mu, raw log-variance)
    LatentCode code;                   // with clamped log-variance
    double z[kLatentDims];
    double noise[kLatentDims];
    std::vector<double> d1, d2, reconstruction;
    bool clamped[kLatentDims] = {false, false};
};

inline void vae_forward(const VaeModel& m, std::span<const double> frame,
                        std::span<const double> noise, VaeTape& tape) {
    if (frame.size() != m.input_dims) throw ShapeError("frame does not match VAE input width");
    tape.input.assign(frame.begin(), frame.end());
    tape.e1.resize(m.hidden1);
    tape.e2.resize(m.hidden2);
    tape.head.resize(2 * kLatentDims);
    m.enc1.forward(frame, tape.e1);
    relu(tape.e1);
    m.enc2.forward(tape.e1, tape.e2);
    relu(tape.e2);
    m.enc_head.forward(tape.e2, tape.head);
    for (std::size_t i = 0; i < kLatentDims; ++i) {
        tape.code.mu[i] = tape.head[i];
        const double raw = tape.head[kLatentDims + i];
        tape.code.log_var[i] = std::clamp(raw, -kLogVarClamp, kLogVarClamp);
        tape.clamped[i] = raw < -kLogVarClamp || raw > kLogVarClamp;
        tape.noise[i] = noise[i];
        tape.z[i] = tape.code.mu[i] + tape.code.sigma(i) * noise[i];
    }
    tape.d1.resize(m.hidden2);
    tape.d2.resize(m.hidden1);
    tape.reconstruction.resize(m.input_dims);
    m.dec1.forward(std::span<const double>(tape.z, kLatentDims), tape.d1);
    relu(tape.d1);
    m.dec2.forward(tape.d1, tape.d2);
    relu(tape.d2);
    m.dec_out.forward(tape.d2, tape.reconstruction);
}

}  // namespace detail

inline LatentCode vae_encode(const VaeModel& m, std::span<const double> frame) {
    detail::VaeTape tape;
    const double zero_noise[kLatentDims] = {0.0, 0.0};
    detail::vae_forward(m, frame, zero_noise, tape);
    return tape.code;
}

inline void vae_reparameterize(const LatentCode& code, std::span<const double> noise,
                               std::span<double> z) {
    for (std::size_t i = 0; i < kLatentDims; ++i)
        z[i] = code.mu[i] + code.sigma(i) * noise[i];
}

inline std::vector<double> vae_decode(const VaeModel& m, std::span<const double> z) {
    if (z.size() != kLatentDims) throw ShapeError("latent width must be 2");
    std::vector<double> d1(m.hidden2), d2(m.hidden1), out(m.input_dims);
    m.dec1.forward(z, d1);
    relu(d1);
    m.dec2.forward(d1, d2);
    relu(d2);
    m.dec_out.forward(d2, out);
    return out;
}

// KL divergence of N(mu, sigma^2) from the standard normal, summed over
// the latent dimensions: 1/2 sum(mu^2 + sigma^2 - log sigma^2 - 1).
inline double kl_divergence(const LatentCode& code) {
    double kl = 0.0;
    for (std::size_t i = 0; i < kLatentDims; ++i) {
        const double var = std::exp(code.log_var[i]);
        kl += 0.5 * (code.mu[i] * code.mu[i] + var - code.log_var[i] - 1.0);
    }
    return kl;
}

// Reconstruction term: mean squared error over the frame's dimensions.
inline double reconstruction_mse(std::span<const double> frame,
                                 std::span<const double> reconstruction) {
    if (frame.size() != reconstruction.size()) throw ShapeError("reconstruction width mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const double d = reconstruction[i] - frame[i];
        acc += d * d;
    }
    return acc / static_cast<double>(frame.size());
}

inline double elbo_loss(std::span<const double> frame, std::span<const double> reconstruction,
                        const LatentCode& code, double kl_weight) {
    return reconstruction_mse(frame, reconstruction) + kl_weight * kl_divergence(code);
}

namespace detail {

// Accumulates gradients for one sample; returns the sample's loss.
inline double vae_backward(VaeModel& m, const VaeTape& tape, double kl_weight) {
    const std::size_t d = m.input_dims;
    std::vector<double> grad(d);
    for (std::size_t i = 0; i < d; ++i)
        grad[i] = 2.0 * (tape.reconstruction[i] - tape.input[i]) / static_cast<double>(d);
    const double loss = elbo_loss(tape.input, tape.reconstruction, tape.code, kl_weight);

    std::vector<double> g_d2(m.hidden1), g_d1(m.hidden2);
    double g_z[kLatentDims];
    m.dec_out.backward(tape.d2, grad, g_d2);
    relu_backward(tape.d2, g_d2);
    m.dec2.backward(tape.d1, g_d2, g_d1);
    relu_backward(tape.d1, g_d1);
    m.dec1.backward(std::span<const double>(tape.z, kLatentDims), g_d1, {g_z, kLatentDims});

    std::vector<double> g_head(2 * kLatentDims);
    for (std::size_t i = 0; i < kLatentDims; ++i) {
        const double sigma = tape.code.sigma(i);
        const double var = sigma * sigma;
        // z = mu + sigma * eps; dz/dlogvar = eps * sigma / 2
        g_head[i] = g_z[i] + kl_weight * tape.code.mu[i];
        double g_logvar = g_z[i] * tape.noise[i] * sigma * 0.5 +
                          kl_weight * 0.5 * (var - 1.0);
        if (tape.clamped[i]) g_logvar = 0.0;
        g_head[kLatentDims + i] = g_logvar;
    }

    std::vector<double> g_e2(m.hidden2), g_e1(m.hidden1);
    m.enc_head.backward(tape.e2, g_head, g_e2);
    relu_backward(tape.e2, g_e2);
    m.enc2.backward(tape.e1, g_e2, g_e1);
    relu_backward(tape.e1, g_e1);
    m.enc1.backward(tape.input, g_e1, {});
    return loss;
}

}  // namespace detail

struct VaeTrainResult {
    std::vector<double> loss_history;  // mean loss per epoch
};

// Mini-batch gradient descent with reparameterization noise drawn from the
// seeded generator. The KL weight ramps linearly over the first tenth of
// the epochs. Fixed seed gives a bit-identical loss history.
inline VaeTrainResult vae_train(VaeModel& m, const Matrix& frames, const TrainConfig& config) {
    config.validate();
    if (frames.rows() == 0) throw EmptyResultError("cannot train on empty data");
    Rng rng(derive_seed(config.seed, 0x7ae));

    const std::size_t n = frames.rows();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    const std::size_t warmup = std::max<std::size_t>(1, config.epochs / 10);

    VaeTrainResult result;
    detail::VaeTape tape;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const double beta =
            config.kl_weight * std::min(1.0, static_cast<double>(epoch + 1) / static_cast<double>(warmup));
        shuffle_indices(order, rng);
        double epoch_loss = 0.0;
        for (std::size_t batch_start = 0; batch_start < n; batch_start += config.batch_size) {
            const std::size_t batch_end = std::min(n, batch_start + config.batch_size);
            const auto batch_n = static_cast<double>(batch_end - batch_start);
            m.zero_gradients();
            double batch_loss = 0.0;
            for (std::size_t i = batch_start; i < batch_end; ++i) {
                double noise[kLatentDims];
                for (auto& e : noise) e = rng.normal();
                detail::vae_forward(m, frames.row(order[i]), noise, tape);
                batch_loss += detail::vae_backward(m, tape, beta);
            }
            if (!std::isfinite(batch_loss))
                throw TrainingError("VAE training diverged", epoch);
            m.apply_gradients(config.learning_rate, 1.0 / batch_n);
            epoch_loss += batch_loss;
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(n));
    }
    return result;
}

// Maximum relative disagreement between the analytic gradient and central
// finite differences, over all parameters with |g| above the floor.
// Reparameterization noise is held fixed during the check.
inline double vae_gradient_check(VaeModel& m, std::span<const double> frame, double fd_step,
                                 double kl_weight = 1.0,
                                 std::span<const double> noise_in = {}) {
    const double zero_noise[kLatentDims] = {0.0, 0.0};
    std::span<const double> noise =
        noise_in.empty() ? std::span<const double>(zero_noise, kLatentDims) : noise_in;

    detail::VaeTape tape;
    m.zero_gradients();
    detail::vae_forward(m, frame, noise, tape);
    detail::vae_backward(m, tape, kl_weight);

    ParameterView params;
    params.add_layer(m.enc1);
    params.add_layer(m.enc2);
    params.add_layer(m.enc_head);
    params.add_layer(m.dec1);
    params.add_layer(m.dec2);
    params.add_layer(m.dec_out);

    auto loss_at = [&]() {
        detail::VaeTape t;
        detail::vae_forward(m, frame, noise, t);
        return elbo_loss(t.input, t.reconstruction, t.code, kl_weight);
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

inline Matrix vae_encode_all(const VaeModel& m, const Matrix& frames) {
    Matrix codes(frames.rows(), 2 * kLatentDims);
    for (std::size_t i = 0; i < frames.rows(); ++i) {
        const auto code = vae_encode(m, frames.row(i)).as_vector();
        std::copy(code.begin(), code.end(), codes.row(i).begin());
    }
    return codes;
}

// Reconstructs frames from stored (mu, sigma) codes; decoding is
// deterministic and uses the means.
inline Matrix vae_decode_codes(const VaeModel& m, const Matrix& codes) {
    Matrix out(codes.rows(), m.input_dims);
    for (std::size_t i = 0; i < codes.rows(); ++i) {
        auto row = codes.row(i);
        const double z[kLatentDims] = {row[0], row[1]};
        const auto rec = vae_decode(m, {z, kLatentDims});
        std::copy(rec.begin(), rec.end(), out.row(i).begin());
    }
    return out;
}

}  // namespace csi
