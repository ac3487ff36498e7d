#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "csi/rng.hpp"
#include "csi/vae.hpp"

using namespace csi;

namespace {

Matrix smooth_frames(std::size_t n, std::size_t d, Rng& rng) {
    Matrix m(n, d);
    std::vector<double> phase(d);
    for (auto& p : phase) p = rng.uniform(0.0, 6.28);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c)
            m(r, c) = std::sin(0.05 * static_cast<double>(r) + phase[c]) + 0.05 * rng.normal();
    return m;
}

}  // namespace

TEST_CASE("vae_init is deterministic per seed and counts parameters correctly") {
    const VaeModel a = vae_init(56, 64, 32, 9);
    const VaeModel b = vae_init(56, 64, 32, 9);
    const VaeModel c = vae_init(56, 64, 32, 10);
    CHECK(a.enc1.weights == b.enc1.weights);
    CHECK(a.dec_out.weights == b.dec_out.weights);
    CHECK(a.enc1.weights.data() != c.enc1.weights.data());

    const std::size_t expected = 56 * 64 + 64 + 64 * 32 + 32 + 32 * 4 + 4 +
                                 2 * 32 + 32 + 32 * 64 + 64 + 64 * 56 + 56;
    CHECK(a.parameter_count() == expected);
    CHECK_THROWS_AS(vae_init(0, 4, 2, 1), ConfigError);
}

TEST_CASE("zero noise makes the latent equal the mean") {
    const VaeModel m = vae_init(8, 6, 4, 21);
    Rng rng(22);
    std::vector<double> frame(8);
    for (auto& v : frame) v = rng.normal();
    const LatentCode code = vae_encode(m, frame);
    const double zero[2] = {0.0, 0.0};
    double z[2];
    vae_reparameterize(code, {zero, 2}, {z, 2});
    CHECK(z[0] == code.mu[0]);
    CHECK(z[1] == code.mu[1]);

    // nonzero noise shifts by sigma
    const double eps[2] = {1.0, -2.0};
    vae_reparameterize(code, {eps, 2}, {z, 2});
    CHECK_THAT(z[0], Catch::Matchers::WithinAbs(code.mu[0] + code.sigma(0), 1e-12));
    CHECK_THAT(z[1], Catch::Matchers::WithinAbs(code.mu[1] - 2.0 * code.sigma(1), 1e-12));
}

TEST_CASE("encode/decode shapes: 56 -> 4 values -> 56") {
    const VaeModel m = vae_init(56, 16, 8, 23);
    std::vector<double> frame(56, 0.5);
    const LatentCode code = vae_encode(m, frame);
    const auto stored = code.as_vector();
    REQUIRE(stored.size() == 4);
    const double z[2] = {code.mu[0], code.mu[1]};
    const auto rec = vae_decode(m, {z, 2});
    CHECK(rec.size() == 56);
    std::vector<double> bad(55);
    CHECK_THROWS_AS(vae_encode(m, bad), ShapeError);
}

TEST_CASE("KL closed-form values") {
    LatentCode code;  // mu = 0, log_var = 0 -> sigma = 1
    CHECK(kl_divergence(code) == 0.0);

    code.mu[0] = 1.0;
    CHECK_THAT(kl_divergence(code), Catch::Matchers::WithinAbs(0.5, 1e-12));

    // KL >= 0 over a grid of (mu, log_var)
    for (double mu : {-3.0, -0.5, 0.0, 2.0})
        for (double lv : {-4.0, -1.0, 0.0, 1.5}) {
            LatentCode c2;
            c2.mu[0] = mu;
            c2.log_var[1] = lv;
            REQUIRE(kl_divergence(c2) >= 0.0);
        }
}

TEST_CASE("perfect reconstruction with a standard-normal latent has zero loss") {
    std::vector<double> frame = {1.0, 2.0, 3.0};
    LatentCode code;
    CHECK(elbo_loss(frame, frame, code, 1.0) == 0.0);
    std::vector<double> off = {1.0, 2.0, 4.0};
    CHECK_THAT(elbo_loss(frame, off, code, 1.0), Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-12));
}

TEST_CASE("stored codes convert between (mu, sigma) and log-variance") {
    LatentCode code;
    code.mu[0] = 0.3;
    code.mu[1] = -0.7;
    code.log_var[0] = 0.5;
    code.log_var[1] = -1.0;
    const auto v = code.as_vector();
    const LatentCode back = LatentCode::from_vector(v);
    CHECK_THAT(back.log_var[0], Catch::Matchers::WithinAbs(code.log_var[0], 1e-12));
    CHECK_THAT(back.log_var[1], Catch::Matchers::WithinAbs(code.log_var[1], 1e-12));
}

TEST_CASE("analytic gradients match finite differences on small nets") {
    Rng rng(24);
    for (int trial = 0; trial < 10; ++trial) {
        VaeModel m = vae_init(4, 3, 3, 100 + static_cast<std::uint64_t>(trial));
        std::vector<double> frame(4);
        for (auto& v : frame) v = rng.normal();
        const double err = vae_gradient_check(m, frame, 1e-5);
        REQUIRE(err < 1e-4);
    }
}

TEST_CASE("gradient check with fixed nonzero noise covers the sigma path") {
    Rng rng(25);
    VaeModel m = vae_init(5, 4, 3, 77);
    std::vector<double> frame(5);
    for (auto& v : frame) v = rng.normal();
    const double noise[2] = {0.7, -0.3};
    const double err = vae_gradient_check(m, frame, 1e-5, 1.0, {noise, 2});
    CHECK(err < 1e-4);
}

TEST_CASE("bias-path gradient on a zeroed network matches finite differences tightly") {
    VaeModel m = vae_init(3, 2, 2, 31);
    for (auto* layer : {&m.enc1, &m.enc2, &m.enc_head, &m.dec1, &m.dec2, &m.dec_out}) {
        for (auto& w : layer->weights.data()) w = 0.0;
        for (auto& b : layer->bias) b = 0.01;  // keep rectifiers active
    }
    const std::vector<double> frame = {0.0, 0.0, 0.0};
    const double err = vae_gradient_check(m, frame, 1e-6);
    CHECK(err < 1e-6);
}

TEST_CASE("training: learning rate zero leaves weights unchanged") {
    Rng rng(26);
    const Matrix frames = smooth_frames(40, 6, rng);
    VaeModel m = vae_init(6, 5, 4, 41);
    const Matrix before = m.enc1.weights;
    TrainConfig config{.epochs = 3, .batch_size = 8, .learning_rate = 0.0, .kl_weight = 1.0,
                       .seed = 1};
    vae_train(m, frames, config);
    CHECK(m.enc1.weights == before);
}

TEST_CASE("training loss history is bit-identical across runs with one seed") {
    Rng rng(27);
    const Matrix frames = smooth_frames(60, 6, rng);
    TrainConfig config{.epochs = 8, .batch_size = 16, .learning_rate = 0.01, .kl_weight = 1.0,
                       .seed = 5};
    VaeModel a = vae_init(6, 5, 4, 42);
    VaeModel b = vae_init(6, 5, 4, 42);
    const auto ha = vae_train(a, frames, config);
    const auto hb = vae_train(b, frames, config);
    CHECK(ha.loss_history == hb.loss_history);
    CHECK(a.dec_out.weights == b.dec_out.weights);
}

TEST_CASE("training on synthetic frames reduces the smoothed loss") {
    Rng rng(28);
    const Matrix frames = smooth_frames(500, 8, rng);
    VaeModel m = vae_init(8, 12, 6, 43);
    TrainConfig config{.epochs = 200, .batch_size = 32, .learning_rate = 0.01, .kl_weight = 1.0,
                       .seed = 6};
    const auto result = vae_train(m, frames, config);
    REQUIRE(result.loss_history.size() == 200);
    auto window_mean = [&](std::size_t begin) {
        double acc = 0.0;
        for (std::size_t i = begin; i < begin + 10; ++i) acc += result.loss_history[i];
        return acc / 10.0;
    };
    CHECK(window_mean(190) < window_mean(0));
    CHECK(result.loss_history.back() <= result.loss_history.front());
}

TEST_CASE("divergence raises TrainingError with the epoch index") {
    Rng rng(29);
    const Matrix frames = smooth_frames(64, 4, rng);
    VaeModel m = vae_init(4, 4, 3, 44);
    TrainConfig config{.epochs = 50, .batch_size = 8, .learning_rate = 1e6, .kl_weight = 1.0,
                       .seed = 7};
    try {
        vae_train(m, frames, config);
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        CHECK(e.epoch() < 50);
    }
}

TEST_CASE("encode_all then decode_codes is a pure deterministic map") {
    Rng rng(30);
    const Matrix frames = smooth_frames(20, 6, rng);
    const VaeModel m = vae_init(6, 5, 4, 45);
    const Matrix codes1 = vae_encode_all(m, frames);
    const Matrix codes2 = vae_encode_all(m, frames);
    CHECK(codes1 == codes2);
    const Matrix rec1 = vae_decode_codes(m, codes1);
    const Matrix rec2 = vae_decode_codes(m, codes2);
    CHECK(rec1 == rec2);
    CHECK(rec1.cols() == 6);
}
