#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "csi/rng.hpp"
#include "csi/scheme.hpp"

using namespace csi;

namespace {

Matrix correlated_frames(std::size_t n, std::size_t d, Rng& rng) {
    // low-rank structure plus noise, loosely CSI-like
    Matrix m(n, d);
    std::vector<double> phase(d);
    for (auto& p : phase) p = rng.uniform(0.0, 6.28);
    for (std::size_t r = 0; r < n; ++r) {
        const double t = static_cast<double>(r) / 50.0;
        for (std::size_t c = 0; c < d; ++c)
            m(r, c) = std::sin(t + phase[c]) + 0.1 * rng.normal();
    }
    return m;
}

}  // namespace

TEST_CASE("uncompressed rate is 32 bits per retained subcarrier") {
    CHECK(uncompressed_rate(56) == 1792);
    CHECK(uncompressed_rate(2048) == 65536);
    CHECK(uncompressed_rate(1) == 32);
}

TEST_CASE("per-frame rates of every variant") {
    CHECK(scheme_bits_per_frame({SchemeVariant::kSqOnly, std::nullopt, 8}, 56) == 448);
    CHECK(scheme_bits_per_frame({SchemeVariant::kPcaSq, 2, 3}, 56) == 6);
    CHECK(scheme_bits_per_frame({SchemeVariant::kVqOnly, std::nullopt, 1}, 56) == 1);
    CHECK(scheme_bits_per_frame({SchemeVariant::kPcaVq, 4, 4}, 2048) == 4);
    CHECK(scheme_bits_per_frame({SchemeVariant::kVaeSq, std::nullopt, 8}, 56) == 32);
    CHECK(scheme_bits_per_frame({SchemeVariant::kVaeVq, std::nullopt, 3}, 56) == 3);
}

TEST_CASE("compression ratios quoted in bits-per-frame arithmetic are exact") {
    const RateReport vq1 = make_rate_report({SchemeVariant::kVqOnly, std::nullopt, 1}, 56);
    CHECK(vq1.uncompressed_bits_per_frame == 1792.0);
    CHECK(vq1.compression_ratio == 1792.0);

    const RateReport pca_vq = make_rate_report({SchemeVariant::kPcaVq, 4, 4}, 2048);
    CHECK(pca_vq.uncompressed_bits_per_frame == 65536.0);
    CHECK(pca_vq.compression_ratio == 16384.0);

    const RateReport pca_sq = make_rate_report({SchemeVariant::kPcaSq, 2, 3}, 56);
    CHECK(pca_sq.bits_per_frame == 6.0);
    CHECK_THAT(pca_sq.compression_ratio, Catch::Matchers::WithinRel(1792.0 / 6.0, 1e-15));
}

TEST_CASE("scheme config invariants") {
    CHECK_THROWS_AS((SchemeConfig{SchemeVariant::kSqOnly, 2, 3}).validate(), ConfigError);
    CHECK_THROWS_AS((SchemeConfig{SchemeVariant::kPcaSq, std::nullopt, 3}).validate(), ConfigError);
    CHECK_THROWS_AS((SchemeConfig{SchemeVariant::kSqOnly, std::nullopt, 0}).validate(), ConfigError);
    CHECK_THROWS_AS((SchemeConfig{SchemeVariant::kSqOnly, std::nullopt, 9}).validate(), ConfigError);
    CHECK_NOTHROW((SchemeConfig{SchemeVariant::kPcaVq, 2, 8}).validate());
    CHECK(parse_variant("pca_sq") == SchemeVariant::kPcaSq);
    CHECK_THROWS_AS(parse_variant("nope"), ConfigError);
}

TEST_CASE("sq-only at 8 bits is near-lossless") {
    Rng rng(91);
    const Matrix train = correlated_frames(400, 8, rng);
    const Matrix eval = correlated_frames(100, 8, rng);
    const auto result =
        scheme_compress({SchemeVariant::kSqOnly, std::nullopt, 8}, train, eval, 5);
    REQUIRE(result.decoded.rows() == eval.rows());
    double worst = 0.0;
    for (std::size_t r = 0; r < eval.rows(); ++r)
        for (std::size_t c = 0; c < eval.cols(); ++c)
            worst = std::max(worst, std::abs(result.decoded(r, c) - eval(r, c)));
    CHECK(worst < 0.05);  // 256 levels over a ~2.5 range
    CHECK(result.indices.size() == eval.rows() * 8);
}

TEST_CASE("pca_sq with full rank and max bits approaches identity") {
    Rng rng(92);
    const Matrix train = correlated_frames(300, 6, rng);
    const auto result = scheme_compress({SchemeVariant::kPcaSq, 6, 8}, train, train, 5);
    double mse = 0.0;
    for (std::size_t r = 0; r < train.rows(); ++r)
        mse += squared_distance(result.decoded.row(r), train.row(r));
    mse /= static_cast<double>(train.rows() * train.cols());
    // bounded by the quantization error of 8-bit cells
    CHECK(mse < 1e-3);
}

TEST_CASE("vq variants decode to codebook rows in the original space") {
    Rng rng(93);
    const Matrix train = correlated_frames(500, 6, rng);
    const Matrix eval = correlated_frames(80, 6, rng);
    SchemeModels models;
    const auto result = scheme_compress({SchemeVariant::kPcaVq, 2, 3}, train, eval, 9, {}, &models);
    REQUIRE(result.indices.size() == eval.rows());
    REQUIRE(result.decoded.cols() == 6);
    // decoded frames live on at most 2^3 distinct reconstructions
    std::set<std::vector<double>> unique;
    for (std::size_t r = 0; r < result.decoded.rows(); ++r) {
        auto row = result.decoded.row(r);
        unique.insert(std::vector<double>(row.begin(), row.end()));
    }
    CHECK(unique.size() <= 8);
    CHECK(models.pca.has_value());
    CHECK(models.vq.has_value());
}

TEST_CASE("shared PCA model avoids refitting and matches a direct fit") {
    Rng rng(94);
    const Matrix train = correlated_frames(300, 8, rng);
    const PcaModel shared = pca_fit(train, 8);
    const SchemeConfig config{SchemeVariant::kPcaSq, 3, 4};
    const SchemeModels with_shared = fit_scheme(config, train, 7, {}, &shared);
    const SchemeModels direct = fit_scheme(config, train, 7, {});
    REQUIRE(with_shared.pca->component_count() == 3);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 8; ++c)
            REQUIRE_THAT(with_shared.pca->components(r, c),
                         Catch::Matchers::WithinAbs(direct.pca->components(r, c), 1e-12));
}

TEST_CASE("latent quantization rates") {
    Rng rng(95);
    Matrix codes(300, 4);
    for (auto& v : codes.data()) v = rng.normal();
    const auto sq = latent_quantize(codes, codes, LatentQuantizeMode::kScalar, 8, 3);
    CHECK(sq.rate.bits_per_frame == 32.0);
    CHECK(sq.rate.uncompressed_bits_per_frame == 256.0);
    CHECK(sq.rate.compression_ratio == 8.0);

    const auto vq = latent_quantize(codes, codes, LatentQuantizeMode::kVector, 3, 3);
    CHECK(vq.rate.bits_per_frame == 3.0);
    CHECK(vq.indices.size() == 300);
    Matrix bad(10, 3);
    CHECK_THROWS_AS(latent_quantize(bad, bad, LatentQuantizeMode::kScalar, 2, 1), ShapeError);
}
