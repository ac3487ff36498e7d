#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "csi/error.hpp"
#include "csi/kmeans.hpp"
#include "csi/linalg.hpp"
#include "csi/lloyd_max.hpp"
#include "csi/pca.hpp"
#include "csi/rng.hpp"
#include "csi/vae.hpp"

namespace csi {

enum class SchemeVariant : std::uint8_t {
    kUncompressed = 0,
    kSqOnly = 1,
    kVqOnly = 2,
    kPcaSq = 3,
    kPcaVq = 4,
    kVaeSq = 5,
    kVaeVq = 6,
};

inline const char* variant_name(SchemeVariant v) {
    switch (v) {
        case SchemeVariant::kUncompressed: return "uncompressed";
        case SchemeVariant::kSqOnly: return "sq";
        case SchemeVariant::kVqOnly: return "vq";
        case SchemeVariant::kPcaSq: return "pca_sq";
        case SchemeVariant::kPcaVq: return "pca_vq";
        case SchemeVariant::kVaeSq: return "vae_sq";
        case SchemeVariant::kVaeVq: return "vae_vq";
    }
    throw ConfigError("unknown scheme variant");
}

inline SchemeVariant parse_variant(const std::string& name) {
    for (auto v : {SchemeVariant::kUncompressed, SchemeVariant::kSqOnly, SchemeVariant::kVqOnly,
                   SchemeVariant::kPcaSq, SchemeVariant::kPcaVq, SchemeVariant::kVaeSq,
                   SchemeVariant::kVaeVq})
        if (name == variant_name(v)) return v;
    throw ConfigError("unknown scheme variant: '" + name + "'");
}

inline bool is_pca_variant(SchemeVariant v) {
    return v == SchemeVariant::kPcaSq || v == SchemeVariant::kPcaVq;
}

inline bool is_vae_variant(SchemeVariant v) {
    return v == SchemeVariant::kVaeSq || v == SchemeVariant::kVaeVq;
}

struct SchemeConfig {
    SchemeVariant variant = SchemeVariant::kUncompressed;
    std::optional<std::size_t> n_pca;
    int bits = 0;  // per value for SQ variants, per frame for VQ variants

    void validate() const {
        if (n_pca.has_value() != is_pca_variant(variant))
            throw ConfigError("n_pca must be present exactly for the PCA variants");
        if (n_pca.has_value() && *n_pca == 0) throw ConfigError("n_pca must be positive");
        if (variant != SchemeVariant::kUncompressed && (bits < 1 || bits > 8))
            throw ConfigError("bits must be within [1, 8]");
    }

    std::string describe() const {
        std::string s = variant_name(variant);
        if (n_pca) s += "(n=" + std::to_string(*n_pca) + ")";
        if (variant != SchemeVariant::kUncompressed) s += " " + std::to_string(bits) + " bits";
        return s;
    }
};

struct RateReport {
    double bits_per_frame = 0.0;
    double uncompressed_bits_per_frame = 0.0;
    double compression_ratio = 1.0;
};

// Frames are stored as 32-bit floats, so the raw cost is 32 bits per
// retained subcarrier.
inline std::uint64_t uncompressed_rate(std::size_t retained_dims) {
    return static_cast<std::uint64_t>(retained_dims) * 32u;
}

// Per-frame rate of a scheme over frames of `data_dims` retained
// subcarriers. Codebook and model storage are not counted: the rate is
// the steady-state cost of one stored frame.
inline std::uint64_t scheme_bits_per_frame(const SchemeConfig& config, std::size_t data_dims) {
    config.validate();
    switch (config.variant) {
        case SchemeVariant::kUncompressed: return uncompressed_rate(data_dims);
        case SchemeVariant::kSqOnly: return data_dims * static_cast<std::uint64_t>(config.bits);
        case SchemeVariant::kPcaSq: return *config.n_pca * static_cast<std::uint64_t>(config.bits);
        case SchemeVariant::kVqOnly:
        case SchemeVariant::kPcaVq:
        case SchemeVariant::kVaeVq: return static_cast<std::uint64_t>(config.bits);
        case SchemeVariant::kVaeSq: return 4u * static_cast<std::uint64_t>(config.bits);
    }
    throw ConfigError("unknown scheme variant");
}

inline RateReport make_rate_report(const SchemeConfig& config, std::size_t data_dims) {
    RateReport r;
    r.bits_per_frame = static_cast<double>(scheme_bits_per_frame(config, data_dims));
    r.uncompressed_bits_per_frame = static_cast<double>(uncompressed_rate(data_dims));
    r.compression_ratio = r.uncompressed_bits_per_frame / r.bits_per_frame;
    return r;
}

// Number of quantizer indices per frame in the compressed stream.
inline std::size_t scheme_fields_per_frame(const SchemeConfig& config, std::size_t data_dims) {
    switch (config.variant) {
        case SchemeVariant::kUncompressed: return 0;
        case SchemeVariant::kSqOnly: return data_dims;
        case SchemeVariant::kPcaSq: return *config.n_pca;
        case SchemeVariant::kVaeSq: return 4;
        case SchemeVariant::kVqOnly:
        case SchemeVariant::kPcaVq:
        case SchemeVariant::kVaeVq: return 1;
    }
    throw ConfigError("unknown scheme variant");
}

// Every model a scheme may need. Quantizers operate in the data space for
// SQ/VQ, in PCA coefficient space for PCA variants, and on the 4-value
// (mu, sigma) codes for VAE variants.
struct SchemeModels {
    std::optional<PcaModel> pca;
    std::vector<ScalarQuantizer> sq_bank;
    std::optional<VectorQuantizer> vq;
    std::optional<VaeModel> vae;
};

struct SchemeFitOptions {
    std::size_t kmeans_max_train = 8192;  // deterministic subsample caps (0 = all)
    std::size_t vae_max_train = 4000;
    std::size_t vae_hidden1 = 64;
    std::size_t vae_hidden2 = 32;
    TrainConfig vae_train{.epochs = 120, .batch_size = 32, .learning_rate = 0.003,
                          .kl_weight = 1.0, .seed = 0};
};

// Fits the models a scheme needs on (normalized) training frames.
// Precomputed PCA / VAE models can be supplied to avoid refitting when
// many schemes share them.
inline SchemeModels fit_scheme(const SchemeConfig& config, const Matrix& train,
                               std::uint64_t seed, const SchemeFitOptions& options = {},
                               const PcaModel* shared_pca = nullptr,
                               const VaeModel* shared_vae = nullptr,
                               const Matrix* shared_train_codes = nullptr) {
    config.validate();
    if (train.rows() == 0 && config.variant != SchemeVariant::kUncompressed)
        throw EmptyResultError("cannot fit a scheme on empty training data");

    SchemeModels models;
    Matrix quantizer_train;
    switch (config.variant) {
        case SchemeVariant::kUncompressed:
            return models;
        case SchemeVariant::kSqOnly:
        case SchemeVariant::kVqOnly:
            quantizer_train = train;
            break;
        case SchemeVariant::kPcaSq:
        case SchemeVariant::kPcaVq: {
            if (shared_pca && shared_pca->component_count() >= *config.n_pca)
                models.pca = pca_truncate(*shared_pca, *config.n_pca);
            else
                models.pca = pca_fit(train, *config.n_pca);
            quantizer_train = pca_project_all(*models.pca, train);
            break;
        }
        case SchemeVariant::kVaeSq:
        case SchemeVariant::kVaeVq: {
            if (shared_vae) {
                models.vae = *shared_vae;
                if (shared_train_codes)
                    quantizer_train = *shared_train_codes;
                else
                    quantizer_train = vae_encode_all(*models.vae, train);
            } else {
                VaeModel vae = vae_init(train.cols(), options.vae_hidden1, options.vae_hidden2,
                                        derive_seed(seed, 0x7a3));
                TrainConfig tc = options.vae_train;
                tc.seed = derive_seed(seed, 0x7a4);
                vae_train(vae, subsample_rows(train, options.vae_max_train), tc);
                quantizer_train = vae_encode_all(vae, train);
                models.vae = std::move(vae);
            }
            break;
        }
    }

    const bool scalar = config.variant == SchemeVariant::kSqOnly ||
                        config.variant == SchemeVariant::kPcaSq ||
                        config.variant == SchemeVariant::kVaeSq;
    if (scalar) {
        models.sq_bank = sq_fit(quantizer_train, config.bits);
    } else {
        const Matrix capped = subsample_rows(quantizer_train, options.kmeans_max_train);
        models.vq = vq_fit(capped, config.bits, derive_seed(seed, 0x6b1));
    }
    return models;
}

// Encoded stream plus everything downstream consumers need: decoded
// frames in the original data space, quantized latent codes for VAE
// schemes, and the exact rate accounting.
struct CompressedFrames {
    SchemeConfig config;
    std::size_t fields_per_frame = 0;
    std::vector<std::uint32_t> indices;  // frame-major
    Matrix decoded;                      // frames x data_dims
    Matrix latent_codes;                 // frames x 4, VAE schemes only
    RateReport rate;
};

inline CompressedFrames apply_scheme(const SchemeConfig& config, const SchemeModels& models,
                                     const Matrix& frames) {
    config.validate();
    CompressedFrames out;
    out.config = config;
    out.rate = make_rate_report(config, frames.cols());
    out.fields_per_frame = scheme_fields_per_frame(config, frames.cols());

    const std::size_t n = frames.rows();
    switch (config.variant) {
        case SchemeVariant::kUncompressed:
            out.decoded = frames;
            return out;
        case SchemeVariant::kSqOnly: {
            out.decoded = Matrix(n, frames.cols());
            out.indices.reserve(n * out.fields_per_frame);
            for (std::size_t i = 0; i < n; ++i) {
                const auto idx = sq_encode(models.sq_bank, frames.row(i));
                out.indices.insert(out.indices.end(), idx.begin(), idx.end());
                const auto rec = sq_decode(models.sq_bank, idx);
                std::copy(rec.begin(), rec.end(), out.decoded.row(i).begin());
            }
            return out;
        }
        case SchemeVariant::kVqOnly: {
            out.indices = vq_encode_all(*models.vq, frames);
            out.decoded = vq_decode_all(*models.vq, out.indices);
            return out;
        }
        case SchemeVariant::kPcaSq: {
            const Matrix coeffs = pca_project_all(*models.pca, frames);
            Matrix decoded_coeffs(n, coeffs.cols());
            out.indices.reserve(n * out.fields_per_frame);
            for (std::size_t i = 0; i < n; ++i) {
                const auto idx = sq_encode(models.sq_bank, coeffs.row(i));
                out.indices.insert(out.indices.end(), idx.begin(), idx.end());
                const auto rec = sq_decode(models.sq_bank, idx);
                std::copy(rec.begin(), rec.end(), decoded_coeffs.row(i).begin());
            }
            out.decoded = pca_reconstruct_all(*models.pca, decoded_coeffs);
            return out;
        }
        case SchemeVariant::kPcaVq: {
            const Matrix coeffs = pca_project_all(*models.pca, frames);
            out.indices = vq_encode_all(*models.vq, coeffs);
            const Matrix decoded_coeffs = vq_decode_all(*models.vq, out.indices);
            out.decoded = pca_reconstruct_all(*models.pca, decoded_coeffs);
            return out;
        }
        case SchemeVariant::kVaeSq: {
            const Matrix codes = vae_encode_all(*models.vae, frames);
            out.latent_codes = Matrix(n, codes.cols());
            out.indices.reserve(n * out.fields_per_frame);
            for (std::size_t i = 0; i < n; ++i) {
                const auto idx = sq_encode(models.sq_bank, codes.row(i));
                out.indices.insert(out.indices.end(), idx.begin(), idx.end());
                const auto rec = sq_decode(models.sq_bank, idx);
                std::copy(rec.begin(), rec.end(), out.latent_codes.row(i).begin());
            }
            out.decoded = vae_decode_codes(*models.vae, out.latent_codes);
            return out;
        }
        case SchemeVariant::kVaeVq: {
            const Matrix codes = vae_encode_all(*models.vae, frames);
            out.indices = vq_encode_all(*models.vq, codes);
            out.latent_codes = vq_decode_all(*models.vq, out.indices);
            out.decoded = vae_decode_codes(*models.vae, out.latent_codes);
            return out;
        }
    }
    throw ConfigError("unknown scheme variant");
}

// Fit on train, encode/decode eval. The spec-level one-call entry point.
inline CompressedFrames scheme_compress(const SchemeConfig& config, const Matrix& train,
                                        const Matrix& eval_frames, std::uint64_t seed,
                                        const SchemeFitOptions& options = {},
                                        SchemeModels* models_out = nullptr) {
    SchemeModels models = fit_scheme(config, train, seed, options);
    auto result = apply_scheme(config, models, eval_frames);
    if (models_out) *models_out = std::move(models);
    return result;
}

// Quantizes stored latent codes with the classic machinery; rates follow
// the 4-value code (at most 4 x 64 = 256 bits uncompressed).
struct LatentQuantizeResult {
    std::vector<std::uint32_t> indices;
    Matrix quantized;  // n x 4
    RateReport rate;
};

enum class LatentQuantizeMode { kScalar, kVector };

inline LatentQuantizeResult latent_quantize(const Matrix& train_codes, const Matrix& codes,
                                            LatentQuantizeMode mode, int bits,
                                            std::uint64_t seed) {
    if (train_codes.cols() != 4 || codes.cols() != 4)
        throw ShapeError("latent codes must have 4 values per frame");
    LatentQuantizeResult out;
    out.rate.uncompressed_bits_per_frame = 4.0 * 64.0;
    if (mode == LatentQuantizeMode::kScalar) {
        const auto bank = sq_fit(train_codes, bits);
        out.quantized = Matrix(codes.rows(), 4);
        for (std::size_t i = 0; i < codes.rows(); ++i) {
            const auto idx = sq_encode(bank, codes.row(i));
            out.indices.insert(out.indices.end(), idx.begin(), idx.end());
            const auto rec = sq_decode(bank, idx);
            std::copy(rec.begin(), rec.end(), out.quantized.row(i).begin());
        }
        out.rate.bits_per_frame = 4.0 * bits;
    } else {
        const auto vq = vq_fit(train_codes, bits, seed);
        out.indices = vq_encode_all(vq, codes);
        out.quantized = vq_decode_all(vq, out.indices);
        out.rate.bits_per_frame = bits;
    }
    out.rate.compression_ratio = out.rate.uncompressed_bits_per_frame / out.rate.bits_per_frame;
    return out;
}

}  // namespace csi
