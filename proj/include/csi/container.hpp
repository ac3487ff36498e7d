#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "csi/error.hpp"
#include "csi/io.hpp"
#include "csi/model_io.hpp"
#include "csi/preprocess.hpp"
#include "csi/scheme.hpp"
#include "csi/types.hpp"

namespace csi {

// Packs indices MSB-first within each frame's field; the final partial
// byte is zero-padded.
inline void pack_indices_msb(std::span<const std::uint32_t> indices, int bits, ByteWriter& w) {
    std::uint64_t acc = 0;
    int pending = 0;
    for (std::uint32_t idx : indices) {
        if (idx >= (std::uint32_t{1} << bits)) throw RangeError("index does not fit in field width");
        acc = (acc << bits) | idx;
        pending += bits;
        while (pending >= 8) {
            pending -= 8;
            w.u8(static_cast<std::uint8_t>(acc >> pending));
        }
    }
    if (pending > 0) w.u8(static_cast<std::uint8_t>(acc << (8 - pending)));
}

inline std::vector<std::uint32_t> unpack_indices_msb(ByteReader& r, std::size_t count, int bits) {
    std::vector<std::uint32_t> out;
    out.reserve(count);
    std::uint64_t acc = 0;
    int pending = 0;
    const std::uint32_t mask = (std::uint32_t{1} << bits) - 1;
    while (out.size() < count) {
        while (pending < bits) {
            acc = (acc << 8) | r.u8();
            pending += 8;
        }
        pending -= bits;
        out.push_back(static_cast<std::uint32_t>(acc >> pending) & mask);
    }
    return out;
}

// Self-contained compressed capture: the scheme, every model needed to
// decode (normalizer included), per-frame timestamps and labels, and the
// bit-packed index stream. An archived container decodes without sidecar
// files.
struct CsizContainer {
    SchemeConfig config;
    std::optional<Normalizer> normalizer;
    SchemeModels models;
    std::size_t data_dims = 0;
    double frame_rate = 0.0;
    int channel_width_mhz = 0;
    std::vector<double> timestamps;
    std::vector<int> labels;
    std::size_t fields_per_frame = 0;
    std::vector<std::uint32_t> indices;  // frame-major

    std::size_t frame_count() const { return timestamps.size(); }

    RateReport rate() const { return make_rate_report(config, data_dims); }
};

inline std::vector<unsigned char> serialize_csiz(const CsizContainer& c) {
    ByteWriter w;
    w.magic("CSIZ");
    w.u16(kFormatVersion);
    w.u8(static_cast<std::uint8_t>(c.config.variant));
    w.u32(static_cast<std::uint32_t>(c.config.n_pca.value_or(0)));
    w.u8(static_cast<std::uint8_t>(c.config.bits));
    std::uint16_t flags = 0;
    if (c.normalizer) flags |= 1;
    w.u16(flags);
    w.u32(static_cast<std::uint32_t>(c.data_dims));
    w.u32(static_cast<std::uint32_t>(c.channel_width_mhz));
    w.f64(c.frame_rate);

    if (c.normalizer) write_model_payload(w, *c.normalizer);
    if (c.models.pca) write_model_payload(w, *c.models.pca);
    if (c.models.vae) write_model_payload(w, *c.models.vae);
    const bool scalar = !c.models.sq_bank.empty();
    if (c.config.variant != SchemeVariant::kUncompressed) {
        w.u8(scalar ? 1 : 0);
        if (scalar)
            write_model_payload(w, c.models.sq_bank);
        else
            write_model_payload(w, *c.models.vq);
    }

    w.u64(c.frame_count());
    for (std::size_t i = 0; i < c.frame_count(); ++i) {
        w.f64(c.timestamps[i]);
        w.u16(static_cast<std::uint16_t>(c.labels[i]));
    }
    if (c.config.variant != SchemeVariant::kUncompressed)
        pack_indices_msb(c.indices, c.config.bits, w);
    return w.take();
}

inline CsizContainer parse_csiz(std::span<const unsigned char> bytes) {
    ByteReader r(bytes);
    r.expect_magic("CSIZ", "compressed container");
    const auto version = r.u16();
    if (version != kFormatVersion)
        throw FormatError("unsupported CSIZ version " + std::to_string(version));

    CsizContainer c;
    c.config.variant = static_cast<SchemeVariant>(r.u8());
    const std::uint32_t n_pca = r.u32();
    if (n_pca > 0) c.config.n_pca = n_pca;
    c.config.bits = r.u8();
    c.config.validate();
    const auto flags = r.u16();
    c.data_dims = r.u32();
    c.channel_width_mhz = static_cast<int>(r.u32());
    c.frame_rate = r.f64();

    if (flags & 1) c.normalizer = read_normalizer_payload(r);
    if (is_pca_variant(c.config.variant)) c.models.pca = read_pca_payload(r);
    if (is_vae_variant(c.config.variant)) c.models.vae = read_vae_payload(r);
    if (c.config.variant != SchemeVariant::kUncompressed) {
        const bool scalar = r.u8() != 0;
        if (scalar)
            c.models.sq_bank = read_sq_payload(r);
        else
            c.models.vq = read_vq_payload(r);
    }

    const std::size_t n = r.u64();
    c.timestamps.resize(n);
    c.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        c.timestamps[i] = r.f64();
        c.labels[i] = r.u16();
    }
    c.fields_per_frame = scheme_fields_per_frame(c.config, c.data_dims);
    if (c.config.variant != SchemeVariant::kUncompressed)
        c.indices = unpack_indices_msb(r, n * c.fields_per_frame, c.config.bits);
    return c;
}

// Compresses an amplitude dataset. Models are fit on the input itself
// unless reuse_models is given (the forensic re-encode path); the
// normalizer always travels with the container so decoding recovers
// amplitudes.
inline CsizContainer compress_dataset(const CsiDataset& ds, const SchemeConfig& config,
                                      std::uint64_t seed, const SchemeFitOptions& options = {},
                                      const CsizContainer* reuse_models = nullptr) {
    config.validate();
    if (ds.amplitudes.empty()) throw ShapeError("compression requires an amplitude dataset");

    CsizContainer c;
    c.config = config;
    c.data_dims = ds.meta.subcarrier_count;
    c.frame_rate = ds.meta.frame_rate;
    c.channel_width_mhz = ds.meta.channel_width_mhz;
    c.timestamps = ds.timestamps;
    c.labels = ds.labels;

    if (reuse_models) {
        if (reuse_models->config.variant != config.variant ||
            reuse_models->config.bits != config.bits ||
            reuse_models->config.n_pca != config.n_pca)
            throw ConfigError("reused models belong to a different scheme");
        if (reuse_models->data_dims != c.data_dims)
            throw ShapeError("reused models have a different data dimension");
        c.normalizer = reuse_models->normalizer;
        c.models = reuse_models->models;
    } else {
        c.normalizer = fit_normalizer(ds.amplitudes);
    }

    const Matrix normalized = c.normalizer->apply(ds.amplitudes);
    if (!reuse_models) c.models = fit_scheme(config, normalized, seed, options);
    auto compressed = apply_scheme(config, c.models, normalized);
    c.fields_per_frame = compressed.fields_per_frame;
    c.indices = std::move(compressed.indices);
    return c;
}

// Decodes the container back to an amplitude dataset in the original data
// space. Reconstructed amplitudes are clamped at zero (lossy decoding can
// dip below the physical range).
inline CsiDataset decompress_container(const CsizContainer& c) {
    const std::size_t n = c.frame_count();
    Matrix decoded;
    if (c.config.variant == SchemeVariant::kUncompressed)
        throw ConfigError("container holds no index stream to decode");

    switch (c.config.variant) {
        case SchemeVariant::kSqOnly: {
            decoded = Matrix(n, c.data_dims);
            for (std::size_t i = 0; i < n; ++i) {
                std::span<const std::uint32_t> idx(c.indices.data() + i * c.fields_per_frame,
                                                   c.fields_per_frame);
                const auto rec = sq_decode(c.models.sq_bank, idx);
                std::copy(rec.begin(), rec.end(), decoded.row(i).begin());
            }
            break;
        }
        case SchemeVariant::kVqOnly:
            decoded = vq_decode_all(*c.models.vq, c.indices);
            break;
        case SchemeVariant::kPcaSq: {
            Matrix coeffs(n, c.fields_per_frame);
            for (std::size_t i = 0; i < n; ++i) {
                std::span<const std::uint32_t> idx(c.indices.data() + i * c.fields_per_frame,
                                                   c.fields_per_frame);
                const auto rec = sq_decode(c.models.sq_bank, idx);
                std::copy(rec.begin(), rec.end(), coeffs.row(i).begin());
            }
            decoded = pca_reconstruct_all(*c.models.pca, coeffs);
            break;
        }
        case SchemeVariant::kPcaVq: {
            const Matrix coeffs = vq_decode_all(*c.models.vq, c.indices);
            decoded = pca_reconstruct_all(*c.models.pca, coeffs);
            break;
        }
        case SchemeVariant::kVaeSq: {
            Matrix codes(n, 4);
            for (std::size_t i = 0; i < n; ++i) {
                std::span<const std::uint32_t> idx(c.indices.data() + i * c.fields_per_frame,
                                                   c.fields_per_frame);
                const auto rec = sq_decode(c.models.sq_bank, idx);
                std::copy(rec.begin(), rec.end(), codes.row(i).begin());
            }
            decoded = vae_decode_codes(*c.models.vae, codes);
            break;
        }
        case SchemeVariant::kVaeVq: {
            const Matrix codes = vq_decode_all(*c.models.vq, c.indices);
            decoded = vae_decode_codes(*c.models.vae, codes);
            break;
        }
        case SchemeVariant::kUncompressed:
            break;
    }

    CsiDataset out;
    out.meta.subcarrier_count = c.data_dims;
    out.meta.frame_rate = c.frame_rate;
    out.meta.channel_width_mhz = c.channel_width_mhz;
    out.meta.guard_mask.assign(c.data_dims, false);
    out.timestamps = c.timestamps;
    out.labels = c.labels;
    out.amplitudes = c.normalizer ? c.normalizer->invert(decoded) : decoded;
    for (auto& v : out.amplitudes.data()) v = std::max(v, 0.0);
    const std::size_t k = out.class_count();
    for (std::size_t cls = 0; cls < k; ++cls)
        out.meta.class_names.push_back("class_" + std::to_string(cls));
    return out;
}

inline CsizContainer load_csiz(const std::filesystem::path& path) {
    return parse_csiz(read_file_bytes(path));
}

inline void save_csiz(const CsizContainer& c, const std::filesystem::path& path) {
    const auto bytes = serialize_csiz(c);
    write_file_bytes(path, bytes);
}

}  // namespace csi
