#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "csi/error.hpp"
#include "csi/io.hpp"
#include "csi/lloyd_max.hpp"
#include "csi/kmeans.hpp"
#include "csi/mlp.hpp"
#include "csi/pca.hpp"
#include "csi/preprocess.hpp"
#include "csi/sensing.hpp"
#include "csi/vae.hpp"

namespace csi {

// "CSIM" model container: magic, version u16, model-kind u8, dimensions,
// then the raw f64 payload, all little-endian.
enum class ModelKind : std::uint8_t {
    kPca = 1,
    kScalarQuantizerBank = 2,
    kVectorQuantizer = 3,
    kVae = 4,
    kThreshold = 5,
    kMlp = 6,
    kNormalizer = 7,
};

namespace model_detail {

inline void write_vector(ByteWriter& w, std::span<const double> v) {
    w.u32(static_cast<std::uint32_t>(v.size()));
    for (double x : v) w.f64(x);
}

inline std::vector<double> read_vector(ByteReader& r) {
    const std::size_t n = r.u32();
    std::vector<double> v(n);
    for (auto& x : v) x = r.f64();
    return v;
}

inline void write_matrix(ByteWriter& w, const Matrix& m) {
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
    for (double x : m.data()) w.f64(x);
}

inline Matrix read_matrix(ByteReader& r) {
    const std::size_t rows = r.u32();
    const std::size_t cols = r.u32();
    Matrix m(rows, cols);
    for (auto& x : m.data()) x = r.f64();
    return m;
}

inline void write_layer(ByteWriter& w, const DenseLayer& layer) {
    write_matrix(w, layer.weights);
    write_vector(w, layer.bias);
}

inline DenseLayer read_layer(ByteReader& r) {
    DenseLayer layer;
    layer.weights = read_matrix(r);
    layer.bias = read_vector(r);
    if (layer.bias.size() != layer.weights.rows())
        throw FormatError("layer bias does not match weight rows");
    layer.zero_gradients();
    return layer;
}

}  // namespace model_detail

// --- per-model payloads ----------------------------------------------------

inline void write_model_payload(ByteWriter& w, const PcaModel& m) {
    model_detail::write_vector(w, m.mean);
    model_detail::write_matrix(w, m.components);
    model_detail::write_vector(w, m.explained_variance);
}

inline PcaModel read_pca_payload(ByteReader& r) {
    PcaModel m;
    m.mean = model_detail::read_vector(r);
    m.components = model_detail::read_matrix(r);
    m.explained_variance = model_detail::read_vector(r);
    if (m.components.cols() != m.mean.size() ||
        m.explained_variance.size() != m.components.rows())
        throw FormatError("inconsistent PCA model dimensions");
    return m;
}

inline void write_model_payload(ByteWriter& w, const std::vector<ScalarQuantizer>& bank) {
    w.u32(static_cast<std::uint32_t>(bank.size()));
    for (const auto& q : bank) {
        w.u8(static_cast<std::uint8_t>(q.bits));
        w.u8(q.degenerate ? 1 : 0);
        w.f64(q.training_mse);
        model_detail::write_vector(w, q.levels);
    }
}

inline std::vector<ScalarQuantizer> read_sq_payload(ByteReader& r) {
    const std::size_t dims = r.u32();
    std::vector<ScalarQuantizer> bank(dims);
    for (auto& q : bank) {
        q.bits = r.u8();
        q.degenerate = r.u8() != 0;
        q.training_mse = r.f64();
        q.levels = model_detail::read_vector(r);
        if (q.levels.size() != (std::size_t{1} << q.bits))
            throw FormatError("quantizer level count does not match bits");
        q.thresholds.resize(q.levels.size() - 1);
        for (std::size_t j = 0; j + 1 < q.levels.size(); ++j)
            q.thresholds[j] = 0.5 * (q.levels[j] + q.levels[j + 1]);
    }
    return bank;
}

inline void write_model_payload(ByteWriter& w, const VectorQuantizer& q) {
    w.u8(static_cast<std::uint8_t>(q.bits));
    model_detail::write_matrix(w, q.codebook);
}

inline VectorQuantizer read_vq_payload(ByteReader& r) {
    VectorQuantizer q;
    q.bits = r.u8();
    q.codebook = model_detail::read_matrix(r);
    if (q.codebook.rows() != (std::size_t{1} << q.bits))
        throw FormatError("codebook size does not match bits");
    return q;
}

inline void write_model_payload(ByteWriter& w, const VaeModel& m) {
    w.u32(static_cast<std::uint32_t>(m.input_dims));
    w.u32(static_cast<std::uint32_t>(m.hidden1));
    w.u32(static_cast<std::uint32_t>(m.hidden2));
    for (const auto* layer : {&m.enc1, &m.enc2, &m.enc_head, &m.dec1, &m.dec2, &m.dec_out})
        model_detail::write_layer(w, *layer);
}

inline VaeModel read_vae_payload(ByteReader& r) {
    VaeModel m;
    m.input_dims = r.u32();
    m.hidden1 = r.u32();
    m.hidden2 = r.u32();
    for (auto* layer : {&m.enc1, &m.enc2, &m.enc_head, &m.dec1, &m.dec2, &m.dec_out})
        *layer = model_detail::read_layer(r);
    if (m.enc1.in_dims() != m.input_dims || m.dec_out.out_dims() != m.input_dims)
        throw FormatError("inconsistent VAE dimensions");
    return m;
}

inline void write_model_payload(ByteWriter& w, const ThresholdClassifier& c) {
    w.u8(c.degenerate ? 1 : 0);
    w.f64(c.threshold);
    w.f64(c.training_f1);
}

inline ThresholdClassifier read_threshold_payload(ByteReader& r) {
    ThresholdClassifier c;
    c.degenerate = r.u8() != 0;
    c.threshold = r.f64();
    c.training_f1 = r.f64();
    return c;
}

inline void write_model_payload(ByteWriter& w, const Normalizer& n) {
    model_detail::write_vector(w, n.mean);
    model_detail::write_vector(w, n.stddev);
    for (bool c : n.constant_columns) w.u8(c ? 1 : 0);
}

inline Normalizer read_normalizer_payload(ByteReader& r) {
    Normalizer n;
    n.mean = model_detail::read_vector(r);
    n.stddev = model_detail::read_vector(r);
    if (n.stddev.size() != n.mean.size()) throw FormatError("inconsistent normalizer dimensions");
    n.constant_columns.resize(n.mean.size());
    for (std::size_t i = 0; i < n.constant_columns.size(); ++i) n.constant_columns[i] = r.u8() != 0;
    return n;
}

inline void write_model_payload(ByteWriter& w, const MlpClassifier& clf) {
    w.u32(static_cast<std::uint32_t>(clf.class_count));
    w.u32(static_cast<std::uint32_t>(clf.layers.size()));
    for (const auto& layer : clf.layers) model_detail::write_layer(w, layer);
    write_model_payload(w, clf.input_norm);
}

inline MlpClassifier read_mlp_payload(ByteReader& r) {
    MlpClassifier clf;
    clf.class_count = r.u32();
    const std::size_t layers = r.u32();
    for (std::size_t i = 0; i < layers; ++i) clf.layers.push_back(model_detail::read_layer(r));
    clf.input_norm = read_normalizer_payload(r);
    if (clf.layers.empty() || clf.layers.back().out_dims() != clf.class_count)
        throw FormatError("inconsistent MLP dimensions");
    return clf;
}

// --- file-level wrappers -----------------------------------------------------

template <typename ModelT>
std::vector<unsigned char> serialize_model(const ModelT& model, ModelKind kind) {
    ByteWriter w;
    w.magic("CSIM");
    w.u16(kFormatVersion);
    w.u8(static_cast<std::uint8_t>(kind));
    write_model_payload(w, model);
    return w.take();
}

inline ModelKind peek_model_kind(std::span<const unsigned char> bytes) {
    ByteReader r(bytes);
    r.expect_magic("CSIM", "model file");
    const auto version = r.u16();
    if (version != kFormatVersion)
        throw FormatError("unsupported CSIM version " + std::to_string(version));
    return static_cast<ModelKind>(r.u8());
}

// Positions a reader just past the CSIM header, checking the expected kind.
inline ByteReader open_model(std::span<const unsigned char> bytes, ModelKind expected) {
    ByteReader r(bytes);
    r.expect_magic("CSIM", "model file");
    const auto version = r.u16();
    if (version != kFormatVersion)
        throw FormatError("unsupported CSIM version " + std::to_string(version));
    const auto kind = static_cast<ModelKind>(r.u8());
    if (kind != expected)
        throw FormatError("model file holds kind " + std::to_string(static_cast<int>(kind)) +
                          ", expected " + std::to_string(static_cast<int>(expected)));
    return r;
}

template <typename ModelT>
void save_model(const ModelT& model, ModelKind kind, const std::filesystem::path& path) {
    const auto bytes = serialize_model(model, kind);
    write_file_bytes(path, bytes);
}

}  // namespace csi
