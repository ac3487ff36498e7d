#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "csi/error.hpp"
#include "csi/types.hpp"

namespace csi {

// |z| for one frame of interleaved re/im pairs.
inline std::vector<double> extract_amplitude(std::span<const double> complex_interleaved) {
    if (complex_interleaved.size() % 2 != 0)
        throw ShapeError("complex frame must hold re/im pairs");
    std::vector<double> out(complex_interleaved.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double re = complex_interleaved[2 * i];
        const double im = complex_interleaved[2 * i + 1];
        out[i] = std::hypot(re, im);
    }
    return out;
}

inline std::vector<double> extract_amplitude(const CsiFrame& frame) {
    if (frame.is_complex()) return extract_amplitude(frame.complex_values);
    return frame.amplitudes;  // already real: idempotent
}

// Converts a complex dataset to amplitude-only. Amplitude datasets pass
// through unchanged.
inline CsiDataset extract_amplitudes(const CsiDataset& ds) {
    if (ds.is_amplitude_only()) return ds;
    CsiDataset out;
    out.timestamps = ds.timestamps;
    out.labels = ds.labels;
    out.meta = ds.meta;
    const std::size_t w = ds.meta.subcarrier_count;
    out.amplitudes = Matrix(ds.size(), w);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto src = ds.complex_values.row(i);
        auto dst = out.amplitudes.row(i);
        for (std::size_t j = 0; j < w; ++j)
            dst[j] = std::hypot(src[2 * j], src[2 * j + 1]);
    }
    return out;
}

// Keeps the subcarriers where mask is true, preserving order.
inline CsiDataset filter_subcarriers(const CsiDataset& ds, const std::vector<bool>& keep) {
    const std::size_t w = ds.meta.subcarrier_count;
    if (keep.size() != w) throw ShapeError("mask length does not match subcarrier count");
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < w; ++i)
        if (keep[i]) kept.push_back(i);
    if (kept.empty()) throw EmptySelectionError("subcarrier mask retains nothing");

    CsiDataset out;
    out.timestamps = ds.timestamps;
    out.labels = ds.labels;
    out.meta = ds.meta;
    out.meta.subcarrier_count = kept.size();
    out.meta.guard_mask.assign(kept.size(), false);
    if (!ds.amplitudes.empty()) {
        out.amplitudes = Matrix(ds.size(), kept.size());
        for (std::size_t r = 0; r < ds.size(); ++r) {
            auto src = ds.amplitudes.row(r);
            auto dst = out.amplitudes.row(r);
            for (std::size_t i = 0; i < kept.size(); ++i) dst[i] = src[kept[i]];
        }
    }
    if (!ds.complex_values.empty()) {
        out.complex_values = Matrix(ds.size(), 2 * kept.size());
        for (std::size_t r = 0; r < ds.size(); ++r) {
            auto src = ds.complex_values.row(r);
            auto dst = out.complex_values.row(r);
            for (std::size_t i = 0; i < kept.size(); ++i) {
                dst[2 * i] = src[2 * kept[i]];
                dst[2 * i + 1] = src[2 * kept[i] + 1];
            }
        }
    }
    return out;
}

// Default guard-band layout for 64-subcarrier 20-MHz captures: with
// subcarriers indexed -32..31 (array index = subcarrier + 32), the four
// lowest, the DC carrier and the three highest are guards, leaving 56
// informative subcarriers. The exact set is configurable; this is the
// documented default.
inline std::vector<bool> default_guard_mask_64() {
    std::vector<bool> guard(64, false);
    for (std::size_t i : {0u, 1u, 2u, 3u, 32u, 61u, 62u, 63u}) guard[i] = true;
    return guard;
}

inline std::vector<bool> keep_mask_from_guards(const std::vector<bool>& guard) {
    std::vector<bool> keep(guard.size());
    for (std::size_t i = 0; i < guard.size(); ++i) keep[i] = !guard[i];
    return keep;
}

// Per-subcarrier z-score parameters, fit on training data only.
struct Normalizer {
    std::vector<double> mean;
    std::vector<double> stddev;           // clamped to 1 for constant columns
    std::vector<bool> constant_columns;   // flagged, not an error

    std::size_t dims() const { return mean.size(); }

    void apply_in_place(Matrix& m) const {
        if (m.cols() != dims()) throw ShapeError("normalizer dimension mismatch");
        for (std::size_t r = 0; r < m.rows(); ++r) {
            auto row = m.row(r);
            for (std::size_t c = 0; c < row.size(); ++c)
                row[c] = (row[c] - mean[c]) / stddev[c];
        }
    }

    Matrix apply(const Matrix& m) const {
        Matrix out = m;
        apply_in_place(out);
        return out;
    }

    Matrix invert(const Matrix& m) const {
        if (m.cols() != dims()) throw ShapeError("normalizer dimension mismatch");
        Matrix out = m;
        for (std::size_t r = 0; r < out.rows(); ++r) {
            auto row = out.row(r);
            for (std::size_t c = 0; c < row.size(); ++c)
                row[c] = row[c] * stddev[c] + mean[c];
        }
        return out;
    }
};

// Mean and population standard deviation per column.
inline Normalizer fit_normalizer(const Matrix& train) {
    if (train.rows() == 0) throw EmptyResultError("cannot fit normalizer on empty data");
    const std::size_t d = train.cols();
    Normalizer norm;
    norm.mean.assign(d, 0.0);
    norm.stddev.assign(d, 0.0);
    norm.constant_columns.assign(d, false);
    for (std::size_t r = 0; r < train.rows(); ++r) {
        auto row = train.row(r);
        for (std::size_t c = 0; c < d; ++c) norm.mean[c] += row[c];
    }
    for (auto& v : norm.mean) v /= static_cast<double>(train.rows());
    for (std::size_t r = 0; r < train.rows(); ++r) {
        auto row = train.row(r);
        for (std::size_t c = 0; c < d; ++c) {
            const double diff = row[c] - norm.mean[c];
            norm.stddev[c] += diff * diff;
        }
    }
    for (std::size_t c = 0; c < d; ++c) {
        norm.stddev[c] = std::sqrt(norm.stddev[c] / static_cast<double>(train.rows()));
        if (norm.stddev[c] == 0.0) {
            norm.stddev[c] = 1.0;
            norm.constant_columns[c] = true;
        }
    }
    return norm;
}

inline CsiDataset apply_normalizer(const Normalizer& norm, const CsiDataset& ds) {
    if (ds.amplitudes.empty())
        throw ShapeError("normalizer applies to amplitude datasets");
    CsiDataset out = ds;
    norm.apply_in_place(out.amplitudes);
    return out;
}

}  // namespace csi
