#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "csi/error.hpp"
#include "csi/linalg.hpp"

namespace csi {

struct DatasetMeta {
    std::size_t subcarrier_count = 0;  // W
    double frame_rate = 0.0;           // frames / second
    int channel_width_mhz = 0;
    // true marks a guard (non-informative) subcarrier; length W.
    std::vector<bool> guard_mask;
    std::vector<std::string> class_names;
};

// One frame: a timestamp plus either W complex values (re/im interleaved)
// or W non-negative amplitudes. Used for single-frame operations; bulk
// data lives in CsiDataset's matrices.
struct CsiFrame {
    double timestamp = 0.0;
    std::vector<double> complex_values;  // re0, im0, re1, im1, ...
    std::vector<double> amplitudes;

    bool is_complex() const { return !complex_values.empty(); }
};

// Frames are stored as contiguous matrices: amplitudes is N x W,
// complex_values is N x 2W (re/im interleaved). Exactly one of the two is
// populated until extract_amplitudes() converts a complex dataset.
struct CsiDataset {
    Matrix amplitudes;
    Matrix complex_values;
    std::vector<double> timestamps;
    std::vector<int> labels;
    DatasetMeta meta;

    std::size_t size() const { return timestamps.size(); }
    bool is_amplitude_only() const { return complex_values.empty(); }

    std::size_t class_count() const {
        int max_label = -1;
        for (int l : labels) max_label = std::max(max_label, l);
        return static_cast<std::size_t>(max_label + 1);
    }

    CsiFrame frame(std::size_t i) const {
        CsiFrame f;
        f.timestamp = timestamps[i];
        if (!complex_values.empty()) {
            auto row = complex_values.row(i);
            f.complex_values.assign(row.begin(), row.end());
        }
        if (!amplitudes.empty()) {
            auto row = amplitudes.row(i);
            f.amplitudes.assign(row.begin(), row.end());
        }
        return f;
    }

    // Checks the documented invariants; throws on violation.
    void validate() const {
        const std::size_t n = timestamps.size();
        const std::size_t w = meta.subcarrier_count;
        if (labels.size() != n)
            throw ShapeError("labels length does not match frame count");
        if (!amplitudes.empty() && (amplitudes.rows() != n || amplitudes.cols() != w))
            throw ShapeError("amplitude matrix does not match meta");
        if (!complex_values.empty() && (complex_values.rows() != n || complex_values.cols() != 2 * w))
            throw ShapeError("complex matrix does not match meta");
        if (amplitudes.empty() && complex_values.empty() && n > 0)
            throw ShapeError("dataset has frames but no values");
        if (!meta.guard_mask.empty() && meta.guard_mask.size() != w)
            throw ShapeError("guard mask length does not match subcarrier count");
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (timestamps[i + 1] < timestamps[i])
                throw FormatError("timestamps are not non-decreasing");
        for (double v : amplitudes.data())
            if (!std::isfinite(v) || v < 0.0)
                throw FormatError("amplitudes must be finite and non-negative");
        for (int l : labels)
            if (l < 0) throw FormatError("negative class label");
    }
};

struct WindowSpec {
    std::size_t length = 64;
    std::size_t stride = 32;
};

// A window is a view into a dataset: frames [start_index, start_index + length).
// All frames in a window carry the same label (crossing windows are
// discarded during construction).
struct Window {
    std::size_t start_index = 0;
    std::size_t length = 0;
    int label = 0;
};

// Materializes the window content from a frame matrix (rows = frames).
inline Matrix window_matrix(const Matrix& frames, const Window& w) {
    Matrix out(w.length, frames.cols());
    for (std::size_t i = 0; i < w.length; ++i) {
        auto src = frames.row(w.start_index + i);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

}  // namespace csi
