#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csi/error.hpp"

namespace csi {

// K x K counts; rows index the true class, columns the predicted class.
struct ConfusionMatrix {
    std::size_t classes = 0;
    std::vector<std::size_t> counts;

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t k) : classes(k), counts(k * k, 0) {}

    std::size_t& at(std::size_t truth, std::size_t predicted) {
        return counts[truth * classes + predicted];
    }
    std::size_t at(std::size_t truth, std::size_t predicted) const {
        return counts[truth * classes + predicted];
    }

    void add(int truth, int predicted) {
        ++at(static_cast<std::size_t>(truth), static_cast<std::size_t>(predicted));
    }

    std::size_t total() const {
        std::size_t t = 0;
        for (auto c : counts) t += c;
        return t;
    }
};

enum class F1Mode { kBinaryPositive, kMacro };

struct F1Detail {
    double f1 = 0.0;
    std::vector<double> per_class;
    std::vector<bool> undefined_class;  // zero support and zero predictions: F1 taken as 0
};

inline F1Detail f1_score_detail(const ConfusionMatrix& m, F1Mode mode) {
    if (m.classes == 0 || m.total() == 0) throw EmptyResultError("empty confusion matrix");
    F1Detail out;
    out.per_class.resize(m.classes, 0.0);
    out.undefined_class.resize(m.classes, false);
    for (std::size_t k = 0; k < m.classes; ++k) {
        std::size_t tp = m.at(k, k);
        std::size_t fn = 0;
        std::size_t fp = 0;
        for (std::size_t j = 0; j < m.classes; ++j) {
            if (j == k) continue;
            fn += m.at(k, j);
            fp += m.at(j, k);
        }
        if (tp + fn + fp == 0) {
            out.undefined_class[k] = true;
            out.per_class[k] = 0.0;
        } else {
            out.per_class[k] = 2.0 * static_cast<double>(tp) /
                               static_cast<double>(2 * tp + fp + fn);
        }
    }
    if (mode == F1Mode::kBinaryPositive) {
        if (m.classes != 2) throw ConfigError("binary F1 needs a 2-class matrix");
        out.f1 = out.per_class[1];  // positive class = 1 (presence)
    } else {
        double acc = 0.0;
        for (double f : out.per_class) acc += f;
        out.f1 = acc / static_cast<double>(m.classes);
    }
    return out;
}

inline double f1_score(const ConfusionMatrix& m, F1Mode mode) {
    return f1_score_detail(m, mode).f1;
}

// Percentage drop versus the uncompressed baseline; negative when the
// compressed pipeline happens to score higher.
inline double relative_f1_loss(double baseline_f1, double compressed_f1) {
    if (baseline_f1 <= 0.0) throw ConfigError("baseline F1 must be positive");
    return 100.0 * (baseline_f1 - compressed_f1) / baseline_f1;
}

inline ConfusionMatrix confusion_from_predictions(std::span<const int> truth,
                                                  std::span<const int> predicted,
                                                  std::size_t classes) {
    if (truth.size() != predicted.size()) throw ShapeError("prediction count mismatch");
    ConfusionMatrix m(classes);
    for (std::size_t i = 0; i < truth.size(); ++i) m.add(truth[i], predicted[i]);
    return m;
}

}  // namespace csi
