#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "csi/error.hpp"
#include "csi/linalg.hpp"
#include "csi/types.hpp"

namespace csi {

struct WindowFeature {
    double a_star = 0.0;
};

// Mean over subcarriers of the per-subcarrier sample standard deviation
// (n-1 divisor) across the window's frames. High under motion, near zero
// for a static channel.
inline WindowFeature compute_a_star(const Matrix& frames, const Window& w) {
    if (w.length < 2) throw InsufficientDataError("A* needs at least two frames per window");
    const std::size_t d = frames.cols();
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < w.length; ++i) {
        auto row = frames.row(w.start_index + i);
        for (std::size_t c = 0; c < d; ++c) mean[c] += row[c];
    }
    for (auto& v : mean) v /= static_cast<double>(w.length);
    std::vector<double> ss(d, 0.0);
    for (std::size_t i = 0; i < w.length; ++i) {
        auto row = frames.row(w.start_index + i);
        for (std::size_t c = 0; c < d; ++c) {
            const double diff = row[c] - mean[c];
            ss[c] += diff * diff;
        }
    }
    double a_star = 0.0;
    for (std::size_t c = 0; c < d; ++c)
        a_star += std::sqrt(ss[c] / static_cast<double>(w.length - 1));
    a_star /= static_cast<double>(d);
    return WindowFeature{a_star};
}

inline WindowFeature compute_a_star(const Matrix& window) {
    return compute_a_star(window, Window{0, window.rows(), 0});
}

// Binary classifier: positive (presence) iff the feature is strictly above
// the threshold.
struct ThresholdClassifier {
    double threshold = 0.0;
    bool degenerate = false;  // all training features identical
    double training_f1 = 0.0;
};

inline bool threshold_predict(const ThresholdClassifier& clf, double a_star) {
    return a_star > clf.threshold;
}

namespace detail {

inline double binary_f1(std::size_t tp, std::size_t fp, std::size_t fn) {
    const double denom = static_cast<double>(2 * tp + fp + fn);
    if (denom == 0.0) return 0.0;
    return 2.0 * static_cast<double>(tp) / denom;
}

}  // namespace detail

// Picks the midpoint between consecutive sorted feature values that
// maximizes training F1 (positive = above threshold); ties resolve to the
// smallest threshold.
inline ThresholdClassifier fit_threshold(std::span<const double> features,
                                         std::span<const int> labels) {
    if (features.size() != labels.size()) throw ShapeError("feature/label count mismatch");
    if (features.empty()) throw EmptyResultError("cannot fit threshold on empty data");
    std::size_t positives = 0;
    for (int l : labels) positives += l != 0 ? 1 : 0;
    if (positives == 0 || positives == labels.size())
        throw DegenerateLabelsError("threshold fitting needs both classes");

    std::vector<std::size_t> order(features.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return features[a] < features[b]; });

    ThresholdClassifier clf;
    if (features[order.front()] == features[order.back()]) {
        clf.threshold = features[order.front()];
        clf.degenerate = true;
        clf.training_f1 = 0.0;
        return clf;
    }

    // Sweep candidates from low to high. At threshold t, predictions are
    // positive for features > t; walking the sorted order keeps TP/FP/FN
    // incremental.
    std::size_t tp = positives;           // all positives predicted positive at t = -inf
    std::size_t fp = labels.size() - positives;
    std::size_t fn = 0;
    double best_f1 = -1.0;
    double best_threshold = 0.0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        // Move sample order[i] to the "predicted negative" side.
        if (labels[order[i]] != 0) {
            --tp;
            ++fn;
        } else {
            --fp;
        }
        const double lo = features[order[i]];
        const double hi = features[order[i + 1]];
        if (lo == hi) continue;  // not a distinct boundary
        const double candidate = 0.5 * (lo + hi);
        const double f1 = detail::binary_f1(tp, fp, fn);
        if (f1 > best_f1) {
            best_f1 = f1;
            best_threshold = candidate;
        }
    }
    clf.threshold = best_threshold;
    clf.training_f1 = best_f1;
    return clf;
}

}  // namespace csi
