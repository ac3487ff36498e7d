#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "csi/error.hpp"
#include "csi/linalg.hpp"

namespace csi {

// One-dimensional minimum-MSE quantizer. Levels are the reconstruction
// points, thresholds the decision boundaries; a value exactly on a
// threshold encodes to the lower index.
struct ScalarQuantizer {
    std::vector<double> levels;      // 2^bits, sorted (duplicates only when degenerate)
    std::vector<double> thresholds;  // 2^bits - 1, midpoints of adjacent levels
    int bits = 0;
    bool degenerate = false;  // training data had fewer distinct values than levels
    double training_mse = 0.0;

    std::size_t level_count() const { return levels.size(); }

    std::uint32_t encode(double value) const {
        // thresholds are sorted; cell j is (t_{j-1}, t_j].
        const auto it = std::lower_bound(thresholds.begin(), thresholds.end(), value);
        auto idx = static_cast<std::size_t>(it - thresholds.begin());
        // Duplicate levels decode identically; emitting the lowest
        // equivalent index keeps re-encoding decoded data index-stable.
        while (idx > 0 && levels[idx - 1] == levels[idx]) --idx;
        return static_cast<std::uint32_t>(idx);
    }

    double decode(std::uint32_t index) const {
        if (index >= levels.size()) throw RangeError("quantizer index out of range");
        return levels[index];
    }
};

namespace detail {

struct SortedSamples {
    std::vector<double> values;   // ascending
    std::vector<double> prefix;   // prefix[i] = sum of first i values
    std::vector<double> prefix2;  // prefix sums of squares

    explicit SortedSamples(std::span<const double> samples)
        : values(samples.begin(), samples.end()) {
        std::sort(values.begin(), values.end());
        prefix.resize(values.size() + 1, 0.0);
        prefix2.resize(values.size() + 1, 0.0);
        for (std::size_t i = 0; i < values.size(); ++i) {
            prefix[i + 1] = prefix[i] + values[i];
            prefix2[i + 1] = prefix2[i] + values[i] * values[i];
        }
    }

    std::size_t size() const { return values.size(); }
    double sum(std::size_t begin, std::size_t end) const { return prefix[end] - prefix[begin]; }
    double sum2(std::size_t begin, std::size_t end) const { return prefix2[end] - prefix2[begin]; }
};

// Runs Lloyd iterations from the given levels; returns (levels, mse).
// Both steps (threshold update, centroid update) are individually
// non-increasing in MSE, so the iteration is a descent.
inline std::pair<std::vector<double>, double> lloyd_descend(const SortedSamples& s,
                                                            std::vector<double> levels,
                                                            double tolerance, std::size_t max_iters) {
    const std::size_t k = levels.size();
    const std::size_t n = s.size();
    std::sort(levels.begin(), levels.end());
    double mse = 0.0;
    double prev_mse = -1.0;
    std::vector<std::size_t> bounds(k + 1);

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        // Cell j holds samples in (t_{j-1}, t_j], found by binary search.
        bounds[0] = 0;
        bounds[k] = n;
        for (std::size_t j = 0; j + 1 < k; ++j) {
            const double t = 0.5 * (levels[j] + levels[j + 1]);
            bounds[j + 1] = static_cast<std::size_t>(
                std::upper_bound(s.values.begin(), s.values.end(), t) - s.values.begin());
        }
        // Centroid update + MSE of the *updated* levels.
        mse = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t b = bounds[j];
            const std::size_t e = bounds[j + 1];
            if (e > b) levels[j] = s.sum(b, e) / static_cast<double>(e - b);
            // empty cell: keep the previous level
            const double c = levels[j];
            mse += s.sum2(b, e) - 2.0 * c * s.sum(b, e) + c * c * static_cast<double>(e - b);
        }
        mse /= static_cast<double>(n);
        std::sort(levels.begin(), levels.end());
        if (prev_mse >= 0.0 && prev_mse - mse < tolerance * std::max(prev_mse, 1e-300)) break;
        prev_mse = mse;
    }
    return {std::move(levels), mse};
}

inline std::vector<double> quantile_levels(const SortedSamples& s, std::size_t k) {
    std::vector<double> levels(k);
    const auto n = static_cast<double>(s.size());
    for (std::size_t j = 0; j < k; ++j) {
        auto idx = static_cast<std::size_t>((static_cast<double>(j) + 0.5) / static_cast<double>(k) * n);
        idx = std::min(idx, s.size() - 1);
        levels[j] = s.values[idx];
    }
    return levels;
}

inline std::vector<double> uniform_levels(double lo, double hi, std::size_t k) {
    std::vector<double> levels(k);
    const double step = (hi - lo) / static_cast<double>(k);
    for (std::size_t j = 0; j < k; ++j)
        levels[j] = lo + (static_cast<double>(j) + 0.5) * step;
    return levels;
}

}  // namespace detail

// Fits a Lloyd-Max quantizer with 2^bits levels. Internally builds the
// whole ladder 1..bits so the trained MSE is non-increasing in the bit
// count: each rung seeds candidates from sample quantiles, a uniform grid
// over [min, max], and a split of the previous rung's levels, keeping the
// best. The uniform candidate also guarantees the trained MSE never
// exceeds a uniform mid-rise quantizer's.
inline ScalarQuantizer lloyd_max_fit(std::span<const double> samples, int bits,
                                     double tolerance = 1e-7, std::size_t max_iters = 200) {
    if (samples.empty()) throw EmptyResultError("cannot fit quantizer on empty samples");
    if (bits < 1 || bits > 8) throw ConfigError("quantizer bits must be within [1, 8]");

    detail::SortedSamples s(samples);
    const double lo = s.values.front();
    const double hi = s.values.back();
    const double range = hi - lo;

    std::size_t distinct = samples.empty() ? 0 : 1;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s.values[i] != s.values[i - 1]) ++distinct;

    std::vector<double> best_levels;
    double best_mse = 0.0;
    for (int level_bits = 1; level_bits <= bits; ++level_bits) {
        const std::size_t k = std::size_t{1} << level_bits;
        std::vector<std::vector<double>> candidates;
        candidates.push_back(detail::quantile_levels(s, k));
        candidates.push_back(detail::uniform_levels(lo, hi, k));
        if (!best_levels.empty()) {
            // Split each previous level into a +/- delta pair; after one
            // centroid update this can only improve on the previous rung.
            std::vector<double> split;
            split.reserve(k);
            const double delta = range > 0.0 ? 1e-9 * range : 0.0;
            for (double c : best_levels) {
                split.push_back(c - delta);
                split.push_back(c + delta);
            }
            candidates.push_back(std::move(split));
            // Previous levels padded with extremes: bit-exact fallback in
            // case rounding makes the other candidates land slightly above.
            std::vector<double> padded = best_levels;
            while (padded.size() < k) padded.push_back(padded.size() % 2 ? hi : lo);
            std::sort(padded.begin(), padded.end());
            candidates.push_back(std::move(padded));
        }

        bool first = true;
        std::vector<double> rung_levels;
        double rung_mse = 0.0;
        for (auto& init : candidates) {
            auto [levels, mse] = detail::lloyd_descend(s, std::move(init), tolerance, max_iters);
            if (first || mse < rung_mse) {
                rung_levels = std::move(levels);
                rung_mse = mse;
                first = false;
            }
        }
        best_levels = std::move(rung_levels);
        best_mse = rung_mse;
    }

    ScalarQuantizer q;
    q.bits = bits;
    q.levels = std::move(best_levels);
    q.training_mse = best_mse;
    q.degenerate = distinct < q.levels.size();
    if (q.degenerate) {
        // Collapse unused levels onto the extremes so all 2^bits indices
        // stay decodable.
        std::vector<double> dedup;
        for (double c : q.levels)
            if (dedup.empty() || c != dedup.back()) dedup.push_back(c);
        while (dedup.size() < q.levels.size()) {
            dedup.insert(dedup.begin(), lo);
            if (dedup.size() < q.levels.size()) dedup.push_back(hi);
        }
        std::sort(dedup.begin(), dedup.end());
        q.levels = std::move(dedup);
    }
    q.thresholds.resize(q.levels.size() - 1);
    for (std::size_t j = 0; j + 1 < q.levels.size(); ++j)
        q.thresholds[j] = 0.5 * (q.levels[j] + q.levels[j + 1]);
    return q;
}

// Independent per-dimension quantizer bank over the columns of a matrix.
inline std::vector<ScalarQuantizer> sq_fit(const Matrix& train, int bits) {
    std::vector<ScalarQuantizer> bank;
    bank.reserve(train.cols());
    std::vector<double> column(train.rows());
    for (std::size_t c = 0; c < train.cols(); ++c) {
        for (std::size_t r = 0; r < train.rows(); ++r) column[r] = train(r, c);
        bank.push_back(lloyd_max_fit(column, bits));
    }
    return bank;
}

inline std::vector<std::uint32_t> sq_encode(const std::vector<ScalarQuantizer>& bank,
                                            std::span<const double> frame) {
    if (frame.size() != bank.size()) throw ShapeError("frame width does not match quantizer bank");
    std::vector<std::uint32_t> indices(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) indices[i] = bank[i].encode(frame[i]);
    return indices;
}

inline std::vector<double> sq_decode(const std::vector<ScalarQuantizer>& bank,
                                     std::span<const std::uint32_t> indices) {
    if (indices.size() != bank.size()) throw ShapeError("index count does not match quantizer bank");
    std::vector<double> frame(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) frame[i] = bank[i].decode(indices[i]);
    return frame;
}

}  // namespace csi
