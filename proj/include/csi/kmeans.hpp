#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "csi/error.hpp"
#include "csi/linalg.hpp"
#include "csi/rng.hpp"

namespace csi {

// Codebook quantizer: a frame encodes to the index of its Euclidean-nearest
// centroid (ties to the lowest index), so the rate is `bits` per frame
// regardless of the dimension.
struct VectorQuantizer {
    Matrix codebook;  // 2^bits x D
    int bits = 0;
    std::vector<double> distortion_history;  // mean squared distance per Lloyd iteration

    std::size_t codeword_count() const { return codebook.rows(); }
    std::size_t dims() const { return codebook.cols(); }

    std::uint32_t encode(std::span<const double> frame) const {
        if (frame.size() != dims()) throw ShapeError("frame width does not match codebook");
        std::uint32_t best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < codebook.rows(); ++i) {
            const double d = squared_distance(frame, codebook.row(i));
            if (d < best_dist) {
                best_dist = d;
                best = static_cast<std::uint32_t>(i);
            }
        }
        return best;
    }

    std::span<const double> decode(std::uint32_t index) const {
        if (index >= codebook.rows()) throw RangeError("codeword index out of range");
        return codebook.row(index);
    }
};

namespace detail {

// Distance-weighted (k-means++) seeding. Warm-start centroids, when given,
// occupy the first slots; remaining picks are weighted by squared distance
// to the nearest chosen centroid. Once every remaining point coincides
// with a centroid, the rest are filled with copies of the first point.
inline Matrix seed_codebook(const Matrix& points, std::size_t k, Rng& rng,
                            const Matrix& warm_start) {
    const std::size_t n = points.rows();
    const std::size_t d = points.cols();
    Matrix centroids(k, d);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::size_t chosen = 0;

    auto add_centroid = [&](std::span<const double> p) {
        std::copy(p.begin(), p.end(), centroids.row(chosen).begin());
        for (std::size_t i = 0; i < n; ++i)
            nearest[i] = std::min(nearest[i], squared_distance(points.row(i), p));
        ++chosen;
    };

    for (std::size_t i = 0; i < warm_start.rows() && chosen < k; ++i)
        add_centroid(warm_start.row(i));
    if (chosen == 0) add_centroid(points.row(rng.below(n)));

    while (chosen < k) {
        double total = 0.0;
        for (double w : nearest) total += w;
        if (total <= 0.0) {
            // Fewer distinct points than codewords; duplicates cost nothing.
            add_centroid(points.row(0));
            continue;
        }
        double target = rng.uniform() * total;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            target -= nearest[i];
            if (target <= 0.0) {
                pick = i;
                break;
            }
        }
        add_centroid(points.row(pick));
    }
    return centroids;
}

}  // namespace detail

// k-means with 2^bits codewords. Lloyd iterations run until the relative
// distortion improvement drops below `tolerance` or `max_iters` is hit;
// empty clusters are re-seeded to the point farthest from its assigned
// centroid. The recorded distortion history is non-increasing.
inline VectorQuantizer vq_fit(const Matrix& points, int bits, std::uint64_t seed,
                              const Matrix& warm_start = {}, double tolerance = 1e-7,
                              std::size_t max_iters = 300) {
    if (points.rows() == 0) throw EmptyResultError("cannot fit codebook on empty data");
    if (bits < 1 || bits > 8) throw ConfigError("codebook bits must be within [1, 8]");
    const std::size_t k = std::size_t{1} << bits;
    const std::size_t n = points.rows();
    const std::size_t d = points.cols();

    Rng rng(seed);
    Matrix centroids = detail::seed_codebook(points, k, rng, warm_start);

    VectorQuantizer q;
    q.bits = bits;
    std::vector<std::uint32_t> assignment(n, 0);
    std::vector<double> point_cost(n, 0.0);
    double prev = -1.0;

    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        // Assignment step; ties go to the lowest index.
        double distortion = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto p = points.row(i);
            std::uint32_t best = 0;
            double best_dist = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double dist = squared_distance(p, centroids.row(c));
                if (dist < best_dist) {
                    best_dist = dist;
                    best = static_cast<std::uint32_t>(c);
                }
            }
            assignment[i] = best;
            point_cost[i] = best_dist;
            distortion += best_dist;
        }
        distortion /= static_cast<double>(n);
        q.distortion_history.push_back(distortion);
        if (prev >= 0.0 && prev - distortion < tolerance * std::max(prev, 1e-300)) break;
        prev = distortion;

        // Centroid update.
        Matrix sums(k, d);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            auto p = points.row(i);
            auto s = sums.row(assignment[i]);
            for (std::size_t j = 0; j < d; ++j) s[j] += p[j];
            ++counts[assignment[i]];
        }
        std::vector<std::size_t> empties;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                empties.push_back(c);
                continue;
            }
            auto dst = centroids.row(c);
            auto s = sums.row(c);
            for (std::size_t j = 0; j < d; ++j) dst[j] = s[j] / static_cast<double>(counts[c]);
        }
        // Re-seed empty clusters at the points farthest from their centroids.
        std::vector<bool> taken(n, false);
        for (std::size_t c : empties) {
            std::size_t far = 0;
            double far_cost = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (taken[i]) continue;
                if (point_cost[i] > far_cost) {
                    far_cost = point_cost[i];
                    far = i;
                }
            }
            taken[far] = true;
            auto p = points.row(far);
            std::copy(p.begin(), p.end(), centroids.row(c).begin());
        }
    }

    q.codebook = std::move(centroids);
    return q;
}

inline std::vector<std::uint32_t> vq_encode_all(const VectorQuantizer& q, const Matrix& frames) {
    std::vector<std::uint32_t> out(frames.rows());
    for (std::size_t i = 0; i < frames.rows(); ++i) out[i] = q.encode(frames.row(i));
    return out;
}

inline Matrix vq_decode_all(const VectorQuantizer& q, std::span<const std::uint32_t> indices) {
    Matrix out(indices.size(), q.dims());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        auto src = q.decode(indices[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

// Deterministic even subsample of rows, used to keep codebook training
// tractable on long captures. Returns the input when it is small enough.
inline Matrix subsample_rows(const Matrix& points, std::size_t max_rows) {
    if (points.rows() <= max_rows || max_rows == 0) return points;
    std::vector<std::size_t> indices(max_rows);
    for (std::size_t i = 0; i < max_rows; ++i)
        indices[i] = i * points.rows() / max_rows;
    return points.take_rows(indices);
}

}  // namespace csi
