#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "csi/kmeans.hpp"
#include "csi/rng.hpp"

using namespace csi;

namespace {

double distortion(const VectorQuantizer& q, const Matrix& points) {
    double acc = 0.0;
    for (std::size_t i = 0; i < points.rows(); ++i)
        acc += squared_distance(points.row(i), q.decode(q.encode(points.row(i))));
    return acc / static_cast<double>(points.rows());
}

}  // namespace

TEST_CASE("a codebook as large as the distinct point set reaches zero distortion") {
    Matrix points = Matrix::from_rows({{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    const VectorQuantizer q = vq_fit(points, 2, 99);
    CHECK(distortion(q, points) == 0.0);
    // codebook equals the points as a set
    std::set<std::pair<double, double>> want = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    std::set<std::pair<double, double>> got;
    for (std::size_t i = 0; i < q.codebook.rows(); ++i)
        got.insert({q.codebook(i, 0), q.codebook(i, 1)});
    CHECK(got == want);
}

TEST_CASE("duplicated points, two codewords") {
    Matrix points = Matrix::from_rows({{0.0}, {0.0}, {10.0}, {10.0}});
    const VectorQuantizer q = vq_fit(points, 1, 7);
    CHECK(distortion(q, points) == 0.0);
    std::set<double> got = {q.codebook(0, 0), q.codebook(1, 0)};
    CHECK(got == std::set<double>{0.0, 10.0});
}

TEST_CASE("two well-separated blobs recover the blob means") {
    Rng rng(71);
    const std::size_t n = 400;
    Matrix points(2 * n, 3);
    const double mean_a[3] = {0.0, 0.0, 0.0};
    const double mean_b[3] = {20.0, -5.0, 7.0};
    const double sigma = 1.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < 3; ++c) {
            points(i, c) = mean_a[c] + sigma * rng.normal();
            points(n + i, c) = mean_b[c] + sigma * rng.normal();
        }
    const VectorQuantizer q = vq_fit(points, 1, 72);
    // each centroid within 3 sigma / sqrt(n) of a blob mean
    const double tol = 3.0 * sigma / std::sqrt(static_cast<double>(n));
    double best_a = std::numeric_limits<double>::infinity();
    double best_b = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 2; ++i) {
        best_a = std::min(best_a, squared_distance(q.codebook.row(i), {mean_a, 3}));
        best_b = std::min(best_b, squared_distance(q.codebook.row(i), {mean_b, 3}));
    }
    CHECK(std::sqrt(best_a) <= 3.0 * tol);
    CHECK(std::sqrt(best_b) <= 3.0 * tol);
}

TEST_CASE("encode matches a brute-force nearest-centroid scan") {
    Rng rng(73);
    Matrix points(600, 5);
    for (auto& v : points.data()) v = rng.normal();
    const VectorQuantizer q = vq_fit(points, 4, 74);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> query(5);
        for (auto& v : query) v = rng.normal();
        const auto got = q.encode(query);
        std::uint32_t want = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < q.codebook.rows(); ++c) {
            const double d = squared_distance(query, q.codebook.row(c));
            if (d < best) {
                best = d;
                want = static_cast<std::uint32_t>(c);
            }
        }
        REQUIRE(got == want);
    }
}

TEST_CASE("ties encode to the lowest index") {
    VectorQuantizer q;
    q.bits = 3;
    q.codebook = Matrix::from_rows({{0.0}, {1.0}, {2.0}, {4.0}, {5.0}, {6.0}, {7.0}, {8.0}});
    // 3.0 is equidistant from codewords 2 and 3
    CHECK(q.encode(std::vector<double>{3.0}) == 2);
    CHECK_THROWS_AS(q.decode(8), RangeError);
}

TEST_CASE("a frame equal to a centroid encodes to that centroid") {
    Rng rng(75);
    Matrix points(100, 4);
    for (auto& v : points.data()) v = rng.uniform(-1.0, 1.0);
    const VectorQuantizer q = vq_fit(points, 3, 76);
    for (std::size_t i = 0; i < q.codebook.rows(); ++i)
        REQUIRE(q.encode(q.codebook.row(i)) == static_cast<std::uint32_t>(i));
}

TEST_CASE("distortion history is non-increasing") {
    Rng rng(77);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix points(800, 6);
        for (auto& v : points.data())
            v = trial % 2 == 0 ? rng.normal() : rng.uniform(-4.0, 4.0);
        const VectorQuantizer q = vq_fit(points, 1 + trial, 78 + static_cast<std::uint64_t>(trial));
        REQUIRE_FALSE(q.distortion_history.empty());
        for (std::size_t i = 0; i + 1 < q.distortion_history.size(); ++i)
            REQUIRE(q.distortion_history[i + 1] <= q.distortion_history[i] + 1e-12);
    }
}

TEST_CASE("doubling the codebook with nested seeding does not increase distortion") {
    Rng rng(79);
    Matrix points(1000, 4);
    for (auto& v : points.data()) v = rng.normal();
    double prev = std::numeric_limits<double>::infinity();
    Matrix warm;
    for (int bits = 1; bits <= 6; ++bits) {
        const VectorQuantizer q = vq_fit(points, bits, 80, warm);
        const double d = distortion(q, points);
        REQUIRE(d <= prev + 1e-12);
        prev = d;
        warm = q.codebook;
    }
}

TEST_CASE("deterministic per seed") {
    Rng rng(81);
    Matrix points(300, 3);
    for (auto& v : points.data()) v = rng.normal();
    const VectorQuantizer a = vq_fit(points, 3, 42);
    const VectorQuantizer b = vq_fit(points, 3, 42);
    CHECK(a.codebook == b.codebook);
}

TEST_CASE("subsample_rows is an even deterministic selection") {
    Matrix points(10, 1);
    for (std::size_t i = 0; i < 10; ++i) points(i, 0) = static_cast<double>(i);
    const Matrix sub = subsample_rows(points, 5);
    REQUIRE(sub.rows() == 5);
    CHECK(sub(0, 0) == 0.0);
    CHECK(sub(4, 0) == 8.0);
    CHECK(subsample_rows(points, 20).rows() == 10);
}
