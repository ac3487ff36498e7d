#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "csi/lloyd_max.hpp"
#include "csi/rng.hpp"

using namespace csi;

namespace {

double quantizer_mse(const ScalarQuantizer& q, std::span<const double> samples) {
    double acc = 0.0;
    for (double x : samples) {
        const double d = x - q.decode(q.encode(x));
        acc += d * d;
    }
    return acc / static_cast<double>(samples.size());
}

// Uniform mid-rise quantizer spanning [min, max]: the reference the
// trained quantizer must not lose to.
double uniform_quantizer_mse(std::span<const double> samples, int bits) {
    const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const std::size_t k = std::size_t{1} << bits;
    const double step = (hi - lo) / static_cast<double>(k);
    double acc = 0.0;
    for (double x : samples) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k; ++j) {
            const double level = lo + (static_cast<double>(j) + 0.5) * step;
            best = std::min(best, (x - level) * (x - level));
        }
        acc += best;
    }
    return acc / static_cast<double>(samples.size());
}

// Exact optimal empirical quantizer by dynamic programming over sorted
// samples (cells are contiguous runs; cell cost is its SSE).
double dp_optimal_mse(std::vector<double> samples, std::size_t k) {
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    std::vector<double> p1(n + 1, 0.0), p2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        p1[i + 1] = p1[i] + samples[i];
        p2[i + 1] = p2[i] + samples[i] * samples[i];
    }
    auto sse = [&](std::size_t b, std::size_t e) {
        const double cnt = static_cast<double>(e - b);
        const double s = p1[e] - p1[b];
        return (p2[e] - p2[b]) - s * s / cnt;
    };
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(n + 1, inf), cur(n + 1, inf);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i) prev[i] = sse(0, i);
    for (std::size_t m = 2; m <= k; ++m) {
        std::fill(cur.begin(), cur.end(), inf);
        cur[0] = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t s = m - 1; s < i; ++s)
                cur[i] = std::min(cur[i], prev[s] + sse(s, i));
        std::swap(prev, cur);
    }
    return prev[n] / static_cast<double>(n);
}

std::vector<double> mixed_samples(Rng& rng, std::size_t n, int shape) {
    std::vector<double> v(n);
    switch (shape % 3) {
        case 0:
            for (auto& x : v) x = rng.uniform(-2.0, 5.0);
            break;
        case 1:
            for (auto& x : v) x = rng.normal(1.0, 2.0);
            break;
        default:
            for (auto& x : v) x = rng.uniform() < 0.5 ? rng.normal(-3.0, 0.5) : rng.normal(4.0, 1.0);
            break;
    }
    return v;
}

}  // namespace

TEST_CASE("uniform density, one bit: levels at the quartiles") {
    Rng rng(61);
    std::vector<double> samples(10000);
    for (auto& x : samples) x = rng.uniform();
    const ScalarQuantizer q = lloyd_max_fit(samples, 1);
    REQUIRE(q.levels.size() == 2);
    CHECK_THAT(q.levels[0], Catch::Matchers::WithinAbs(0.25, 0.02));
    CHECK_THAT(q.levels[1], Catch::Matchers::WithinAbs(0.75, 0.02));
    CHECK_THAT(q.thresholds[0], Catch::Matchers::WithinAbs(0.5, 0.02));

    // brute-force sweep over the single threshold (independent optimum)
    double best = std::numeric_limits<double>::infinity();
    for (int step = 1; step < 2000; ++step) {
        const double t = static_cast<double>(step) / 2000.0;
        double s0 = 0, s1 = 0;
        std::size_t n0 = 0, n1 = 0;
        for (double x : samples) {
            if (x <= t) {
                s0 += x;
                ++n0;
            } else {
                s1 += x;
                ++n1;
            }
        }
        if (n0 == 0 || n1 == 0) continue;
        const double c0 = s0 / static_cast<double>(n0);
        const double c1 = s1 / static_cast<double>(n1);
        double mse = 0.0;
        for (double x : samples) {
            const double c = x <= t ? c0 : c1;
            mse += (x - c) * (x - c);
        }
        best = std::min(best, mse / static_cast<double>(samples.size()));
    }
    CHECK(quantizer_mse(q, samples) <= best + 1e-9);
}

TEST_CASE("constant samples collapse to one effective level with zero MSE") {
    const std::vector<double> samples(50, 2.5);
    for (int bits : {1, 3}) {
        const ScalarQuantizer q = lloyd_max_fit(samples, bits);
        CHECK(q.degenerate);
        CHECK(quantizer_mse(q, samples) == 0.0);
        for (double level : q.levels) CHECK(level == 2.5);
    }
}

TEST_CASE("two-bit quantizer sits within 5% of the DP optimum on normal data") {
    Rng rng(62);
    std::vector<double> samples(2000);
    for (auto& x : samples) x = rng.normal();
    const ScalarQuantizer q = lloyd_max_fit(samples, 2);
    const double dp = dp_optimal_mse(samples, 4);
    const double trained = quantizer_mse(q, samples);
    CHECK(trained >= dp - 1e-12);
    CHECK(trained <= dp * 1.05);
}

TEST_CASE("trained MSE never exceeds the uniform quantizer and is monotone in bits") {
    Rng rng(63);
    for (int trial = 0; trial < 6; ++trial) {
        const auto samples = mixed_samples(rng, 4000, trial);
        double prev = std::numeric_limits<double>::infinity();
        for (int bits = 1; bits <= 8; ++bits) {
            const ScalarQuantizer q = lloyd_max_fit(samples, bits);
            const double mse = quantizer_mse(q, samples);
            REQUIRE(mse <= uniform_quantizer_mse(samples, bits) + 1e-9);
            REQUIRE(mse <= prev + 1e-12);
            REQUIRE_THAT(q.training_mse, Catch::Matchers::WithinRel(mse, 1e-9));
            prev = mse;
        }
    }
}

TEST_CASE("thresholds are nearest-neighbor midpoints and levels increase") {
    Rng rng(64);
    const auto samples = mixed_samples(rng, 3000, 1);
    const ScalarQuantizer q = lloyd_max_fit(samples, 4);
    REQUIRE_FALSE(q.degenerate);
    for (std::size_t j = 0; j + 1 < q.levels.size(); ++j) {
        REQUIRE(q.levels[j] < q.levels[j + 1]);
        REQUIRE_THAT(q.thresholds[j],
                     Catch::Matchers::WithinAbs(0.5 * (q.levels[j] + q.levels[j + 1]), 1e-9));
    }
}

TEST_CASE("a value exactly on a threshold encodes to the lower index") {
    ScalarQuantizer q;
    q.bits = 1;
    q.levels = {0.0, 1.0};
    q.thresholds = {0.5};
    CHECK(q.encode(0.5) == 0);
    CHECK(q.encode(0.5 + 1e-12) == 1);
    CHECK(q.encode(-3.0) == 0);
    CHECK(q.encode(3.0) == 1);
    CHECK_THROWS_AS(q.decode(2), RangeError);
}

TEST_CASE("round-trip error is bounded by half the largest level gap") {
    Rng rng(65);
    const auto samples = mixed_samples(rng, 3000, 2);
    const ScalarQuantizer q = lloyd_max_fit(samples, 3);
    double max_half_gap = 0.0;
    for (std::size_t j = 0; j + 1 < q.levels.size(); ++j)
        max_half_gap = std::max(max_half_gap, 0.5 * (q.levels[j + 1] - q.levels[j]));
    for (double x : samples) {
        const double rec = q.decode(q.encode(x));
        REQUIRE(std::abs(rec - x) <= max_half_gap + 1e-12);
    }
}

TEST_CASE("re-encoding decoded values is index-stable") {
    Rng rng(66);
    const auto samples = mixed_samples(rng, 1000, 0);
    const ScalarQuantizer q = lloyd_max_fit(samples, 3);
    for (double x : samples) {
        const auto idx = q.encode(x);
        REQUIRE(q.encode(q.decode(idx)) == idx);
    }
    // degenerate quantizer with duplicate levels stays stable too
    const std::vector<double> few = {0.0, 0.0, 10.0};
    const ScalarQuantizer dq = lloyd_max_fit(few, 2);
    REQUIRE(dq.degenerate);
    for (double x : {-1.0, 0.0, 4.9, 5.1, 10.0, 20.0}) {
        const auto idx = dq.encode(x);
        REQUIRE(dq.encode(dq.decode(idx)) == idx);
    }
}

TEST_CASE("per-dimension banks train independently") {
    Rng rng(67);
    Matrix train(500, 3);
    for (std::size_t r = 0; r < 500; ++r) {
        train(r, 0) = rng.uniform(0.0, 1.0);
        train(r, 1) = rng.normal(10.0, 2.0);
        train(r, 2) = 7.0;  // constant column
    }
    const auto bank = sq_fit(train, 2);
    REQUIRE(bank.size() == 3);
    CHECK_FALSE(bank[0].degenerate);
    CHECK(bank[2].degenerate);
    const double frame[3] = {0.4, 9.0, 7.0};
    const auto idx = sq_encode(bank, frame);
    const auto rec = sq_decode(bank, idx);
    CHECK(rec[2] == 7.0);
    CHECK(std::abs(rec[1] - 9.0) < 2.0);
    std::vector<std::uint32_t> bad = {0, 0};
    CHECK_THROWS_AS(sq_decode(bank, bad), ShapeError);
}

TEST_CASE("input validation") {
    std::vector<double> empty;
    CHECK_THROWS_AS(lloyd_max_fit(empty, 2), EmptyResultError);
    const std::vector<double> samples = {1.0, 2.0};
    CHECK_THROWS_AS(lloyd_max_fit(samples, 0), ConfigError);
    CHECK_THROWS_AS(lloyd_max_fit(samples, 9), ConfigError);
}
