#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "csi/io.hpp"
#include "csi/preprocess.hpp"
#include "csi/rng.hpp"
#include "csi/synth.hpp"

using namespace csi;

namespace {

CsiDataset tiny_complex_dataset() {
    CsiDataset ds;
    ds.meta.subcarrier_count = 4;
    ds.meta.frame_rate = 10.0;
    ds.meta.channel_width_mhz = 20;
    ds.meta.guard_mask.assign(4, false);
    ds.meta.class_names = {"class_0", "class_1"};
    ds.timestamps = {0.0, 0.1, 0.2};
    ds.labels = {0, 0, 1};
    ds.complex_values = Matrix(3, 8);
    Rng rng(3);
    for (auto& v : ds.complex_values.data())
        v = static_cast<float>(rng.uniform(-2.0, 2.0));
    return ds;
}

}  // namespace

TEST_CASE("CSV loads a 3-frame dataset and infers two classes") {
    const std::string text =
        "# csif,v1,W=4,rate=10,width_mhz=20,amp=1\n"
        "0,0,1,2,3,4\n"
        "0.1,0,1.5,2.5,3.5,4.5\n"
        "0.2,1,2,3,4,5\n";
    const CsiDataset ds = parse_csv(text);
    CHECK(ds.size() == 3);
    CHECK(ds.meta.subcarrier_count == 4);
    CHECK(ds.class_count() == 2);
    CHECK(ds.amplitudes(2, 3) == 5.0);
    CHECK(ds.meta.class_names.size() == 2);
}

TEST_CASE("binary file with wrong magic is rejected") {
    std::vector<unsigned char> bytes = {'X', 'S', 'I', 'F', 0, 0};
    CHECK_THROWS_AS(parse_binary(bytes), FormatError);
}

TEST_CASE("malformed CSV header is rejected") {
    CHECK_THROWS_AS(parse_csv("# wrong,v1,W=4\n"), FormatError);
    CHECK_THROWS_AS(parse_csv("# csif,v1,rate=10\n"), FormatError);
    CHECK_THROWS_AS(parse_csv("# csif,v1,W=4,bogus=1\n"), FormatError);
}

TEST_CASE("inconsistent row width raises ShapeError") {
    const std::string text =
        "# csif,v1,W=4,rate=10,width_mhz=20,amp=1\n"
        "0,0,1,2,3,4\n"
        "0.1,0,1,2,3\n";
    CHECK_THROWS_AS(parse_csv(text), ShapeError);
}

TEST_CASE("binary round-trip preserves a generated dataset bit-exactly") {
    SynthConfig config = default_presence_config(11);
    config.duration_s = 5.0;
    const CsiDataset ds = gen_presence(config);
    const auto bytes = serialize_binary(ds);
    const CsiDataset back = parse_binary(bytes);
    REQUIRE(back.size() == ds.size());
    CHECK(back.amplitudes == ds.amplitudes);
    CHECK(back.timestamps == ds.timestamps);
    CHECK(back.labels == ds.labels);
}

TEST_CASE("CSV and binary agree bit-exactly on amplitudes") {
    SynthConfig config = default_presence_config(12);
    config.duration_s = 3.0;
    const CsiDataset ds = gen_presence(config);
    const CsiDataset via_csv = parse_csv(serialize_csv(ds));
    const CsiDataset via_bin = parse_binary(serialize_binary(ds));
    CHECK(via_csv.amplitudes == via_bin.amplitudes);
    CHECK(via_csv.amplitudes == ds.amplitudes);
}

TEST_CASE("complex dataset round-trips through both formats") {
    const CsiDataset ds = tiny_complex_dataset();
    const CsiDataset via_csv = parse_csv(serialize_csv(ds));
    const CsiDataset via_bin = parse_binary(serialize_binary(ds));
    CHECK(via_csv.complex_values == ds.complex_values);
    CHECK(via_bin.complex_values == ds.complex_values);
    CHECK_FALSE(ds.is_amplitude_only());
}

TEST_CASE("missing timestamps are synthesized from the frame rate") {
    const std::string text =
        "# csif,v1,W=2,rate=10,width_mhz=20,amp=1\n"
        ",0,1,2\n"
        ",0,1,2\n";
    const CsiDataset ds = parse_csv(text);
    CHECK(ds.timestamps[0] == 0.0);
    CHECK_THAT(ds.timestamps[1], Catch::Matchers::WithinAbs(0.1, 1e-12));
}

TEST_CASE("amplitude extraction uses the complex modulus") {
    const double frame[] = {3.0, 4.0, 0.0, 0.0, 1.0, -1.0};
    const auto amp = extract_amplitude(std::span<const double>(frame, 6));
    CHECK(amp[0] == 5.0);
    CHECK(amp[1] == 0.0);
    CHECK_THAT(amp[2], Catch::Matchers::WithinAbs(std::sqrt(2.0), 1e-15));
}

TEST_CASE("amplitude extraction matches an element-wise oracle on random data") {
    Rng rng(8);
    std::vector<double> frame(2 * 64);
    for (auto& v : frame) v = rng.uniform(-5.0, 5.0);
    const auto amp = extract_amplitude(frame);
    for (std::size_t i = 0; i < 64; ++i) {
        const double oracle = std::sqrt(frame[2 * i] * frame[2 * i] +
                                        frame[2 * i + 1] * frame[2 * i + 1]);
        REQUIRE_THAT(amp[i], Catch::Matchers::WithinAbs(oracle, 1e-12));
    }
}

TEST_CASE("amplitude extraction is idempotent on real data") {
    CsiFrame f;
    f.amplitudes = {1.0, 2.0, 3.0};
    CHECK(extract_amplitude(f) == f.amplitudes);
    SynthConfig config = default_presence_config(1);
    config.duration_s = 2.0;
    const CsiDataset ds = gen_presence(config);
    CHECK(extract_amplitudes(ds).amplitudes == ds.amplitudes);
}

TEST_CASE("guard filtering keeps 56 of 64 subcarriers") {
    CsiDataset ds;
    ds.meta.subcarrier_count = 64;
    ds.meta.frame_rate = 10.0;
    ds.meta.guard_mask.assign(64, false);
    ds.timestamps = {0.0};
    ds.labels = {0};
    ds.amplitudes = Matrix(1, 64);
    for (std::size_t i = 0; i < 64; ++i) ds.amplitudes(0, i) = static_cast<double>(i);

    const auto keep = keep_mask_from_guards(default_guard_mask_64());
    const CsiDataset filtered = filter_subcarriers(ds, keep);
    CHECK(filtered.meta.subcarrier_count == 56);
    CHECK(filtered.amplitudes.cols() == 56);
    // order preserved: first retained subcarrier is index 4
    CHECK(filtered.amplitudes(0, 0) == 4.0);
}

TEST_CASE("identity mask leaves the dataset unchanged; W=2048 is supported") {
    CsiDataset ds;
    ds.meta.subcarrier_count = 2048;
    ds.meta.frame_rate = 1.0;
    ds.meta.guard_mask.assign(2048, false);
    ds.timestamps = {0.0};
    ds.labels = {0};
    ds.amplitudes = Matrix(1, 2048, 1.0);
    const CsiDataset same = filter_subcarriers(ds, std::vector<bool>(2048, true));
    CHECK(same.meta.subcarrier_count == 2048);
    CHECK(same.amplitudes == ds.amplitudes);
    CHECK_THROWS_AS(filter_subcarriers(ds, std::vector<bool>(2048, false)), EmptySelectionError);
    CHECK_THROWS_AS(filter_subcarriers(ds, std::vector<bool>(3, true)), ShapeError);
}

TEST_CASE("filtering twice equals filtering with the composed mask") {
    Rng rng(17);
    CsiDataset ds;
    ds.meta.subcarrier_count = 12;
    ds.meta.frame_rate = 1.0;
    ds.meta.guard_mask.assign(12, false);
    ds.timestamps = {0.0, 1.0};
    ds.labels = {0, 0};
    ds.amplitudes = Matrix(2, 12);
    for (auto& v : ds.amplitudes.data()) v = rng.uniform(0.0, 1.0);

    std::vector<bool> m1(12), composed(12, false);
    for (std::size_t i = 0; i < 12; ++i) m1[i] = rng.uniform() < 0.7;
    m1[0] = true;  // keep at least one
    std::vector<bool> m2;
    for (std::size_t i = 0; i < 12; ++i)
        if (m1[i]) m2.push_back(rng.uniform() < 0.7);
    m2[0] = true;
    std::size_t j = 0;
    for (std::size_t i = 0; i < 12; ++i)
        if (m1[i]) composed[i] = m2[j++];

    const CsiDataset two_step = filter_subcarriers(filter_subcarriers(ds, m1), m2);
    const CsiDataset one_step = filter_subcarriers(ds, composed);
    CHECK(two_step.amplitudes == one_step.amplitudes);
}

TEST_CASE("normalizer matches the two-point example and flags constants") {
    Matrix train = Matrix::from_rows({{0.0, 7.0}, {2.0, 7.0}});
    const Normalizer norm = fit_normalizer(train);
    CHECK_THAT(norm.mean[0], Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(norm.stddev[0], Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK(norm.constant_columns[1]);
    const Matrix normalized = norm.apply(train);
    CHECK_THAT(normalized(0, 0), Catch::Matchers::WithinAbs(-1.0, 1e-12));
    CHECK_THAT(normalized(1, 0), Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK(normalized(0, 1) == 0.0);
    CHECK(normalized(1, 1) == 0.0);
}

TEST_CASE("normalized columns have mean 0 and std 1 (independent recomputation)") {
    Rng rng(23);
    Matrix train(200, 5);
    for (auto& v : train.data()) v = rng.uniform(0.0, 10.0);
    const Normalizer norm = fit_normalizer(train);
    const Matrix normalized = norm.apply(train);
    for (std::size_t c = 0; c < 5; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < 200; ++r) mean += normalized(r, c);
        mean /= 200.0;
        double var = 0.0;
        for (std::size_t r = 0; r < 200; ++r) {
            const double d = normalized(r, c) - mean;
            var += d * d;
        }
        var /= 200.0;
        REQUIRE_THAT(mean, Catch::Matchers::WithinAbs(0.0, 1e-9));
        REQUIRE_THAT(std::sqrt(var), Catch::Matchers::WithinAbs(1.0, 1e-9));
    }
    // round trip
    const Matrix restored = norm.invert(normalized);
    for (std::size_t i = 0; i < train.data().size(); ++i)
        REQUIRE_THAT(restored.data()[i], Catch::Matchers::WithinAbs(train.data()[i], 1e-12));
}
