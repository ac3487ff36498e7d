#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "csi/error.hpp"
#include "csi/rng.hpp"
#include "csi/types.hpp"

namespace csi {

struct PresenceParams {
    double empty_noise_std = 0.05;
    double presence_noise_std = 0.15;
    double fading_amplitude = 0.8;
    double fading_period_s = 2.0;
    double segment_seconds = 15.0;  // alternating empty / presence segments
};

struct ActivityClassParams {
    std::string name;
    double variance_scale = 1.0;
    double modulation_freq_hz = 1.0;
};

struct SynthConfig {
    std::uint64_t seed = 0xC51;
    std::size_t subcarriers = 56;
    double frame_rate = 64.0;
    double duration_s = 300.0;  // per class
    PresenceParams presence;
    std::vector<ActivityClassParams> activity = {
        {"walk", 1.0, 1.2}, {"run", 1.7, 2.5}, {"jump", 2.6, 4.0},
        {"sit", 0.4, 0.6},  {"empty", 0.15, 0.0},
    };

    void validate() const {
        if (subcarriers == 0) throw ConfigError("subcarrier count must be positive");
        if (frame_rate <= 0.0) throw ConfigError("frame rate must be positive");
        if (duration_s <= 0.0) throw ConfigError("duration must be positive");
        if (presence.empty_noise_std < 0.0 || presence.presence_noise_std < 0.0)
            throw ConfigError("noise levels must be non-negative");
        // Separability by construction: presence must be at least as noisy
        // as the empty room (strictly, unless the config is the degenerate
        // all-zero one used to probe the generator itself).
        if (presence.presence_noise_std < presence.empty_noise_std ||
            (presence.empty_noise_std > 0.0 &&
             presence.presence_noise_std == presence.empty_noise_std &&
             presence.fading_amplitude <= 0.0))
            throw ConfigError("presence noise must exceed empty-room noise");
    }
};

namespace synth_detail {

// Smooth strictly positive spectral profile: an offset plus a few random
// low-order cosines across the subcarrier axis.
inline std::vector<double> base_profile(std::size_t dims, Rng& rng) {
    std::vector<double> base(dims, 3.0);
    for (int order = 1; order <= 4; ++order) {
        const double amp = rng.uniform(0.1, 0.3);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (std::size_t i = 0; i < dims; ++i)
            base[i] += amp * std::cos(2.0 * std::numbers::pi * order *
                                          static_cast<double>(i) / static_cast<double>(dims) +
                                      phase);
    }
    return base;
}

// Interchange values are 32-bit floats; rounding at generation time keeps
// generated datasets bit-identical across save/load round trips.
inline double to_storage_grid(double v) {
    return static_cast<double>(static_cast<float>(std::max(v, 1e-6)));
}

}  // namespace synth_detail

// Alternating empty / presence segments over a shared spectral profile.
// Presence adds band-limited fading (a slow sinusoid with random phase per
// subcarrier, which spans a rank-2 subspace across subcarriers) plus
// stronger noise, so the A* feature separates the classes by construction.
inline CsiDataset gen_presence(const SynthConfig& config) {
    config.validate();
    Rng rng(derive_seed(config.seed, 0x9e1));
    const std::size_t d = config.subcarriers;
    const auto base = synth_detail::base_profile(d, rng);
    std::vector<double> fading_phase(d);
    for (auto& p : fading_phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);

    const auto seg_frames =
        static_cast<std::size_t>(config.presence.segment_seconds * config.frame_rate);
    if (seg_frames == 0) throw ConfigError("segment shorter than one frame");
    const auto frames_per_class = static_cast<std::size_t>(config.duration_s * config.frame_rate);
    const std::size_t segments_per_class =
        std::max<std::size_t>(1, frames_per_class / seg_frames);

    CsiDataset ds;
    ds.meta.subcarrier_count = d;
    ds.meta.frame_rate = config.frame_rate;
    ds.meta.channel_width_mhz = 20;
    ds.meta.guard_mask.assign(d, false);
    ds.meta.class_names = {"empty", "presence"};

    const std::size_t total = 2 * segments_per_class * seg_frames;
    ds.amplitudes = Matrix(total, d);
    ds.timestamps.resize(total);
    ds.labels.resize(total);

    const double omega = 2.0 * std::numbers::pi / config.presence.fading_period_s;
    std::size_t frame = 0;
    for (std::size_t seg = 0; seg < 2 * segments_per_class; ++seg) {
        const int label = static_cast<int>(seg % 2);  // empty first
        const double noise_std = label == 0 ? config.presence.empty_noise_std
                                            : config.presence.presence_noise_std;
        for (std::size_t f = 0; f < seg_frames; ++f, ++frame) {
            const double t = static_cast<double>(frame) / config.frame_rate;
            ds.timestamps[frame] = t;
            ds.labels[frame] = label;
            auto row = ds.amplitudes.row(frame);
            for (std::size_t i = 0; i < d; ++i) {
                double v = base[i] + noise_std * rng.normal();
                if (label == 1)
                    v += config.presence.fading_amplitude *
                         std::sin(omega * t + fading_phase[i]);
                row[i] = synth_detail::to_storage_grid(v);
            }
        }
    }
    return ds;
}

// One contiguous recording per activity class. Every class fades inside
// its own rank-2 subspace (fresh random phases) at its own frequency, with
// amplitude and noise scaled by variance_scale; classes with zero
// modulation frequency are noise-only.
inline CsiDataset gen_activity(const SynthConfig& config) {
    config.validate();
    if (config.activity.empty()) throw ConfigError("no activity classes configured");
    Rng rng(derive_seed(config.seed, 0x9e2));
    const std::size_t d = config.subcarriers;
    const auto base = synth_detail::base_profile(d, rng);

    const double modulation_amplitude = 0.5;
    const double noise_scale = 0.1;

    CsiDataset ds;
    ds.meta.subcarrier_count = d;
    ds.meta.frame_rate = config.frame_rate;
    ds.meta.channel_width_mhz = 160;
    ds.meta.guard_mask.assign(d, false);

    const auto frames_per_class = static_cast<std::size_t>(config.duration_s * config.frame_rate);
    const std::size_t total = config.activity.size() * frames_per_class;
    ds.amplitudes = Matrix(total, d);
    ds.timestamps.resize(total);
    ds.labels.resize(total);

    std::size_t frame = 0;
    for (std::size_t cls = 0; cls < config.activity.size(); ++cls) {
        const auto& params = config.activity[cls];
        ds.meta.class_names.push_back(params.name.empty() ? "class_" + std::to_string(cls)
                                                          : params.name);
        std::vector<double> phase(d);
        for (auto& p : phase) p = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double omega = 2.0 * std::numbers::pi * params.modulation_freq_hz;
        const double amp = params.modulation_freq_hz > 0.0
                               ? modulation_amplitude * params.variance_scale
                               : 0.0;
        const double noise_std = noise_scale * params.variance_scale;
        for (std::size_t f = 0; f < frames_per_class; ++f, ++frame) {
            const double t = static_cast<double>(frame) / config.frame_rate;
            ds.timestamps[frame] = t;
            ds.labels[frame] = static_cast<int>(cls);
            auto row = ds.amplitudes.row(frame);
            for (std::size_t i = 0; i < d; ++i) {
                double v = base[i] + noise_std * rng.normal();
                if (amp > 0.0) v += amp * std::sin(omega * t + phase[i]);
                row[i] = synth_detail::to_storage_grid(v);
            }
        }
    }
    return ds;
}

// Desk-scale defaults for the two tasks.
inline SynthConfig default_presence_config(std::uint64_t seed = 0xC51) {
    SynthConfig c;
    c.seed = seed;
    c.subcarriers = 56;
    c.frame_rate = 64.0;
    c.duration_s = 300.0;  // 10 minutes total across both classes
    return c;
}

inline SynthConfig default_activity_config(std::uint64_t seed = 0xC51) {
    SynthConfig c;
    c.seed = seed;
    c.subcarriers = 128;
    c.frame_rate = 150.0;
    c.duration_s = 80.0;  // per activity
    return c;
}

}  // namespace csi
