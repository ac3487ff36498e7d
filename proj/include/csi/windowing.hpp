#pragma once

#include <cstddef>
#include <vector>

#include "csi/error.hpp"
#include "csi/types.hpp"

namespace csi {

// Enumerates windows of spec.length every spec.stride frames over
// [begin, end). Windows that would cross a label boundary are discarded so
// every window has an unambiguous ground-truth label.
inline std::vector<Window> windows_in_range(const std::vector<int>& labels, std::size_t begin,
                                            std::size_t end, const WindowSpec& spec) {
    std::vector<Window> out;
    if (spec.length == 0 || spec.stride == 0) throw ConfigError("window length and stride must be >= 1");
    if (end < begin + spec.length) return out;
    for (std::size_t start = begin; start + spec.length <= end; start += spec.stride) {
        const int label = labels[start];
        bool uniform = true;
        for (std::size_t i = 1; i < spec.length && uniform; ++i)
            uniform = labels[start + i] == label;
        if (uniform) out.push_back(Window{start, spec.length, label});
    }
    return out;
}

inline std::vector<Window> make_windows(const CsiDataset& ds, const WindowSpec& spec) {
    if (ds.size() < spec.length)
        throw EmptyResultError("dataset shorter than one window");
    return windows_in_range(ds.labels, 0, ds.size(), spec);
}

struct SplitResult {
    std::vector<Window> train;
    std::vector<Window> test;
    std::size_t skipped_groups = 0;    // groups too short for any window
    std::size_t short_recordings = 0;  // activity runs that used the scaled fallback
};

// Presence protocol: cut the dataset into fixed-duration groups and give
// the head of each group to training and the tail to testing. Windows are
// built inside each span, so train and test never share a frame.
inline SplitResult split_presence(const CsiDataset& ds, double group_seconds = 3.0,
                                  WindowSpec window = {64, 32}, double train_fraction = 2.0 / 3.0) {
    if (ds.meta.frame_rate <= 0.0) throw ConfigError("frame rate must be positive");
    if (train_fraction < 0.0 || train_fraction > 1.0)
        throw ConfigError("train fraction must be within [0, 1]");
    const auto group_len = static_cast<std::size_t>(group_seconds * ds.meta.frame_rate);
    if (group_len == 0) throw ConfigError("group shorter than one frame");

    SplitResult out;
    for (std::size_t g = 0; g + group_len <= ds.size(); g += group_len) {
        const auto split = g + static_cast<std::size_t>(train_fraction * static_cast<double>(group_len));
        auto train = windows_in_range(ds.labels, g, split, window);
        auto test = windows_in_range(ds.labels, split, g + group_len, window);
        if (train.empty() && test.empty()) {
            ++out.skipped_groups;
            continue;
        }
        out.train.insert(out.train.end(), train.begin(), train.end());
        out.test.insert(out.test.end(), test.begin(), test.end());
    }
    return out;
}

struct ActivitySplitSpec {
    double segment_seconds = 16.0;
    double train_seconds = 9.0;
    double test_seconds = 3.0;
    WindowSpec window = {450, 1};
};

// Activity protocol: each contiguous recording of one label is cut into
// fixed segments; inside a segment the first train_seconds feed training
// and a test span sits between two equal buffers made from the remaining
// time. Recordings shorter than one segment fall back to the same
// structure scaled proportionally (flagged via short_recordings).
inline SplitResult split_activity(const CsiDataset& ds,
                                  const ActivitySplitSpec& spec = ActivitySplitSpec{}) {
    if (ds.meta.frame_rate <= 0.0) throw ConfigError("frame rate must be positive");
    if (spec.train_seconds + spec.test_seconds > spec.segment_seconds)
        throw ConfigError("train + test seconds exceed the segment duration");
    const double rate = ds.meta.frame_rate;
    const double buffer_seconds = (spec.segment_seconds - spec.train_seconds - spec.test_seconds) / 2.0;

    SplitResult out;
    auto emit_segment = [&](std::size_t base, double train_s, double test_s, double buf_s) {
        const auto train_end = base + static_cast<std::size_t>(train_s * rate);
        const auto test_begin = base + static_cast<std::size_t>((train_s + buf_s) * rate);
        const auto test_end = base + static_cast<std::size_t>((train_s + buf_s + test_s) * rate);
        auto train = windows_in_range(ds.labels, base, train_end, spec.window);
        auto test = windows_in_range(ds.labels, test_begin, test_end, spec.window);
        if (train.empty() && test.empty()) {
            ++out.skipped_groups;
            return;
        }
        out.train.insert(out.train.end(), train.begin(), train.end());
        out.test.insert(out.test.end(), test.begin(), test.end());
    };

    std::size_t run_start = 0;
    while (run_start < ds.size()) {
        std::size_t run_end = run_start + 1;
        while (run_end < ds.size() && ds.labels[run_end] == ds.labels[run_start]) ++run_end;
        const double run_seconds = static_cast<double>(run_end - run_start) / rate;
        const auto seg_len = static_cast<std::size_t>(spec.segment_seconds * rate);
        if (run_seconds >= spec.segment_seconds) {
            for (std::size_t base = run_start; base + seg_len <= run_end; base += seg_len)
                emit_segment(base, spec.train_seconds, spec.test_seconds, buffer_seconds);
        } else {
            // Proportional fallback with the same train:buffer:test:buffer structure.
            const double scale = run_seconds / spec.segment_seconds;
            emit_segment(run_start, spec.train_seconds * scale, spec.test_seconds * scale,
                         buffer_seconds * scale);
            ++out.short_recordings;
        }
        run_start = run_end;
    }
    return out;
}

// Frame indices covered by at least one window, sorted ascending.
inline std::vector<std::size_t> covered_frames(const std::vector<Window>& windows,
                                               std::size_t total_frames) {
    std::vector<bool> used(total_frames, false);
    for (const auto& w : windows)
        for (std::size_t i = 0; i < w.length; ++i) used[w.start_index + i] = true;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < total_frames; ++i)
        if (used[i]) out.push_back(i);
    return out;
}

}  // namespace csi
