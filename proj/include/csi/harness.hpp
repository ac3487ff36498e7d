#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "csi/error.hpp"
#include "csi/io.hpp"
#include "csi/metrics.hpp"
#include "csi/mlp.hpp"
#include "csi/preprocess.hpp"
#include "csi/scheme.hpp"
#include "csi/sensing.hpp"
#include "csi/sha256.hpp"
#include "csi/synth.hpp"
#include "csi/types.hpp"
#include "csi/version.hpp"
#include "csi/windowing.hpp"

namespace csi {

enum class Task { kPresence, kActivity };
enum class ClassifierKind { kThreshold, kMlp };

// Mode A trains the classifier on uncompressed training data and evaluates
// it on compressed test data; mode B retrains on the compressed training
// data for every scheme.
enum class TrainingMode { kUncompressedTrain, kCompressedTrain };

struct HarnessOptions {
    TrainingMode mode = TrainingMode::kUncompressedTrain;

    double presence_group_seconds = 3.0;
    WindowSpec presence_window{64, 32};
    double presence_train_fraction = 2.0 / 3.0;
    ActivitySplitSpec activity_split{};

    // Activity windows are summarized as per-dimension mean and standard
    // deviation unless raw flattening is requested.
    bool flatten_activity_windows = false;

    std::size_t max_train_windows = 1500;  // classifier training subsample (0 = all)
    std::vector<std::size_t> mlp_hidden = {128};
    TrainConfig mlp_train{.epochs = 40, .batch_size = 32, .learning_rate = 0.05,
                          .kl_weight = 0.0, .seed = 0};
    SchemeFitOptions fit{};
};

inline HarnessOptions default_options(Task task) {
    HarnessOptions opts;
    if (task == Task::kActivity) {
        opts.mlp_hidden = {256, 64};
        opts.fit.vae_hidden1 = 256;
        opts.fit.vae_hidden2 = 64;
    }
    return opts;
}

struct TradeoffPoint {
    SchemeConfig scheme;
    double bits_per_frame = 0.0;
    double compression_ratio = 1.0;
    double f1 = 0.0;
    double f1_loss_percent = 0.0;
    bool failed = false;
    std::string error;
};

struct SweepResult {
    double baseline_f1 = 0.0;
    std::vector<TradeoffPoint> points;
    std::uint64_t seed = 0;
    std::string dataset_sha256;
};

namespace harness_detail {

// Remaps windows into a gathered matrix that holds only the frames the
// windows cover. Each window's frames stay contiguous in the gathered
// matrix, so only the start index changes.
struct GatheredFrames {
    std::vector<std::size_t> frame_ids;  // sorted global ids
    std::vector<Window> windows;         // start_index re-based into the gathering

    static GatheredFrames build(const std::vector<Window>& windows, std::size_t total_frames) {
        GatheredFrames out;
        out.frame_ids = covered_frames(windows, total_frames);
        out.windows = windows;
        for (auto& w : out.windows) {
            const auto it =
                std::lower_bound(out.frame_ids.begin(), out.frame_ids.end(), w.start_index);
            w.start_index = static_cast<std::size_t>(it - out.frame_ids.begin());
        }
        return out;
    }
};

inline std::vector<Window> subsample_windows(const std::vector<Window>& windows,
                                             std::size_t max_count) {
    if (max_count == 0 || windows.size() <= max_count) return windows;
    std::vector<Window> out;
    out.reserve(max_count);
    for (std::size_t i = 0; i < max_count; ++i)
        out.push_back(windows[i * windows.size() / max_count]);
    return out;
}

}  // namespace harness_detail

// Shared state for evaluating many schemes against one dataset: the split,
// the normalizer, gathered train/test frames, cached PCA / VAE models and
// the classifiers of mode A. prepare() must run before evaluate() calls,
// which are then safe to issue from several threads.
class ExperimentContext {
public:
    ExperimentContext(const CsiDataset& dataset, Task task, ClassifierKind classifier,
                      std::uint64_t seed, HarnessOptions options)
        : task_(task), classifier_(classifier), seed_(seed), options_(std::move(options)) {
        if (classifier_ == ClassifierKind::kThreshold && task_ != Task::kPresence)
            throw ConfigError("the threshold classifier applies to the presence task only");

        const CsiDataset amp = extract_amplitudes(dataset);
        amp.validate();
        dataset_sha256_ = Sha256::hex_digest(
            [&] {
                const auto bytes = serialize_binary(amp);
                return std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size());
            }());
        class_count_ = std::max<std::size_t>(2, amp.class_count());

        SplitResult split =
            task_ == Task::kPresence
                ? split_presence(amp, options_.presence_group_seconds, options_.presence_window,
                                 options_.presence_train_fraction)
                : split_activity(amp, options_.activity_split);
        if (split.train.empty()) throw EmptyResultError("split produced no training windows");
        if (split.test.empty()) throw EmptyResultError("split produced no test windows");

        train_ = harness_detail::GatheredFrames::build(split.train, amp.size());
        test_ = harness_detail::GatheredFrames::build(split.test, amp.size());

        Matrix train_frames = amp.amplitudes.take_rows(train_.frame_ids);
        Matrix test_frames = amp.amplitudes.take_rows(test_.frame_ids);
        normalizer_ = fit_normalizer(train_frames);
        normalizer_.apply_in_place(train_frames);
        normalizer_.apply_in_place(test_frames);
        train_frames_ = std::move(train_frames);
        test_frames_ = std::move(test_frames);

        clf_train_windows_ =
            harness_detail::subsample_windows(train_.windows, options_.max_train_windows);
    }

    // Fits shared artifacts for the given schemes; sequential.
    void prepare(std::span<const SchemeConfig> grid) {
        std::size_t max_n_pca = 0;
        bool any_vae = false;
        for (const auto& config : grid) {
            config.validate();
            if (config.n_pca) max_n_pca = std::max(max_n_pca, *config.n_pca);
            // VAE cells under the threshold classifier fail per cell, so a
            // mixed grid still sweeps; no VAE is trained for them.
            if (is_vae_variant(config.variant) && classifier_ != ClassifierKind::kThreshold)
                any_vae = true;
        }
        if (max_n_pca > 0 && !pca_)
            pca_ = pca_fit(train_frames_, std::min(max_n_pca, std::min(train_frames_.rows(),
                                                                       train_frames_.cols())));
        if (any_vae && !vae_) {
            VaeModel vae = vae_init(train_frames_.cols(), options_.fit.vae_hidden1,
                                    options_.fit.vae_hidden2, derive_seed(seed_, 0x7a3));
            TrainConfig tc = options_.fit.vae_train;
            tc.seed = derive_seed(seed_, 0x7a4);
            vae_train(vae, subsample_rows(train_frames_, options_.fit.vae_max_train), tc);
            vae_ = std::move(vae);
            train_latents_ = vae_encode_all(*vae_, train_frames_);
            test_latents_ = vae_encode_all(*vae_, test_frames_);
        }
        if (options_.mode == TrainingMode::kUncompressedTrain && any_vae)
            ensure_latent_classifier();
        baseline_f1();
    }

    double baseline_f1() {
        if (!baseline_f1_) {
            ensure_classic_classifier();
            const Matrix features = classic_features(test_frames_, test_.windows);
            baseline_f1_ = score(features, test_.windows, classic_clf_, classic_threshold_);
        }
        return *baseline_f1_;
    }

    TradeoffPoint evaluate(const SchemeConfig& config) const {
        TradeoffPoint point;
        point.scheme = config;
        try {
            config.validate();
            const auto rate = make_rate_report(config, train_frames_.cols());
            point.bits_per_frame = rate.bits_per_frame;
            point.compression_ratio = rate.compression_ratio;
            if (is_vae_variant(config.variant) && classifier_ == ClassifierKind::kThreshold)
                throw ConfigError("VAE schemes have no interpretable feature for the threshold classifier");
            if (!baseline_f1_) throw ConfigError("context not prepared");

            point.f1 = evaluate_f1(config);
            point.f1_loss_percent = relative_f1_loss(*baseline_f1_, point.f1);
        } catch (const Error& e) {
            point.failed = true;
            point.error = e.what();
            point.f1 = std::nan("");
            point.f1_loss_percent = std::nan("");
        }
        return point;
    }

    const std::string& dataset_sha256() const { return dataset_sha256_; }
    std::size_t data_dims() const { return train_frames_.cols(); }
    const Normalizer& normalizer() const { return normalizer_; }
    std::size_t train_window_count() const { return train_.windows.size(); }
    std::size_t test_window_count() const { return test_.windows.size(); }

private:
    static std::uint64_t scheme_stream(const SchemeConfig& c) {
        return 0xCE11u + static_cast<std::uint64_t>(c.variant) * 1000003u +
               static_cast<std::uint64_t>(c.n_pca.value_or(0)) * 257u +
               static_cast<std::uint64_t>(c.bits);
    }

    void ensure_classic_classifier() {
        if (classic_ready_) return;
        const Matrix features = classic_features(train_frames_, clf_train_windows_);
        train_classifier(features, clf_train_windows_, classic_clf_, classic_threshold_,
                         derive_seed(seed_, 0xC1f));
        classic_ready_ = true;
    }

    void ensure_latent_classifier() {
        if (latent_ready_) return;
        const Matrix features = latent_features(train_latents_, clf_train_windows_);
        train_classifier(features, clf_train_windows_, latent_clf_, latent_threshold_,
                         derive_seed(seed_, 0xC1e));
        latent_ready_ = true;
    }

    // Feature layout for classic schemes: presence windows are flattened
    // frames, activity windows are per-dimension mean and standard
    // deviation across the window.
    Matrix classic_features(const Matrix& frames, const std::vector<Window>& windows) const {
        return window_features(frames, windows,
                               task_ == Task::kPresence || options_.flatten_activity_windows);
    }

    Matrix latent_features(const Matrix& latents, const std::vector<Window>& windows) const {
        return window_features(latents, windows,
                               task_ == Task::kPresence || options_.flatten_activity_windows);
    }

    Matrix window_features(const Matrix& frames, const std::vector<Window>& windows,
                           bool flatten) const {
        if (windows.empty()) throw EmptyResultError("no windows to featurize");
        const std::size_t d = frames.cols();
        if (classifier_ == ClassifierKind::kThreshold) {
            Matrix out(windows.size(), 1);
            for (std::size_t i = 0; i < windows.size(); ++i)
                out(i, 0) = compute_a_star(frames, windows[i]).a_star;
            return out;
        }
        if (flatten) {
            const std::size_t len = windows.front().length;
            Matrix out(windows.size(), len * d);
            for (std::size_t i = 0; i < windows.size(); ++i) {
                auto dst = out.row(i);
                for (std::size_t f = 0; f < len; ++f) {
                    auto src = frames.row(windows[i].start_index + f);
                    std::copy(src.begin(), src.end(), dst.begin() + static_cast<long>(f * d));
                }
            }
            return out;
        }
        Matrix out(windows.size(), 2 * d);
        for (std::size_t i = 0; i < windows.size(); ++i) {
            const auto& w = windows[i];
            auto dst = out.row(i);
            for (std::size_t c = 0; c < d; ++c) dst[c] = 0.0;
            for (std::size_t f = 0; f < w.length; ++f) {
                auto src = frames.row(w.start_index + f);
                for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
            }
            for (std::size_t c = 0; c < d; ++c) dst[c] /= static_cast<double>(w.length);
            for (std::size_t c = 0; c < d; ++c) dst[d + c] = 0.0;
            for (std::size_t f = 0; f < w.length; ++f) {
                auto src = frames.row(w.start_index + f);
                for (std::size_t c = 0; c < d; ++c) {
                    const double diff = src[c] - dst[c];
                    dst[d + c] += diff * diff;
                }
            }
            for (std::size_t c = 0; c < d; ++c)
                dst[d + c] = std::sqrt(dst[d + c] / static_cast<double>(w.length - 1));
        }
        return out;
    }

    void train_classifier(const Matrix& features, const std::vector<Window>& windows,
                          std::optional<MlpClassifier>& mlp_slot,
                          std::optional<ThresholdClassifier>& threshold_slot,
                          std::uint64_t seed) const {
        std::vector<int> labels(windows.size());
        for (std::size_t i = 0; i < windows.size(); ++i) labels[i] = windows[i].label;
        if (classifier_ == ClassifierKind::kThreshold) {
            std::vector<double> f(features.rows());
            for (std::size_t i = 0; i < f.size(); ++i) f[i] = features(i, 0);
            threshold_slot = fit_threshold(f, labels);
        } else {
            MlpClassifier clf = mlp_init(features.cols(), options_.mlp_hidden, class_count_, seed);
            TrainConfig tc = options_.mlp_train;
            tc.seed = seed;
            mlp_train(clf, features, labels, tc);
            mlp_slot = std::move(clf);
        }
    }

    double score(const Matrix& features, const std::vector<Window>& windows,
                 const std::optional<MlpClassifier>& mlp_clf,
                 const std::optional<ThresholdClassifier>& threshold_clf) const {
        ConfusionMatrix cm(class_count_);
        for (std::size_t i = 0; i < windows.size(); ++i) {
            int predicted;
            if (classifier_ == ClassifierKind::kThreshold)
                predicted = threshold_predict(*threshold_clf, features(i, 0)) ? 1 : 0;
            else
                predicted = mlp_predict(*mlp_clf, features.row(i)).label;
            cm.add(windows[i].label, predicted);
        }
        return f1_score(cm, task_ == Task::kPresence ? F1Mode::kBinaryPositive : F1Mode::kMacro);
    }

    double evaluate_f1(const SchemeConfig& config) const {
        const std::uint64_t cell_seed = derive_seed(seed_, scheme_stream(config));
        const bool vae = is_vae_variant(config.variant);
        if (vae && !vae_) throw ConfigError("context was not prepared for VAE schemes");

        // For VAE variants the compression of interest is the quantization
        // of the cached 4-value codes, so the cell reduces to the plain
        // scalar/vector quantizer over the latent matrices.
        SchemeConfig quant = config;
        if (vae) {
            quant.variant = config.variant == SchemeVariant::kVaeSq ? SchemeVariant::kSqOnly
                                                                    : SchemeVariant::kVqOnly;
            quant.n_pca.reset();
        }
        const Matrix& train_data = vae ? train_latents_ : train_frames_;
        const Matrix& test_data = vae ? test_latents_ : test_frames_;

        SchemeModels models;
        Matrix test_inputs;
        if (config.variant == SchemeVariant::kUncompressed) {
            test_inputs = test_data;
        } else {
            models = fit_scheme(quant, train_data, cell_seed, options_.fit,
                                pca_ ? &*pca_ : nullptr);
            test_inputs = apply_scheme(quant, models, test_data).decoded;
        }

        if (options_.mode == TrainingMode::kUncompressedTrain) {
            const auto& clf = vae ? latent_clf_ : classic_clf_;
            const auto& thr = vae ? latent_threshold_ : classic_threshold_;
            const Matrix features = window_features(test_inputs, test_.windows,
                                                    task_ == Task::kPresence ||
                                                        options_.flatten_activity_windows);
            return score(features, test_.windows, clf, thr);
        }

        // Mode B: retrain on the compressed training data.
        Matrix train_inputs = config.variant == SchemeVariant::kUncompressed
                                  ? train_data
                                  : apply_scheme(quant, models, train_data).decoded;
        std::optional<MlpClassifier> mlp_clf;
        std::optional<ThresholdClassifier> threshold_clf;
        const bool flatten = task_ == Task::kPresence || options_.flatten_activity_windows;
        const Matrix train_features = window_features(train_inputs, clf_train_windows_, flatten);
        train_classifier(train_features, clf_train_windows_, mlp_clf, threshold_clf,
                         derive_seed(cell_seed, 0xC1d));
        const Matrix features = window_features(test_inputs, test_.windows, flatten);
        return score(features, test_.windows, mlp_clf, threshold_clf);
    }

    Task task_;
    ClassifierKind classifier_;
    std::uint64_t seed_;
    HarnessOptions options_;
    std::string dataset_sha256_;
    std::size_t class_count_ = 2;

    harness_detail::GatheredFrames train_;
    harness_detail::GatheredFrames test_;
    Matrix train_frames_;  // normalized
    Matrix test_frames_;   // normalized
    Normalizer normalizer_;
    std::vector<Window> clf_train_windows_;

    std::optional<PcaModel> pca_;
    std::optional<VaeModel> vae_;
    Matrix train_latents_;
    Matrix test_latents_;

    std::optional<MlpClassifier> classic_clf_;
    std::optional<ThresholdClassifier> classic_threshold_;
    bool classic_ready_ = false;
    std::optional<MlpClassifier> latent_clf_;
    std::optional<ThresholdClassifier> latent_threshold_;
    bool latent_ready_ = false;
    std::optional<double> baseline_f1_;
};

// Full pipeline for a single scheme: split, fit on train, compress the
// test side, classify, compare to the uncompressed baseline.
inline TradeoffPoint run_experiment(const CsiDataset& dataset, const SchemeConfig& scheme,
                                    Task task, ClassifierKind classifier, std::uint64_t seed,
                                    const HarnessOptions* options = nullptr,
                                    double* baseline_out = nullptr) {
    HarnessOptions opts = options ? *options : default_options(task);
    ExperimentContext ctx(dataset, task, classifier, seed, opts);
    const SchemeConfig grid[] = {scheme};
    ctx.prepare(grid);
    if (baseline_out) *baseline_out = ctx.baseline_f1();
    auto point = ctx.evaluate(scheme);
    if (point.failed) throw ConfigError(point.error);
    return point;
}

inline std::vector<SchemeConfig> default_grid(Task task, ClassifierKind classifier) {
    std::vector<SchemeConfig> grid;
    const std::vector<std::size_t> pca_counts = {1, 2, 4, 8};
    auto add_bits = [&](SchemeVariant v, std::optional<std::size_t> n) {
        for (int bits = 1; bits <= 8; ++bits)
            grid.push_back(SchemeConfig{v, n, bits});
    };
    if (task == Task::kPresence) {
        add_bits(SchemeVariant::kSqOnly, std::nullopt);
        add_bits(SchemeVariant::kVqOnly, std::nullopt);
    }
    for (auto n : pca_counts) add_bits(SchemeVariant::kPcaSq, n);
    for (auto n : pca_counts) add_bits(SchemeVariant::kPcaVq, n);
    if (classifier == ClassifierKind::kMlp) {
        add_bits(SchemeVariant::kVaeSq, std::nullopt);
        add_bits(SchemeVariant::kVaeVq, std::nullopt);
    }
    return grid;
}

// Evaluates every grid cell. Cells run in parallel when jobs > 1; results
// are deterministic and independent of the scheduling.
inline SweepResult sweep(const CsiDataset& dataset, std::span<const SchemeConfig> grid, Task task,
                         ClassifierKind classifier, std::uint64_t seed,
                         const HarnessOptions* options = nullptr, std::size_t jobs = 1) {
    HarnessOptions opts = options ? *options : default_options(task);
    ExperimentContext ctx(dataset, task, classifier, seed, opts);
    ctx.prepare(grid);

    SweepResult result;
    result.seed = seed;
    result.baseline_f1 = ctx.baseline_f1();
    result.dataset_sha256 = ctx.dataset_sha256();
    result.points.resize(grid.size());

    if (jobs <= 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) result.points[i] = ctx.evaluate(grid[i]);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= grid.size()) break;
                result.points[i] = ctx.evaluate(grid[i]);
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < std::min(jobs, grid.size()); ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return result;
}

// --- reporting ---------------------------------------------------------------

inline std::string format_float17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string sweep_csv(const SweepResult& result) {
    std::string out = "variant,n_pca,bits,bits_per_frame,compression_ratio,f1,f1_loss_percent\n";
    for (const auto& p : result.points) {
        out += variant_name(p.scheme.variant);
        out += ',';
        out += std::to_string(p.scheme.n_pca.value_or(0));
        out += ',';
        out += std::to_string(p.scheme.bits);
        out += ',';
        out += format_float17(p.bits_per_frame);
        out += ',';
        out += format_float17(p.compression_ratio);
        out += ',';
        out += format_float17(p.f1);
        out += ',';
        out += format_float17(p.f1_loss_percent);
        out += '\n';
    }
    return out;
}

inline nlohmann::json sweep_meta(const SweepResult& result) {
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& p : result.points) {
        nlohmann::json cell;
        cell["variant"] = variant_name(p.scheme.variant);
        cell["n_pca"] = p.scheme.n_pca.value_or(0);
        cell["bits"] = p.scheme.bits;
        grid.push_back(cell);
    }
    nlohmann::json meta;
    meta["seed"] = result.seed;
    meta["dataset_sha256"] = result.dataset_sha256;
    meta["grid"] = grid;
    meta["tool_version"] = std::string(kToolName) + " " + kToolVersion;
    return meta;
}

// Writes sweep.csv and sweep.meta.json into the given directory.
inline void emit_report(const SweepResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const std::string csv = sweep_csv(result);
    write_file_bytes(dir / "sweep.csv",
                     {reinterpret_cast<const unsigned char*>(csv.data()), csv.size()});
    const std::string meta = sweep_meta(result).dump(2) + "\n";
    write_file_bytes(dir / "sweep.meta.json",
                     {reinterpret_cast<const unsigned char*>(meta.data()), meta.size()});
}

}  // namespace csi
