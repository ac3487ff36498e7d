// Command-line front end: generate synthetic captures, preprocess,
// fit/compress/decompress, classify, and sweep the rate/accuracy grid.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csi/csi.hpp"

namespace {

constexpr std::uint64_t kDefaultSeed = 0xC51;

std::uint64_t initial_seed() {
    // CSI_SEED overrides the built-in default; an explicit --seed wins.
    if (const char* env = std::getenv("CSI_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            throw csi::ConfigError("CSI_SEED is not a valid integer");
        }
    }
    return kDefaultSeed;
}

// Whole-buffer write through a temporary so failed runs never leave a
// partial output file.
void write_output(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
    auto tmp = path;
    tmp += ".tmp";
    csi::write_file_bytes(tmp, bytes);
    std::filesystem::rename(tmp, path);
}

void write_output(const std::filesystem::path& path, const std::string& text) {
    write_output(path, {reinterpret_cast<const unsigned char*>(text.data()), text.size()});
}

csi::FileFormat parse_format(const std::string& name) {
    if (name == "csv") return csi::FileFormat::kCsv;
    if (name == "binary" || name == "bin") return csi::FileFormat::kBinary;
    throw csi::ConfigError("unknown format '" + name + "' (expected csv or binary)");
}

// "0-3,32,61-63" -> index set
std::vector<bool> parse_drop_list(const std::string& list, std::size_t width) {
    std::vector<bool> drop(width, false);
    std::size_t pos = 0;
    auto take_number = [&]() {
        std::size_t start = pos;
        while (pos < list.size() && std::isdigit(static_cast<unsigned char>(list[pos]))) ++pos;
        if (pos == start) throw csi::ConfigError("malformed drop list: '" + list + "'");
        return static_cast<std::size_t>(std::stoul(list.substr(start, pos - start)));
    };
    while (pos < list.size()) {
        std::size_t lo = take_number();
        std::size_t hi = lo;
        if (pos < list.size() && list[pos] == '-') {
            ++pos;
            hi = take_number();
        }
        if (hi < lo || hi >= width)
            throw csi::ConfigError("drop index out of range in '" + list + "'");
        for (std::size_t i = lo; i <= hi; ++i) drop[i] = true;
        if (pos < list.size()) {
            if (list[pos] != ',') throw csi::ConfigError("malformed drop list: '" + list + "'");
            ++pos;
        }
    }
    return drop;
}

csi::Task parse_task(const std::string& name) {
    if (name == "presence") return csi::Task::kPresence;
    if (name == "activity") return csi::Task::kActivity;
    throw csi::ConfigError("unknown task '" + name + "'");
}

csi::ClassifierKind parse_classifier(const std::string& name) {
    if (name == "threshold") return csi::ClassifierKind::kThreshold;
    if (name == "mlp") return csi::ClassifierKind::kMlp;
    throw csi::ConfigError("unknown classifier '" + name + "'");
}

struct SchemeFlags {
    std::string scheme;
    int bits = 0;
    std::size_t n_pca = 0;

    csi::SchemeConfig to_config() const {
        csi::SchemeConfig config;
        config.variant = csi::parse_variant(scheme);
        config.bits = bits;
        if (n_pca > 0) config.n_pca = n_pca;
        if (csi::is_pca_variant(config.variant) && n_pca == 0)
            throw csi::ConfigError("--n-pca is required for PCA schemes");
        config.validate();
        return config;
    }
};

void print_rate(const csi::RateReport& rate) {
    std::printf("bits per frame:        %.6g\n", rate.bits_per_frame);
    std::printf("uncompressed bits:     %.6g\n", rate.uncompressed_bits_per_frame);
    std::printf("compression ratio:     %.6g:1\n", rate.compression_ratio);
}

// --- subcommand bodies -------------------------------------------------------

int cmd_gen(const std::string& task, std::uint64_t seed, const std::string& out,
            const std::string& format, std::size_t subcarriers, double rate, double duration,
            bool verbose) {
    csi::SynthConfig config = task == "presence" ? csi::default_presence_config(seed)
                                                 : csi::default_activity_config(seed);
    if (subcarriers > 0) config.subcarriers = subcarriers;
    if (rate > 0) config.frame_rate = rate;
    if (duration > 0) config.duration_s = duration;

    const csi::CsiDataset ds =
        task == "presence" ? csi::gen_presence(config) : csi::gen_activity(config);
    const auto fmt = parse_format(format);
    write_output(out, fmt == csi::FileFormat::kBinary
                          ? csi::serialize_binary(ds)
                          : [&] {
                                const auto text = csi::serialize_csv(ds);
                                return std::vector<unsigned char>(text.begin(), text.end());
                            }());
    if (verbose)
        std::fprintf(stderr, "generated %zu frames x %zu subcarriers -> %s\n", ds.size(),
                     ds.meta.subcarrier_count, out.c_str());
    return 0;
}

int cmd_preprocess(const std::string& in, const std::string& out, bool default_guards,
                   const std::string& drop_list, const std::string& format, bool verbose) {
    csi::CsiDataset ds = csi::load_dataset(in);
    ds = csi::extract_amplitudes(ds);
    if (default_guards) {
        if (ds.meta.subcarrier_count != 64)
            throw csi::ConfigError("--default-guards expects 64-subcarrier data");
        ds = csi::filter_subcarriers(ds, csi::keep_mask_from_guards(csi::default_guard_mask_64()));
    }
    if (!drop_list.empty()) {
        auto drop = parse_drop_list(drop_list, ds.meta.subcarrier_count);
        std::vector<bool> keep(drop.size());
        for (std::size_t i = 0; i < drop.size(); ++i) keep[i] = !drop[i];
        ds = csi::filter_subcarriers(ds, keep);
    }
    const auto fmt = parse_format(format);
    write_output(out, fmt == csi::FileFormat::kBinary
                          ? csi::serialize_binary(ds)
                          : [&] {
                                const auto text = csi::serialize_csv(ds);
                                return std::vector<unsigned char>(text.begin(), text.end());
                            }());
    if (verbose)
        std::fprintf(stderr, "preprocessed: %zu retained subcarriers -> %s\n",
                     ds.meta.subcarrier_count, out.c_str());
    return 0;
}

int cmd_fit(const std::string& in, const std::string& model, const std::string& out,
            std::size_t n_pca, int bits, std::uint64_t seed, std::size_t epochs, bool verbose) {
    csi::CsiDataset ds = csi::extract_amplitudes(csi::load_dataset(in));
    const csi::Normalizer norm = csi::fit_normalizer(ds.amplitudes);
    const csi::Matrix data = norm.apply(ds.amplitudes);

    std::vector<unsigned char> bytes;
    if (model == "pca") {
        if (n_pca == 0) throw csi::ConfigError("--n-pca is required for PCA");
        bytes = csi::serialize_model(csi::pca_fit(data, n_pca), csi::ModelKind::kPca);
    } else if (model == "sq") {
        bytes = csi::serialize_model(csi::sq_fit(data, bits), csi::ModelKind::kScalarQuantizerBank);
    } else if (model == "vq") {
        bytes = csi::serialize_model(
            csi::vq_fit(csi::subsample_rows(data, 8192), bits, csi::derive_seed(seed, 0x6b1)),
            csi::ModelKind::kVectorQuantizer);
    } else if (model == "vae") {
        csi::VaeModel vae = csi::vae_init(data.cols(), 64, 32, csi::derive_seed(seed, 0x7a3));
        csi::TrainConfig tc;
        tc.epochs = epochs > 0 ? epochs : 120;
        tc.learning_rate = 0.003;
        tc.seed = csi::derive_seed(seed, 0x7a4);
        csi::vae_train(vae, data, tc);
        bytes = csi::serialize_model(vae, csi::ModelKind::kVae);
    } else if (model == "normalizer") {
        bytes = csi::serialize_model(norm, csi::ModelKind::kNormalizer);
    } else {
        throw csi::ConfigError("unknown model kind '" + model + "'");
    }
    write_output(out, bytes);
    if (verbose) std::fprintf(stderr, "fit %s model -> %s\n", model.c_str(), out.c_str());
    return 0;
}

int cmd_compress(const std::string& in, const std::string& out, const SchemeFlags& flags,
                 std::uint64_t seed, const std::string& reuse, bool report_amortized) {
    const csi::SchemeConfig config = flags.to_config();
    if (config.variant == csi::SchemeVariant::kUncompressed)
        throw csi::ConfigError("choose a compression scheme (sq, vq, pca_sq, pca_vq, vae_sq, vae_vq)");
    const csi::CsiDataset ds = csi::extract_amplitudes(csi::load_dataset(in));

    std::optional<csi::CsizContainer> reuse_container;
    if (!reuse.empty()) reuse_container = csi::load_csiz(reuse);
    const csi::CsizContainer container = csi::compress_dataset(
        ds, config, seed, {}, reuse_container ? &*reuse_container : nullptr);
    const auto bytes = csi::serialize_csiz(container);
    write_output(out, bytes);

    print_rate(container.rate());
    if (report_amortized) {
        // Optional view that charges the container's model bytes against
        // the frames it stores.
        const double model_bits = static_cast<double>(bytes.size()) * 8.0 -
                                  container.rate().bits_per_frame *
                                      static_cast<double>(container.frame_count());
        const double amortized = container.rate().bits_per_frame +
                                 model_bits / static_cast<double>(container.frame_count());
        std::printf("amortized bits/frame:  %.6g (container overhead included)\n", amortized);
    }
    return 0;
}

int cmd_decompress(const std::string& in, const std::string& out, const std::string& format) {
    const csi::CsizContainer container = csi::load_csiz(in);
    const csi::CsiDataset ds = csi::decompress_container(container);
    const auto fmt = parse_format(format);
    write_output(out, fmt == csi::FileFormat::kBinary
                          ? csi::serialize_binary(ds)
                          : [&] {
                                const auto text = csi::serialize_csv(ds);
                                return std::vector<unsigned char>(text.begin(), text.end());
                            }());
    return 0;
}

int cmd_classify(const std::string& in, const std::string& task_name,
                 const std::string& classifier_name, const SchemeFlags& flags,
                 std::uint64_t seed, const std::string& mode_name) {
    const csi::Task task = parse_task(task_name);
    const csi::ClassifierKind classifier = parse_classifier(classifier_name);
    csi::SchemeConfig config;
    if (!flags.scheme.empty() && flags.scheme != "uncompressed") config = flags.to_config();

    csi::HarnessOptions options = csi::default_options(task);
    if (mode_name == "b")
        options.mode = csi::TrainingMode::kCompressedTrain;
    else if (mode_name != "a")
        throw csi::ConfigError("--mode must be a or b");

    const csi::CsiDataset ds = csi::load_dataset(in);
    double baseline = 0.0;
    const csi::TradeoffPoint point =
        csi::run_experiment(ds, config, task, classifier, seed, &options, &baseline);
    std::printf("scheme:            %s\n", config.describe().c_str());
    std::printf("baseline F1:       %.6f\n", baseline);
    std::printf("compressed F1:     %.6f\n", point.f1);
    std::printf("relative F1 loss:  %.4f %%\n", point.f1_loss_percent);
    std::printf("bits per frame:    %.6g\n", point.bits_per_frame);
    std::printf("compression ratio: %.6g:1\n", point.compression_ratio);
    return 0;
}

int cmd_sweep(const std::string& in, const std::string& task_name,
              const std::string& classifier_name, std::uint64_t seed, const std::string& out_dir,
              std::size_t jobs, const std::string& mode_name, bool verbose) {
    const csi::Task task = parse_task(task_name);
    const csi::ClassifierKind classifier = parse_classifier(classifier_name);
    csi::HarnessOptions options = csi::default_options(task);
    if (mode_name == "b")
        options.mode = csi::TrainingMode::kCompressedTrain;
    else if (mode_name != "a")
        throw csi::ConfigError("--mode must be a or b");

    const csi::CsiDataset ds = csi::load_dataset(in);
    const auto grid = csi::default_grid(task, classifier);
    const csi::SweepResult result = csi::sweep(ds, grid, task, classifier, seed, &options, jobs);
    csi::emit_report(result, out_dir);
    if (verbose) {
        std::size_t failed = 0;
        for (const auto& p : result.points) failed += p.failed ? 1 : 0;
        std::fprintf(stderr, "sweep: %zu cells (%zu failed), baseline F1 %.4f -> %s\n",
                     result.points.size(), failed, result.baseline_f1, out_dir.c_str());
    }
    std::printf("baseline F1: %.6f\n", result.baseline_f1);
    std::printf("cells:       %zu\n", result.points.size());
    std::printf("report:      %s\n", (std::filesystem::path(out_dir) / "sweep.csv").string().c_str());
    return 0;
}

int cmd_report(const std::string& csv_path) {
    const auto bytes = csi::read_file_bytes(csv_path);
    const std::string text(bytes.begin(), bytes.end());
    std::size_t pos = 0;
    bool header = true;
    std::printf("%-12s %6s %5s %14s %10s %8s %9s\n", "variant", "n_pca", "bits", "bits/frame",
                "ratio", "f1", "loss%");
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        const std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        const auto fields = csi::split_csv_line(line);
        if (fields.size() != 7) throw csi::FormatError("malformed sweep CSV row: '" + line + "'");
        std::printf("%-12.*s %6.*s %5.*s %14.*s %10.*s %8.*s %9.*s\n",
                    (int)fields[0].size(), fields[0].data(), (int)fields[1].size(), fields[1].data(),
                    (int)fields[2].size(), fields[2].data(), (int)fields[3].size(), fields[3].data(),
                    (int)fields[4].size(), fields[4].data(), (int)fields[5].size(), fields[5].data(),
                    (int)fields[6].size(), fields[6].data());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wi-Fi CSI lossy compression and sensing toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    bool verbose = false;
    bool seed_given = false;
    app.add_flag("--verbose,-v", verbose, "verbose progress on stderr");
    app.add_option("--seed", seed, "seed for all randomness (default 0xC51; env CSI_SEED)")
        ->each([&](const std::string&) { seed_given = true; });

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    std::string gen_task, gen_out, gen_format = "binary";
    std::size_t gen_subcarriers = 0;
    double gen_rate = 0.0, gen_duration = 0.0;
    gen->add_option("--task", gen_task, "presence|activity")->required();
    gen->add_option("--out,-o", gen_out, "output dataset file")->required();
    gen->add_option("--format", gen_format, "csv|binary (default binary)");
    gen->add_option("--subcarriers", gen_subcarriers, "override subcarrier count");
    gen->add_option("--rate", gen_rate, "override frame rate (frames/s)");
    gen->add_option("--duration-s", gen_duration, "override duration per class (seconds)");

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "amplitude extraction and subcarrier filtering");
    std::string pre_in, pre_out, pre_drop, pre_format = "binary";
    bool pre_guards = false;
    pre->add_option("input", pre_in, "input dataset")->required();
    pre->add_option("--out,-o", pre_out, "output dataset file")->required();
    pre->add_flag("--default-guards", pre_guards, "drop the default 64-subcarrier guard set");
    pre->add_option("--drop", pre_drop, "drop subcarriers, e.g. 0-3,32,61-63");
    pre->add_option("--format", pre_format, "csv|binary (default binary)");

    // fit
    auto* fit = app.add_subcommand("fit", "fit a model and save it as a CSIM file");
    std::string fit_in, fit_out, fit_model;
    std::size_t fit_npca = 0, fit_epochs = 0;
    int fit_bits = 4;
    fit->add_option("input", fit_in, "input dataset")->required();
    fit->add_option("--model", fit_model, "pca|sq|vq|vae|normalizer")->required();
    fit->add_option("--out,-o", fit_out, "output model file")->required();
    fit->add_option("--n-pca", fit_npca, "PCA component count");
    fit->add_option("--bits", fit_bits, "quantizer bits (1..8)");
    fit->add_option("--epochs", fit_epochs, "VAE training epochs");

    // compress
    auto* comp = app.add_subcommand("compress", "compress a dataset into a CSIZ container");
    std::string comp_in, comp_out, comp_reuse;
    SchemeFlags comp_flags;
    bool comp_amortized = false;
    comp->add_option("input", comp_in, "input dataset")->required();
    comp->add_option("--out,-o", comp_out, "output container file")->required();
    comp->add_option("--scheme", comp_flags.scheme, "sq|vq|pca_sq|pca_vq|vae_sq|vae_vq")->required();
    comp->add_option("--bits", comp_flags.bits, "bits per value (SQ) or per frame (VQ)")->required();
    comp->add_option("--n-pca", comp_flags.n_pca, "PCA component count");
    comp->add_option("--reuse-models", comp_reuse, "take models from an existing container");
    comp->add_flag("--report-amortized", comp_amortized,
                   "also report bits/frame with container overhead amortized");

    // decompress
    auto* dec = app.add_subcommand("decompress", "decode a CSIZ container to a dataset");
    std::string dec_in, dec_out, dec_format = "binary";
    dec->add_option("input", dec_in, "input container")->required();
    dec->add_option("--out,-o", dec_out, "output dataset file")->required();
    dec->add_option("--format", dec_format, "csv|binary (default binary)");

    // classify
    auto* cls = app.add_subcommand("classify", "run one scheme through the sensing pipeline");
    std::string cls_in, cls_task, cls_classifier, cls_mode = "a";
    SchemeFlags cls_flags;
    cls->add_option("input", cls_in, "input dataset")->required();
    cls->add_option("--task", cls_task, "presence|activity")->required();
    cls->add_option("--classifier", cls_classifier, "threshold|mlp")->required();
    cls->add_option("--scheme", cls_flags.scheme, "scheme (default: uncompressed)");
    cls->add_option("--bits", cls_flags.bits, "quantizer bits");
    cls->add_option("--n-pca", cls_flags.n_pca, "PCA component count");
    cls->add_option("--mode", cls_mode, "a: train on uncompressed; b: train on compressed");

    // sweep
    auto* swp = app.add_subcommand("sweep", "evaluate the default scheme grid");
    std::string swp_in, swp_task, swp_classifier, swp_out = ".", swp_mode = "a", swp_grid = "default";
    std::size_t swp_jobs = 1;
    swp->add_option("input", swp_in, "input dataset")->required();
    swp->add_option("--task", swp_task, "presence|activity")->required();
    swp->add_option("--classifier", swp_classifier, "threshold|mlp")->required();
    swp->add_option("--out,-o", swp_out, "output directory (default .)");
    swp->add_option("--jobs", swp_jobs, "parallel cells (default 1)");
    swp->add_option("--mode", swp_mode, "a|b (default a)");
    swp->add_option("--grid", swp_grid, "grid name (default)");

    // report
    auto* rep = app.add_subcommand("report", "pretty-print a sweep CSV");
    std::string rep_in;
    rep->add_option("input", rep_in, "sweep.csv path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (!seed_given) seed = initial_seed();
        if (*gen)
            return cmd_gen(gen_task, seed, gen_out, gen_format, gen_subcarriers, gen_rate,
                           gen_duration, verbose);
        if (*pre) return cmd_preprocess(pre_in, pre_out, pre_guards, pre_drop, pre_format, verbose);
        if (*fit)
            return cmd_fit(fit_in, fit_model, fit_out, fit_npca, fit_bits, seed, fit_epochs,
                           verbose);
        if (*comp) return cmd_compress(comp_in, comp_out, comp_flags, seed, comp_reuse, comp_amortized);
        if (*dec) return cmd_decompress(dec_in, dec_out, dec_format);
        if (*cls) return cmd_classify(cls_in, cls_task, cls_classifier, cls_flags, seed, cls_mode);
        if (*swp) {
            if (swp_grid != "default") throw csi::ConfigError("unknown grid '" + swp_grid + "'");
            return cmd_sweep(swp_in, swp_task, swp_classifier, seed, swp_out, swp_jobs, swp_mode,
                             verbose);
        }
        if (*rep) return cmd_report(rep_in);
        std::fprintf(stderr, "error: no subcommand\n");
        return 1;
    } catch (const csi::TrainingError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const csi::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const csi::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
