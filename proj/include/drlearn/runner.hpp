#ifndef DRLEARN_RUNNER_HPP
#define DRLEARN_RUNNER_HPP

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "drlearn/checkpoint.hpp"
#include "drlearn/curve.hpp"
#include "drlearn/dataset.hpp"
#include "drlearn/dbn.hpp"
#include "drlearn/gradcheck.hpp"
#include "drlearn/mlp.hpp"
#include "drlearn/pgm.hpp"
#include "drlearn/rbm.hpp"
#include "drlearn/runner_config.hpp"
#include "drlearn/sideinfo.hpp"
#include "drlearn/vae.hpp"

namespace drlearn {

struct ArmSummary {
    double seconds = 0.0;
    double final_metric = 0.0; // test error (dnn/dbn) or mean elbo (vae)
};

struct RunResult {
    int exit_code = 0;
    std::map<std::string, ArmSummary> arms;
    std::map<std::string, LearningCurve> curves; // keyed by output file stem
};

namespace runner_detail {

inline std::string resolve_path(const std::string& path, const std::string& data_root) {
    if (path.empty() || std::filesystem::path(path).is_absolute()) return path;
    std::string root = data_root;
    if (root.empty()) {
        if (const char* env = std::getenv("DRLEARN_DATA")) root = env;
    }
    if (root.empty()) return path;
    return (std::filesystem::path(root) / path).string();
}

inline LabeledDataset load_configured(const ExperimentConfig& config, bool train) {
    LabeledDataset ds;
    if (config.synth) {
        Rng rng(config.seed + (train ? 17 : 43));
        ds = synth_blobs(config.synth_per_class, config.synth_classes, config.synth_dim,
                         config.synth_separation, rng);
        ds = shuffled(ds, rng);
    } else {
        const std::string images = resolve_path(train ? config.train_images : config.test_images,
                                                config.data_root);
        const std::string labels = resolve_path(train ? config.train_labels : config.test_labels,
                                                config.data_root);
        ds = load_idx(images, labels);
    }
    const std::size_t limit = train ? config.train_limit : config.test_limit;
    if (limit > 0 && limit < ds.size()) ds = slice(ds, 0, limit);
    if (config.binarize_threshold >= 0.0) ds = binarize(ds, config.binarize_threshold);
    return ds;
}

inline std::string arm_name(double alpha) { return alpha != 0.0 ? "dr" : "nodr"; }

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

inline void write_summary(const ExperimentConfig& config, const RunResult& result) {
    // wall-clock lives here, outside the byte-reproducible CSVs
    std::ofstream out(std::filesystem::path(config.out_dir) / "summary.json");
    out << "{\n  \"kind\": \"" << config.kind << "\",\n  \"seed\": " << config.seed << ",\n  \"arms\": {";
    bool first = true;
    for (const auto& [name, arm] : result.arms) {
        if (!first) out << ",";
        first = false;
        out << "\n    \"" << name << "\": { \"seconds\": " << arm.seconds
            << ", \"final_metric\": " << arm.final_metric << " }";
    }
    out << "\n  }\n}\n";
}

/// Mini-batches of one epoch: per-epoch shuffled index blocks.
inline std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                           Rng& rng) {
    const auto order = shuffled_indices(n, rng);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t count = std::min(batch_size, n - start);
        batches.emplace_back(order.begin() + start, order.begin() + start + count);
    }
    return batches;
}

/// Split a dataset-indexed PairSet into per-batch PairSets with batch-local
/// positions. Precomputed once per epoch.
inline std::vector<PairSet> pairs_per_batch(const PairSet& global,
                                            const std::vector<std::vector<std::size_t>>& batches,
                                            std::size_t n_examples) {
    std::vector<std::uint32_t> batch_of(n_examples, std::uint32_t(-1));
    std::vector<std::uint32_t> position_of(n_examples, 0);
    for (std::size_t b = 0; b < batches.size(); ++b)
        for (std::size_t pos = 0; pos < batches[b].size(); ++pos) {
            batch_of[batches[b][pos]] = std::uint32_t(b);
            position_of[batches[b][pos]] = std::uint32_t(pos);
        }
    std::vector<PairSet> per_batch(batches.size());
    for (const auto& [p, q] : global.pairs)
        if (batch_of[p] != std::uint32_t(-1) && batch_of[p] == batch_of[q])
            per_batch[batch_of[p]].pairs.emplace_back(position_of[p], position_of[q]);
    return per_batch;
}

inline Matrix gather_rows(const Matrix& data, const std::vector<std::size_t>& indices) {
    Matrix out(indices.size(), data.cols());
    for (std::size_t k = 0; k < indices.size(); ++k)
        std::copy(data.row(indices[k]), data.row(indices[k]) + data.cols(), out.row(k));
    return out;
}

inline std::vector<int> gather_labels(const std::vector<int>& labels,
                                      const std::vector<std::size_t>& indices) {
    std::vector<int> out(indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k) out[k] = labels[indices[k]];
    return out;
}

/// One full train-dnn arm; identical rng stream for both arms, only alpha
/// differs.
inline LearningCurve run_dnn_arm(Mlp model, const LabeledDataset& train, const LabeledDataset& test,
                                 const ExperimentConfig& config, double alpha, ArmSummary& summary,
                                 const std::string& ckpt_path) {
    Timer timer;
    Rng rng(config.seed);
    DrSchedule schedule;
    schedule.alpha0 = alpha;
    schedule.decay = config.decay;
    // per-batch pair counts vary (especially with a pre-sampled global set);
    // normalizing by the batch's ordered pair slots keeps alpha's meaning
    // stable across batch compositions
    schedule.pair_norm = PairTermNorm::kBatchSquare;

    PairSet global;
    if (config.global_pairs > 0) {
        Rng pair_rng = Rng::derive(config.seed, 1);
        global = sample_global_pairs(train.labels, config.global_pairs, pair_rng);
    }

    LearningCurve curve;
    curve.columns = {"epoch", "effective_alpha", "dr_value", "cost", "test_error"};
    const bool use_pairs = alpha != 0.0;
    double test_error = 1.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto batches = epoch_batches(train.size(), config.batch_size, rng);
        std::vector<PairSet> batch_pairs;
        if (use_pairs && config.global_pairs > 0)
            batch_pairs = pairs_per_batch(global, batches, train.size());

        double cost_sum = 0.0, dr_sum = 0.0;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const Matrix batch = gather_rows(train.inputs, batches[b]);
            const std::vector<int> labels = gather_labels(train.labels, batches[b]);
            PairSet pairs;
            if (use_pairs)
                pairs = config.global_pairs > 0 ? std::move(batch_pairs[b]) : pairs_from_batch(labels);
            const MlpStepMetrics metrics =
                backprop_step(model, batch, labels, pairs, schedule, epoch, config.lr, config.omega);
            cost_sum += metrics.cost;
            dr_sum += metrics.dr_value;
        }
        test_error = evaluate(model, test.inputs, test.labels);
        curve.add_row({double(epoch), schedule.alpha0 * std::pow(schedule.decay, epoch),
                       dr_sum / double(batches.size()), cost_sum / double(batches.size()), test_error});
    }
    checkpoint::save(model, ckpt_path);
    summary.seconds = timer.seconds();
    summary.final_metric = test_error;
    return curve;
}

inline LearningCurve finetune_arm(Mlp& model, const LabeledDataset& train, const LabeledDataset& test,
                                  const ExperimentConfig& config, Rng& rng) {
    LearningCurve curve;
    curve.columns = {"epoch", "cost", "test_error"};
    const DrSchedule no_dr; // fine-tuning never applies DR
    for (int epoch = 0; epoch < config.finetune_epochs; ++epoch) {
        const auto batches = epoch_batches(train.size(), config.finetune_batch, rng);
        double cost_sum = 0.0;
        for (const auto& indices : batches) {
            const Matrix batch = gather_rows(train.inputs, indices);
            const std::vector<int> labels = gather_labels(train.labels, indices);
            const MlpStepMetrics metrics =
                backprop_step(model, batch, labels, PairSet{}, no_dr, epoch, config.finetune_lr);
            cost_sum += metrics.cost;
        }
        curve.add_row({double(epoch), cost_sum / double(batches.size()),
                       evaluate(model, test.inputs, test.labels)});
    }
    return curve;
}

} // namespace runner_detail

inline RunResult run_train_dnn(const ExperimentConfig& config) {
    using namespace runner_detail;
    const LabeledDataset train = load_configured(config, true);
    const LabeledDataset test = load_configured(config, false);

    std::vector<std::size_t> sizes;
    sizes.push_back(train.dim());
    sizes.insert(sizes.end(), config.hidden_sizes.begin(), config.hidden_sizes.end());
    sizes.push_back(std::size_t(train.n_classes));

    Rng init_rng = Rng::derive(config.seed, 0);
    const Mlp init = make_mlp(sizes, init_rng, 0.1);

    RunResult result;
    std::vector<double> alphas;
    if (config.compare) {
        alphas = {config.alpha, 0.0};
        if (config.alpha == 0.0) alphas = {0.0};
    } else {
        alphas = {config.alpha};
    }
    for (double alpha : alphas) {
        const std::string name = arm_name(alpha);
        ArmSummary summary;
        LearningCurve curve = run_dnn_arm(init, train, test, config, alpha, summary,
                                          (std::filesystem::path(config.out_dir) / ("dnn_" + name + ".ckpt"))
                                              .string());
        write_csv(curve, (std::filesystem::path(config.out_dir) / ("dnn_" + name + ".csv")).string());
        result.curves["dnn_" + name] = std::move(curve);
        result.arms[name] = summary;
    }
    return result;
}

inline RunResult run_pretrain_dbn(const ExperimentConfig& config) {
    using namespace runner_detail;
    const LabeledDataset train = load_configured(config, true);
    const LabeledDataset test = load_configured(config, false);

    RunResult result;
    std::vector<double> alphas = config.compare && config.alpha != 0.0
                                     ? std::vector<double>{config.alpha, 0.0}
                                     : std::vector<double>{config.alpha};
    for (double alpha : alphas) {
        const std::string name = arm_name(alpha);
        Timer timer;
        Rng rng(config.seed);
        PretrainResult pretrained =
            pretrain_layerwise(train.inputs, train.labels, config.hidden_sizes, config.lr, alpha,
                               config.k, config.epochs, config.batch_size, rng);
        for (std::size_t layer = 0; layer < pretrained.curves.size(); ++layer) {
            const std::string stem = "dbn_" + name + "_layer" + std::to_string(layer);
            write_csv(pretrained.curves[layer],
                      (std::filesystem::path(config.out_dir) / (stem + ".csv")).string());
            result.curves[stem] = std::move(pretrained.curves[layer]);
        }
        checkpoint::save(pretrained.stack,
                         (std::filesystem::path(config.out_dir) / ("dbn_" + name + ".ckpt")).string());

        // head init and fine-tuning consume a stream independent of how
        // pretraining used rng, so both arms fine-tune identically-driven
        Rng head_rng = Rng::derive(config.seed, 2);
        Mlp classifier = export_mlp(pretrained.stack, std::size_t(train.n_classes), head_rng);
        Rng finetune_rng = Rng::derive(config.seed, 3);
        LearningCurve finetune = finetune_arm(classifier, train, test, config, finetune_rng);
        checkpoint::save(classifier,
                         (std::filesystem::path(config.out_dir) / ("finetune_" + name + ".ckpt")).string());
        write_csv(finetune,
                  (std::filesystem::path(config.out_dir) / ("finetune_" + name + ".csv")).string());

        ArmSummary summary;
        summary.seconds = timer.seconds();
        summary.final_metric = finetune.rows.empty() ? 1.0 : finetune.rows.back().back();
        result.curves["finetune_" + name] = std::move(finetune);
        result.arms[name] = summary;
    }
    return result;
}

inline RunResult run_train_vae(const ExperimentConfig& config) {
    using namespace runner_detail;
    LabeledDataset train = load_configured(config, true);

    RunResult result;
    struct ArmSpec {
        std::string name;
        double alpha;
        VaeDrMode mode;
    };
    const VaeDrMode mode = config.vae_mode == "ce"   ? VaeDrMode::kCrossEntropy
                           : config.vae_mode == "l2" ? VaeDrMode::kL2
                                                     : VaeDrMode::kNone;
    std::vector<ArmSpec> arms;
    const bool dr_active = mode != VaeDrMode::kNone && config.alpha != 0.0;
    if (dr_active) arms.push_back({"dr", config.alpha, mode});
    if (!dr_active || config.compare) arms.push_back({"nodr", 0.0, VaeDrMode::kNone});

    for (const auto& arm : arms) {
        Timer timer;
        Rng init_rng = Rng::derive(config.seed, 0);
        VaeModel model = make_vae(train.dim(), config.vae_hidden, config.latent_dim, init_rng);
        Rng rng(config.seed);
        LearningCurve curve = train_vae(model, train.inputs, train.labels, config.lr, config.epochs,
                                        config.batch_size, arm.alpha, arm.mode, rng);

        const std::string stem = "vae_" + arm.name;
        write_csv(curve, (std::filesystem::path(config.out_dir) / (stem + ".csv")).string());
        checkpoint::save(model, (std::filesystem::path(config.out_dir) / (stem + ".ckpt")).string());
        if (config.latent_dim == 2) {
            const Matrix grid = manifold_grid(model, config.grid_lo, config.grid_hi, config.grid_steps);
            write_pgm_grid(grid, config.grid_steps,
                           (std::filesystem::path(config.out_dir) / (stem + "_manifold.pgm")).string());
        }

        ArmSummary summary;
        summary.seconds = timer.seconds();
        summary.final_metric = curve.rows.empty() ? 0.0 : curve.rows.back()[1];
        result.curves[stem] = std::move(curve);
        result.arms[arm.name] = summary;
    }
    return result;
}

inline RunResult run_gradcheck(const ExperimentConfig& config, std::FILE* out = stdout) {
    RunResult result;
    const auto battery = gradcheck::run_battery(config.gradcheck_instances, config.seed);
    for (const auto& check : battery) {
        std::fprintf(out, "[gradcheck] %-32s max rel err %.3e (tol %.0e, %d instances) %s\n",
                     check.name.c_str(), check.max_rel_error, check.tolerance, check.instances,
                     check.passed() ? "OK" : "FAIL");
        if (!check.passed()) result.exit_code = 1;
    }
    return result;
}

/// Mean different-class pair count over simulated uniform-class batches.
inline double simulate_pair_stats(std::size_t batch_size, int n_classes, int n_batches, Rng& rng) {
    double total = 0.0;
    for (int b = 0; b < n_batches; ++b) {
        std::vector<int> labels(batch_size);
        for (auto& label : labels) label = int(rng.uniform_index(std::uint64_t(n_classes)));
        total += double(pairs_from_batch(labels).size());
    }
    return total / double(n_batches);
}

inline RunResult run_pairs_stats(const ExperimentConfig& config, std::FILE* out = stdout) {
    Rng rng(config.seed);
    const double mean =
        simulate_pair_stats(config.batch_size, config.pairs_classes, config.pairs_batches, rng);
    std::fprintf(out, "[pairs-stats] batch_size=%zu classes=%d batches=%d mean_pairs=%.4f\n",
                 config.batch_size, config.pairs_classes, config.pairs_batches, mean);
    return {};
}

/// Dispatch on config.kind; writes artifacts under config.out_dir.
inline RunResult run(const ExperimentConfig& config) {
    validate(config);
    if (!config.out_dir.empty()) std::filesystem::create_directories(config.out_dir);

    RunResult result;
    if (config.kind == "train-dnn") result = run_train_dnn(config);
    else if (config.kind == "pretrain-dbn") result = run_pretrain_dbn(config);
    else if (config.kind == "train-vae") result = run_train_vae(config);
    else if (config.kind == "gradcheck") result = run_gradcheck(config);
    else if (config.kind == "pairs-stats") result = run_pairs_stats(config);
    else throw std::invalid_argument("unknown experiment kind: " + config.kind);

    if (!config.out_dir.empty() && !result.arms.empty()) runner_detail::write_summary(config, result);
    return result;
}

} // namespace drlearn

#endif
