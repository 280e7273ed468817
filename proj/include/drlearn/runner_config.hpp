#ifndef DRLEARN_RUNNER_CONFIG_HPP
#define DRLEARN_RUNNER_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace drlearn {

/// Everything one experiment invocation needs. Defaults follow the documented
/// experiment configurations; the CLI exposes each field as a flag and a
/// key=value config-file entry.
struct ExperimentConfig {
    std::string kind; // pretrain-dbn | train-dnn | train-vae | gradcheck | pairs-stats

    // dataset: IDX file paths (resolved against data_root or $DRLEARN_DATA
    // when relative), or synthetic blobs
    std::string train_images, train_labels, test_images, test_labels;
    std::string data_root;
    bool synth = false;
    std::size_t synth_per_class = 50;
    int synth_classes = 4;
    std::size_t synth_dim = 16;
    double synth_separation = 3.0;
    std::size_t train_limit = 0; // 0 = use everything
    std::size_t test_limit = 0;
    double binarize_threshold = -1.0; // < 0 = leave gray values

    // architecture
    std::vector<std::size_t> hidden_sizes; // dbn rbm sizes / dnn hidden widths
    std::size_t vae_hidden = 600;
    std::size_t latent_dim = 2;

    // optimization
    double lr = 0.01;
    double alpha = 0.0;
    double decay = 1.0; // per-epoch multiplicative alpha decay (dnn)
    int k = 1;          // Gibbs steps
    int epochs = 100;
    std::size_t batch_size = 10;
    double omega = 0.0; // optional parameter-norm coefficient, off by default
    std::uint64_t seed = 0;
    bool seed_set = false; // every run must state its seed explicitly

    // dnn side information: 0 = pairs from each mini-batch; > 0 = this many
    // globally pre-sampled pairs, of which a batch uses those fully inside it
    std::size_t global_pairs = 0;

    // vae
    std::string vae_mode = "ce"; // none | ce | l2
    double grid_lo = -6.0;
    double grid_hi = 6.0;
    std::size_t grid_steps = 20;

    // dbn fine-tuning
    double finetune_lr = 0.01;
    int finetune_epochs = 50;
    std::size_t finetune_batch = 10;

    // comparison protocol: run the with-DR and the no-DR arm from identical
    // initial parameters and rng streams
    bool compare = true;

    // gradcheck / pairs-stats
    int gradcheck_instances = 100;
    int pairs_classes = 10;
    int pairs_batches = 10000;

    std::string out_dir = "out";
};

inline void validate(const ExperimentConfig& config) {
    if (!config.seed_set) throw std::invalid_argument("config: seed is mandatory (no unseeded runs)");
    if (config.kind.empty()) throw std::invalid_argument("config: experiment kind is required");
    if (!(config.lr > 0.0)) throw std::invalid_argument("config: lr must be positive");
    if (config.alpha < 0.0) throw std::invalid_argument("config: alpha must be >= 0");
    if (config.decay <= 0.0 || config.decay > 1.0)
        throw std::invalid_argument("config: decay must be in (0,1]");
    if (config.epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (config.batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (config.k < 1) throw std::invalid_argument("config: k must be >= 1");
    const bool needs_arch = config.kind == "pretrain-dbn" || config.kind == "train-dnn";
    if (needs_arch && config.hidden_sizes.empty())
        throw std::invalid_argument("config: " + config.kind + " needs --hidden sizes");
    const bool needs_data =
        config.kind == "pretrain-dbn" || config.kind == "train-dnn" || config.kind == "train-vae";
    if (needs_data && !config.synth && (config.train_images.empty() || config.train_labels.empty()))
        throw std::invalid_argument("config: dataset files (or --synth) required for " + config.kind);
    const bool needs_test = config.kind == "pretrain-dbn" || config.kind == "train-dnn";
    if (needs_test && !config.synth && (config.test_images.empty() || config.test_labels.empty()))
        throw std::invalid_argument("config: test dataset files required for " + config.kind);
    if (config.kind == "train-vae" && config.vae_mode != "none" && config.vae_mode != "ce" &&
        config.vae_mode != "l2")
        throw std::invalid_argument("config: vae_mode must be none, ce or l2");
}

} // namespace drlearn

#endif
