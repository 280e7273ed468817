// Experiment runner for diversifying-regularization training: DBN
// pretraining, sigmoid-network classification, and VAEs, with a gradient
// verification command and side-information statistics.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "drlearn/runner.hpp"

namespace {

void add_common_options(CLI::App* cmd, drlearn::ExperimentConfig& config) {
    cmd->add_option("--seed", config.seed, "rng seed (mandatory)")->required();
    cmd->add_option("--out", config.out_dir, "output directory");
    cmd->add_option("--lr", config.lr, "learning rate");
    cmd->add_option("--alpha", config.alpha, "diversifying trade-off");
    cmd->add_option("--epochs", config.epochs, "training epochs");
    cmd->add_option("--batch-size", config.batch_size, "mini-batch size");
    cmd->add_flag("--compare,!--no-compare", config.compare,
                  "run both the with-DR and the no-DR arm from identical initialization");
}

void add_dataset_options(CLI::App* cmd, drlearn::ExperimentConfig& config) {
    cmd->add_option("--train-images", config.train_images, "IDX image file (train)");
    cmd->add_option("--train-labels", config.train_labels, "IDX label file (train)");
    cmd->add_option("--test-images", config.test_images, "IDX image file (test)");
    cmd->add_option("--test-labels", config.test_labels, "IDX label file (test)");
    cmd->add_option("--data-root", config.data_root,
                    "prefix for relative dataset paths (default: $DRLEARN_DATA)");
    cmd->add_option("--train-limit", config.train_limit, "use only the first N training examples");
    cmd->add_option("--test-limit", config.test_limit, "use only the first N test examples");
    cmd->add_option("--binarize", config.binarize_threshold, "threshold inputs to {0,1}");
    cmd->add_flag("--synth", config.synth, "synthetic blob dataset instead of files");
    cmd->add_option("--synth-per-class", config.synth_per_class);
    cmd->add_option("--synth-classes", config.synth_classes);
    cmd->add_option("--synth-dim", config.synth_dim);
    cmd->add_option("--synth-separation", config.synth_separation);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"drlearn: diversifying regularization for RBM/DBN, DNN and VAE training"};
    app.set_config("--config", "", "flat key=value config file; flags override it");
    app.require_subcommand(1);

    drlearn::ExperimentConfig config;

    auto* dbn = app.add_subcommand("pretrain-dbn",
                                   "greedy layer-wise RBM pretraining with DR, then fine-tuning");
    add_common_options(dbn, config);
    add_dataset_options(dbn, config);
    dbn->add_option("--hidden", config.hidden_sizes, "stack sizes, e.g. --hidden 64 32 16")->required();
    dbn->add_option("--cd-k", config.k, "Gibbs steps for contrastive divergence");
    dbn->add_option("--finetune-lr", config.finetune_lr);
    dbn->add_option("--finetune-epochs", config.finetune_epochs);
    dbn->add_option("--finetune-batch", config.finetune_batch);

    auto* dnn = app.add_subcommand("train-dnn", "backpropagation with per-layer DR distances");
    add_common_options(dnn, config);
    add_dataset_options(dnn, config);
    dnn->add_option("--hidden", config.hidden_sizes, "hidden widths, e.g. --hidden 30 30 30 20 20")
        ->required();
    dnn->add_option("--decay", config.decay, "per-epoch multiplicative alpha decay");
    dnn->add_option("--global-pairs", config.global_pairs,
                    "pre-sample this many different-class pairs once (0 = per-batch pairs)");
    dnn->add_option("--omega", config.omega, "optional parameter-norm coefficient");

    auto* vae = app.add_subcommand("train-vae", "variational autoencoder with reconstruction-level DR");
    add_common_options(vae, config);
    add_dataset_options(vae, config);
    vae->add_option("--vae-hidden", config.vae_hidden, "encoder/decoder hidden width");
    vae->add_option("--latent-dim", config.latent_dim);
    vae->add_option("--mode", config.vae_mode, "DR variant: none | ce | l2");
    vae->add_option("--grid-lo", config.grid_lo);
    vae->add_option("--grid-hi", config.grid_hi);
    vae->add_option("--grid-steps", config.grid_steps);

    auto* gradcheck = app.add_subcommand("gradcheck", "verify every analytic gradient against the "
                                                      "finite-difference oracle; nonzero exit on failure");
    gradcheck->add_option("--seed", config.seed, "rng seed (mandatory)")->required();
    gradcheck->add_option("--instances", config.gradcheck_instances, "random instances per check");

    auto* pairs = app.add_subcommand("pairs-stats", "mean different-class pair count per batch");
    pairs->add_option("--seed", config.seed, "rng seed (mandatory)")->required();
    pairs->add_option("--batch-size", config.batch_size);
    pairs->add_option("--classes", config.pairs_classes);
    pairs->add_option("--batches", config.pairs_batches);

    CLI11_PARSE(app, argc, argv);
    config.kind = app.get_subcommands().front()->get_name();
    config.seed_set = true;

    try {
        const drlearn::RunResult result = drlearn::run(config);
        return result.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
