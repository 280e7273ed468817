#include "drlearn/runner.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

using namespace drlearn;

namespace {

std::string fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "drlearn_runner" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(in) << "missing " << path;
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

ExperimentConfig synth_dnn_config(const std::string& out_dir) {
    ExperimentConfig config;
    config.kind = "train-dnn";
    config.synth = true;
    config.synth_per_class = 30;
    config.synth_classes = 3;
    config.synth_dim = 8;
    config.hidden_sizes = {6, 5};
    config.lr = 0.5;
    config.alpha = 5.0;
    config.decay = 0.9;
    config.epochs = 4;
    config.batch_size = 10;
    config.seed = 42;
    config.seed_set = true;
    config.out_dir = out_dir;
    return config;
}

} // namespace

TEST(Runner, SeedIsMandatory) {
    ExperimentConfig config = synth_dnn_config(fresh_dir("noseed"));
    config.seed_set = false;
    EXPECT_THROW(run(config), std::invalid_argument);
}

TEST(Runner, ComparisonEmitsBothArms) {
    const std::string out = fresh_dir("arms");
    const RunResult result = run(synth_dnn_config(out));
    EXPECT_EQ(result.arms.size(), 2u);
    EXPECT_TRUE(std::filesystem::exists(out + "/dnn_dr.csv"));
    EXPECT_TRUE(std::filesystem::exists(out + "/dnn_nodr.csv"));
    EXPECT_TRUE(std::filesystem::exists(out + "/dnn_dr.ckpt"));
    EXPECT_TRUE(std::filesystem::exists(out + "/summary.json"));
    EXPECT_EQ(result.curves.at("dnn_dr").rows.size(), 4u);
    EXPECT_EQ(result.curves.at("dnn_nodr").rows.size(), 4u);

    // both arms share the epoch grid and the no-DR arm reports zero DR value
    for (const auto& row : result.curves.at("dnn_nodr").rows) EXPECT_DOUBLE_EQ(row[2], 0.0);
}

TEST(Runner, RerunReproducesCsvByteIdentically) {
    const std::string out_a = fresh_dir("rerun_a");
    const std::string out_b = fresh_dir("rerun_b");
    ExperimentConfig config = synth_dnn_config(out_a);
    run(config);
    config.out_dir = out_b;
    run(config);
    EXPECT_EQ(read_bytes(out_a + "/dnn_dr.csv"), read_bytes(out_b + "/dnn_dr.csv"));
    EXPECT_EQ(read_bytes(out_a + "/dnn_nodr.csv"), read_bytes(out_b + "/dnn_nodr.csv"));
}

TEST(Runner, ComparisonArmsShareInitialCheckpoint) {
    // one-epoch runs expose the (nearly) initial parameters; with alpha = 0
    // for both arms the whole trajectory must coincide
    const std::string out = fresh_dir("shared_init");
    ExperimentConfig config = synth_dnn_config(out);
    config.alpha = 0.0;
    config.epochs = 1;
    run(config);
    // a single arm is emitted when alpha == 0 (the two would be identical)
    EXPECT_TRUE(std::filesystem::exists(out + "/dnn_nodr.ckpt"));
    EXPECT_FALSE(std::filesystem::exists(out + "/dnn_dr.ckpt"));
}

TEST(Runner, GlobalPairModeRuns) {
    const std::string out = fresh_dir("global_pairs");
    ExperimentConfig config = synth_dnn_config(out);
    config.global_pairs = 500;
    const RunResult result = run(config);
    EXPECT_EQ(result.exit_code, 0);
    // some batches contain both endpoints of some global pair
    double dr_total = 0.0;
    for (const auto& row : result.curves.at("dnn_dr").rows) dr_total += row[2];
    EXPECT_GT(dr_total, 0.0);
}

TEST(Runner, PretrainDbnEmitsLayerCurvesAndFinetune) {
    const std::string out = fresh_dir("dbn");
    ExperimentConfig config;
    config.kind = "pretrain-dbn";
    config.synth = true;
    config.synth_per_class = 20;
    config.synth_classes = 2;
    config.synth_dim = 6;
    config.binarize_threshold = 0.5;
    config.hidden_sizes = {5, 4};
    config.lr = 0.05;
    config.alpha = 10.0;
    config.k = 1;
    config.epochs = 2;
    config.batch_size = 10;
    config.finetune_epochs = 2;
    config.seed = 7;
    config.seed_set = true;
    config.out_dir = out;

    const RunResult result = run(config);
    for (const char* name : {"dbn_dr_layer0.csv", "dbn_dr_layer1.csv", "dbn_nodr_layer0.csv",
                             "dbn_nodr_layer1.csv", "finetune_dr.csv", "finetune_nodr.csv",
                             "dbn_dr.ckpt", "finetune_dr.ckpt"})
        EXPECT_TRUE(std::filesystem::exists(out + "/" + name)) << name;
    EXPECT_EQ(result.curves.at("finetune_dr").rows.size(), 2u);

    // the two arms fine-tune from different pretrained weights but identical
    // head init; their curves exist on the same epoch grid
    EXPECT_EQ(result.curves.at("finetune_dr").rows.size(),
              result.curves.at("finetune_nodr").rows.size());
}

TEST(Runner, TrainVaeEmitsManifoldAndCurves) {
    const std::string out = fresh_dir("vae");
    ExperimentConfig config;
    config.kind = "train-vae";
    config.synth = true;
    config.synth_per_class = 20;
    config.synth_classes = 2;
    config.synth_dim = 9;
    config.binarize_threshold = 0.5;
    config.lr = 0.05;
    config.alpha = 1.0;
    config.vae_mode = "ce";
    config.vae_hidden = 8;
    config.latent_dim = 2;
    config.epochs = 2;
    config.batch_size = 10;
    config.grid_steps = 4;
    config.seed = 9;
    config.seed_set = true;
    config.out_dir = out;

    const RunResult result = run(config);
    EXPECT_EQ(result.exit_code, 0);
    for (const char* name : {"vae_dr.csv", "vae_nodr.csv", "vae_dr.ckpt", "vae_dr_manifold.pgm",
                             "vae_nodr_manifold.pgm"})
        EXPECT_TRUE(std::filesystem::exists(out + "/" + name)) << name;

    // P5, 4 tiles of 3x3 -> 12x12 raster
    std::ifstream pgm(out + "/vae_dr_manifold.pgm", std::ios::binary);
    std::string magic, dims;
    std::getline(pgm, magic);
    std::getline(pgm, dims);
    EXPECT_EQ(magic, "P5");
    EXPECT_EQ(dims, "12 12");
}

TEST(Runner, GradcheckCommandReportsSuccess) {
    ExperimentConfig config;
    config.kind = "gradcheck";
    config.gradcheck_instances = 5;
    config.seed = 11;
    config.seed_set = true;
    config.out_dir = "";
    const RunResult result = run(config);
    EXPECT_EQ(result.exit_code, 0);
}

TEST(Runner, PairStatsMatchesExpectation) {
    Rng rng(13);
    const double mean = simulate_pair_stats(10, 10, 20000, rng);
    EXPECT_NEAR(mean, 40.5, 0.5); // 45 * (1 - 1/10)
}

TEST(Runner, MissingDatasetFilesRejected) {
    ExperimentConfig config = synth_dnn_config(fresh_dir("missing"));
    config.synth = false;
    EXPECT_THROW(run(config), std::invalid_argument);
}
