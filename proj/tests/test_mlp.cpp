#include "drlearn/mlp.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "drlearn/gradcheck.hpp"

using namespace drlearn;

namespace {

Mlp zero_mlp(const std::vector<std::size_t>& sizes) {
    Rng rng(1);
    Mlp model = make_mlp(sizes, rng, 0.0);
    return model;
}

} // namespace

TEST(Forward, ZeroParametersGiveHalfActivationsAndUniformOutput) {
    const Mlp model = zero_mlp({6, 4, 3, 10});
    Vector x = {0.1, 0.9, 0.3, 0.0, 1.0, 0.5};
    const MlpActivations acts = forward(model, x);
    ASSERT_EQ(acts.hidden.size(), 2u);
    for (const auto& h : acts.hidden)
        for (double v : h) EXPECT_DOUBLE_EQ(v, 0.5);
    for (double v : acts.output) EXPECT_NEAR(v, 0.1, 1e-12);
}

TEST(Forward, OutputIsNormalized) {
    Rng rng(2);
    const Mlp model = make_mlp({5, 4, 3}, rng, 0.5);
    for (int i = 0; i < 100; ++i) {
        Vector x(5);
        for (double& v : x) v = rng.uniform();
        const MlpActivations acts = forward(model, x);
        double sum = 0.0;
        for (double v : acts.output) sum += v;
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(Forward, SingleLayerReducesToSoftmaxRegression) {
    Rng rng(3);
    const Mlp model = make_mlp({4, 3}, rng, 0.7);
    Vector x = {0.2, -0.4, 0.9, 0.1};
    const MlpActivations acts = forward(model, x);
    Vector logits = model.layers[0].bias;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) logits[j] += x[i] * model.layers[0].weights(i, j);
    softmax_inplace(logits);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(acts.output[j], logits[j], 1e-12);
}

TEST(DrLayerPenalty, KnownValues) {
    EXPECT_DOUBLE_EQ(dr_layer_penalty({0.3, 0.7}, {0.3, 0.7}), 0.0);
    EXPECT_DOUBLE_EQ(dr_layer_penalty({1.0, 0.0}, {0.0, 1.0}), 2.0);
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        Vector a = {rng.uniform(), rng.uniform()};
        Vector b = {rng.uniform(), rng.uniform()};
        EXPECT_DOUBLE_EQ(dr_layer_penalty(a, b), dr_layer_penalty(b, a));
    }
    EXPECT_THROW(dr_layer_penalty({1.0}, {1.0, 2.0}), std::invalid_argument);
}

TEST(DrScheduleTest, GeometricDecay) {
    DrSchedule schedule;
    schedule.alpha0 = 50.0;
    schedule.decay = 0.9;
    EXPECT_DOUBLE_EQ(schedule.alpha_at(0, 0), 50.0);
    EXPECT_DOUBLE_EQ(schedule.alpha_at(1, 0), 45.0);
    EXPECT_NEAR(schedule.alpha_at(2, 0), 40.5, 1e-12);
    schedule.per_layer_scale = {1.0, 2.0};
    EXPECT_DOUBLE_EQ(schedule.alpha_at(0, 1), 100.0);
}

TEST(Objective, ZeroScheduleIsPlainCrossEntropy) {
    Rng rng(5);
    const Mlp model = make_mlp({3, 4, 2}, rng, 0.5);
    Matrix batch(2, 3);
    for (std::size_t i = 0; i < batch.size(); ++i) batch.data()[i] = rng.uniform();
    const std::vector<int> labels = {0, 1};
    const PairSet pairs = pairs_from_batch(labels);

    const double j = objective(model, batch, labels, pairs, DrSchedule{}, 0);
    double expected = 0.0;
    for (std::size_t row = 0; row < 2; ++row) {
        const MlpActivations acts = forward(model, std::span(batch.row(row), batch.cols()));
        expected -= std::log(acts.output[std::size_t(labels[row])]);
    }
    EXPECT_NEAR(j, expected, 1e-10);
}

TEST(Objective, DrTermSubtractsScaledDistances) {
    Rng rng(6);
    const Mlp model = make_mlp({3, 4, 2}, rng, 0.5);
    Matrix batch(2, 3);
    for (std::size_t i = 0; i < batch.size(); ++i) batch.data()[i] = rng.uniform();
    const std::vector<int> labels = {0, 1};
    const PairSet pairs = pairs_from_batch(labels);
    DrSchedule schedule;
    schedule.alpha0 = 2.0;

    const double without = objective(model, batch, labels, pairs, DrSchedule{}, 0);
    const double with_dr = objective(model, batch, labels, pairs, schedule, 0);
    const MlpActivations a0 = forward(model, std::span(batch.row(0), batch.cols()));
    const MlpActivations a1 = forward(model, std::span(batch.row(1), batch.cols()));
    const double distance = dr_layer_penalty(a0.hidden[0], a1.hidden[0]);
    EXPECT_NEAR(with_dr, without - 2.0 * distance, 1e-10);
}

TEST(BackpropStep, MatchesFiniteDifferences) {
    Rng rng(7);
    const auto result = gradcheck::check_mlp_gradient(30, rng, 1e-4);
    EXPECT_TRUE(result.passed()) << result.name << " max rel err " << result.max_rel_error;
}

TEST(BackpropStep, ZeroAlphaMatchesPlainBackpropBitForBit) {
    Rng init_a(8), init_b(8);
    Mlp with_dr = make_mlp({4, 3, 2}, init_a, 0.1);
    Mlp plain = make_mlp({4, 3, 2}, init_b, 0.1);

    Rng data_rng(9);
    Matrix batch(6, 4);
    for (std::size_t i = 0; i < batch.size(); ++i) batch.data()[i] = data_rng.uniform();
    const std::vector<int> labels = {0, 1, 0, 1, 1, 0};
    const PairSet pairs = pairs_from_batch(labels);

    DrSchedule zeroed;
    zeroed.alpha0 = 0.0;
    for (int step = 0; step < 10; ++step) {
        backprop_step(with_dr, batch, labels, pairs, zeroed, step, 1.0);
        backprop_step(plain, batch, labels, PairSet{}, DrSchedule{}, step, 1.0);
    }
    for (std::size_t l = 0; l < plain.layers.size(); ++l) {
        EXPECT_TRUE(with_dr.layers[l].weights == plain.layers[l].weights);
        EXPECT_EQ(with_dr.layers[l].bias, plain.layers[l].bias);
    }
}

TEST(Evaluate, TieBreaksTowardLowestClassIndex) {
    // zero parameters emit a uniform distribution, so every prediction is
    // class 0 and the error is 1 - frequency(class 0)
    const Mlp model = zero_mlp({3, 4});
    Matrix inputs(4, 3);
    const std::vector<int> labels = {0, 1, 2, 0};
    EXPECT_DOUBLE_EQ(evaluate(model, inputs, labels), 0.5);
}

TEST(Evaluate, PerfectMemorizationScoresZero) {
    Rng rng(10);
    Matrix inputs(2, 2);
    inputs(0, 0) = 1.0;
    inputs(1, 1) = 1.0;
    const std::vector<int> labels = {0, 1};
    Mlp model = make_mlp({2, 2}, rng, 0.0);
    model.layers[0].weights(0, 0) = 10.0;
    model.layers[0].weights(1, 1) = 10.0;
    EXPECT_DOUBLE_EQ(evaluate(model, inputs, labels), 0.0);
}

TEST(Evaluate, ArgmaxInvariantUnderLogitShift) {
    Rng rng(11);
    Mlp model = make_mlp({3, 5}, rng, 0.5);
    Matrix inputs(20, 3);
    for (std::size_t i = 0; i < inputs.size(); ++i) inputs.data()[i] = rng.uniform();
    std::vector<int> labels(20);
    for (auto& label : labels) label = int(rng.uniform_index(5));
    const double base = evaluate(model, inputs, labels);
    for (double& b : model.layers[0].bias) b += 7.5; // constant shift of all logits
    EXPECT_DOUBLE_EQ(evaluate(model, inputs, labels), base);
}

TEST(CrossEntropyProperties, NonNegativeAndZeroOnlyAtCertainty) {
    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        Matrix batch(1, 2);
        batch(0, 0) = rng.uniform();
        batch(0, 1) = rng.uniform();
        const Mlp model = make_mlp({2, 3}, rng, 1.0);
        const std::vector<int> labels = {int(rng.uniform_index(3))};
        const double j = objective(model, batch, labels, PairSet{}, DrSchedule{}, 0);
        EXPECT_GE(j, 0.0);
        EXPECT_GT(j, 0.0); // finite logits never reach degenerate certainty
    }
}
