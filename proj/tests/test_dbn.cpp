#include "drlearn/dbn.hpp"

#include <gtest/gtest.h>

#include "drlearn/dataset.hpp"

using namespace drlearn;

namespace {

LabeledDataset toy_data(std::uint64_t seed) {
    Rng rng(seed);
    LabeledDataset ds = synth_blobs(30, 2, 8, 3.0, rng);
    ds = binarize(shuffled(ds, rng), 0.5);
    return ds;
}

} // namespace

TEST(PropagateUp, IdentityAtLayerZero) {
    Rng rng(1);
    DbnStack stack;
    stack.layers.push_back(make_rbm(4, 3, rng));
    const Vector x = {1.0, 0.0, 1.0, 0.0};
    EXPECT_EQ(propagate_up(stack, x, 0), x);
    EXPECT_THROW(propagate_up(stack, x, 2), std::out_of_range);
}

TEST(PropagateUp, ZeroStackGivesConstantHalf) {
    Rng rng(2);
    DbnStack stack;
    stack.layers.push_back(make_rbm(4, 3, rng));
    stack.layers.push_back(make_rbm(3, 2, rng));
    for (auto& rbm : stack.layers) rbm.weights.fill(0.0);
    const Vector h = propagate_up(stack, {1.0, 1.0, 0.0, 0.0}, 2);
    ASSERT_EQ(h.size(), 2u);
    for (double v : h) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(PropagateUp, SingleLayerEqualsPosterior) {
    Rng rng(3);
    DbnStack stack;
    stack.layers.push_back(make_rbm(5, 3, rng));
    for (std::size_t i = 0; i < stack.layers[0].weights.size(); ++i)
        stack.layers[0].weights.data()[i] = rng.gaussian();
    const Vector x = {1.0, 0.0, 1.0, 1.0, 0.0};
    EXPECT_EQ(propagate_up(stack, x, 1), mean_field_posterior(stack.layers[0], x));
}

TEST(PretrainLayerwise, LayerChainingAndCurves) {
    const LabeledDataset ds = toy_data(4);
    Rng rng(5);
    const PretrainResult result =
        pretrain_layerwise(ds.inputs, ds.labels, {6, 4, 3}, 0.05, 10.0, 1, 3, 10, rng);
    ASSERT_EQ(result.stack.depth(), 3u);
    EXPECT_EQ(result.stack.layer_sizes(), (std::vector<std::size_t>{8, 6, 4, 3}));
    for (std::size_t l = 1; l < result.stack.depth(); ++l)
        EXPECT_EQ(result.stack.layers[l].n_visible(), result.stack.layers[l - 1].n_hidden());
    ASSERT_EQ(result.curves.size(), 3u);
    for (const auto& curve : result.curves) {
        EXPECT_EQ(curve.rows.size(), 3u);
        EXPECT_EQ(curve.columns, (std::vector<std::string>{"epoch", "pll", "dr_value"}));
    }
}

TEST(PretrainLayerwise, AlphaZeroReproducesPlainStackingBitExactly) {
    const LabeledDataset ds = toy_data(6);
    Rng rng_a(7);
    const PretrainResult regularized_path =
        pretrain_layerwise(ds.inputs, ds.labels, {5, 3}, 0.05, 0.0, 1, 2, 10, rng_a);

    // hand-rolled plain stacking consuming the identical rng stream
    Rng rng_b(7);
    DbnStack plain;
    Matrix representation = ds.inputs;
    for (std::size_t layer_size : {std::size_t(5), std::size_t(3)}) {
        Rbm rbm = make_rbm(representation.cols(), layer_size, rng_b);
        for (int epoch = 0; epoch < 2; ++epoch) {
            const auto order = shuffled_indices(representation.rows(), rng_b);
            for (std::size_t start = 0; start < order.size(); start += 10) {
                const std::size_t count = std::min<std::size_t>(10, order.size() - start);
                Matrix batch(count, representation.cols());
                for (std::size_t b = 0; b < count; ++b)
                    std::copy(representation.row(order[start + b]),
                              representation.row(order[start + b]) + representation.cols(), batch.row(b));
                cd_update(rbm, batch, 0.05, 1, rng_b);
            }
        }
        plain.layers.push_back(std::move(rbm));
        representation = propagate_up_matrix(plain, ds.inputs, plain.depth());
    }

    for (std::size_t l = 0; l < 2; ++l) {
        EXPECT_TRUE(regularized_path.stack.layers[l].weights == plain.layers[l].weights);
        EXPECT_EQ(regularized_path.stack.layers[l].visible_bias, plain.layers[l].visible_bias);
        EXPECT_EQ(regularized_path.stack.layers[l].hidden_bias, plain.layers[l].hidden_bias);
    }
}

TEST(PretrainLayerwise, SingleClassWithAlphaRejected) {
    Rng rng(8);
    LabeledDataset ds = synth_blobs(10, 1, 4, 2.0, rng);
    EXPECT_THROW(pretrain_layerwise(ds.inputs, ds.labels, {3}, 0.05, 1.0, 1, 1, 5, rng),
                 std::invalid_argument);
}

TEST(ExportMlp, ForwardMatchesPropagateUp) {
    const LabeledDataset ds = toy_data(9);
    Rng rng(10);
    const PretrainResult result =
        pretrain_layerwise(ds.inputs, ds.labels, {6, 4}, 0.05, 5.0, 1, 2, 10, rng);
    Rng head_rng(11);
    const Mlp classifier = export_mlp(result.stack, 2, head_rng);
    ASSERT_EQ(classifier.layers.size(), 3u); // two copied + appended head

    const Vector x = ds.inputs.row_copy(0);
    const MlpActivations acts = forward(classifier, x);
    for (std::size_t l = 1; l <= result.stack.depth(); ++l) {
        const Vector expected = propagate_up(result.stack, x, l);
        ASSERT_EQ(acts.hidden[l - 1].size(), expected.size());
        for (std::size_t j = 0; j < expected.size(); ++j)
            EXPECT_NEAR(acts.hidden[l - 1][j], expected[j], 1e-12);
    }
}

TEST(ExportMlp, TopLayerServesAsHeadWhenWidthsMatch) {
    Rng rng(12);
    DbnStack stack;
    stack.layers.push_back(make_rbm(6, 4, rng));
    stack.layers.push_back(make_rbm(4, 2, rng));
    Rng head_rng(13);
    const Mlp classifier = export_mlp(stack, 2, head_rng);
    EXPECT_EQ(classifier.layers.size(), 2u);
    EXPECT_EQ(classifier.output_dim(), 2u);
    EXPECT_THROW(export_mlp(DbnStack{}, 2, head_rng), std::invalid_argument);
}

TEST(ExportMlp, DepthPreserved) {
    Rng rng(14);
    DbnStack stack;
    std::size_t widths[] = {32, 16, 12, 10, 8, 7, 6, 5, 4, 3};
    std::size_t in = 64;
    for (std::size_t w : widths) {
        stack.layers.push_back(make_rbm(in, w, rng));
        in = w;
    }
    Rng head_rng(15);
    const Mlp classifier = export_mlp(stack, 10, head_rng);
    EXPECT_EQ(classifier.layers.size(), 11u); // 10 pretrained hidden layers + output head
}
