#ifndef DRLEARN_DBN_HPP
#define DRLEARN_DBN_HPP

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "drlearn/curve.hpp"
#include "drlearn/matrix.hpp"
#include "drlearn/mlp.hpp"
#include "drlearn/rbm.hpp"

namespace drlearn {

/// Greedy layer-wise stack of RBMs. Adjacent dimensions chain: layer l's
/// hidden size is layer l+1's visible size.
struct DbnStack {
    std::vector<Rbm> layers;

    std::size_t depth() const { return layers.size(); }

    std::vector<std::size_t> layer_sizes() const {
        std::vector<std::size_t> sizes;
        if (layers.empty()) return sizes;
        sizes.push_back(layers.front().n_visible());
        for (const auto& rbm : layers) sizes.push_back(rbm.n_hidden());
        return sizes;
    }
};

/// Deterministic upward pass: mean activations (not samples) feed each next
/// layer. to_layer = 0 returns x unchanged.
inline Vector propagate_up(const DbnStack& stack, const Vector& x, std::size_t to_layer) {
    if (to_layer > stack.depth()) throw std::out_of_range("propagate_up: layer index out of range");
    Vector h = x;
    for (std::size_t l = 0; l < to_layer; ++l) h = mean_field_posterior(stack.layers[l], h);
    return h;
}

inline Matrix propagate_up_matrix(const DbnStack& stack, const Matrix& data, std::size_t to_layer) {
    if (to_layer > stack.depth()) throw std::out_of_range("propagate_up_matrix: layer index out of range");
    if (to_layer == 0) return data;
    Matrix out(data.rows(), stack.layers[to_layer - 1].n_hidden());
    for (std::size_t row = 0; row < data.rows(); ++row) {
        const Vector h = propagate_up(stack, data.row_copy(row), to_layer);
        std::copy(h.begin(), h.end(), out.row(row));
    }
    return out;
}

/// Seeded Fisher-Yates permutation of 0..n-1 (batch order for one epoch).
inline std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
    return order;
}

struct PretrainResult {
    DbnStack stack;
    std::vector<LearningCurve> curves; // one per layer: epoch, pll, dr_value
};

/// Greedy layer-wise pretraining with DR at every layer. Layer l trains on
/// the mean activations of layer l-1; labels ride along unchanged so
/// different-class pairs can be formed from any abstract representation.
inline PretrainResult pretrain_layerwise(const Matrix& data, const std::vector<int>& labels,
                                         const std::vector<std::size_t>& layer_sizes, double lr,
                                         double alpha, int k, int epochs, std::size_t batch_size,
                                         Rng& rng) {
    if (layer_sizes.empty()) throw std::invalid_argument("pretrain_layerwise: no layer sizes");
    if (labels.size() != data.rows())
        throw std::invalid_argument("pretrain_layerwise: labels/data size mismatch");
    if (batch_size == 0) throw std::invalid_argument("pretrain_layerwise: batch_size must be >= 1");
    if (alpha > 0.0 && !has_two_classes(labels))
        throw std::invalid_argument("pretrain_layerwise: alpha > 0 needs at least two classes");

    PretrainResult result;
    Matrix representation = data;
    for (std::size_t layer = 0; layer < layer_sizes.size(); ++layer) {
        Rbm rbm = make_rbm(representation.cols(), layer_sizes[layer], rng);
        LearningCurve curve;
        curve.columns = {"epoch", "pll", "dr_value"};

        for (int epoch = 0; epoch < epochs; ++epoch) {
            const auto order = shuffled_indices(representation.rows(), rng);
            double pll_sum = 0.0, dr_sum = 0.0;
            std::size_t n_batches = 0;
            for (std::size_t start = 0; start < order.size(); start += batch_size) {
                const std::size_t count = std::min(batch_size, order.size() - start);
                Matrix batch(count, representation.cols());
                std::vector<int> batch_labels(count);
                for (std::size_t b = 0; b < count; ++b) {
                    const std::size_t src = order[start + b];
                    std::copy(representation.row(src), representation.row(src) + representation.cols(),
                              batch.row(b));
                    batch_labels[b] = labels[src];
                }
                const RbmUpdateMetrics metrics =
                    regularized_update(rbm, batch, batch_labels, lr, alpha, k, rng);
                pll_sum += metrics.pll;
                dr_sum += metrics.mean_dr;
                ++n_batches;
            }
            curve.add_row({double(epoch), pll_sum / double(n_batches), dr_sum / double(n_batches)});
        }

        result.curves.push_back(std::move(curve));
        result.stack.layers.push_back(std::move(rbm));
        if (layer + 1 < layer_sizes.size())
            representation = propagate_up_matrix(result.stack, data, layer + 1);
    }
    return result;
}

/// Classifier initialized from the stack: every RBM contributes a hidden
/// layer (weights + hidden biases). A fresh softmax output layer of
/// n_classes units is appended unless the top RBM already has that width, in
/// which case the top layer becomes the pre-softmax layer.
inline Mlp export_mlp(const DbnStack& stack, std::size_t n_classes, Rng& rng) {
    if (stack.layers.empty()) throw std::invalid_argument("export_mlp: empty stack");
    Mlp model;
    model.output_kind = OutputKind::kSoftmax;
    for (const auto& rbm : stack.layers)
        model.layers.push_back({rbm.weights, rbm.hidden_bias});
    if (stack.layers.back().n_hidden() != n_classes) {
        Mlp::Layer head;
        head.weights = Matrix(stack.layers.back().n_hidden(), n_classes);
        for (std::size_t i = 0; i < head.weights.size(); ++i)
            head.weights.data()[i] = 0.01 * rng.gaussian();
        head.bias.assign(n_classes, 0.0);
        model.layers.push_back(std::move(head));
    }
    return model;
}

} // namespace drlearn

#endif
