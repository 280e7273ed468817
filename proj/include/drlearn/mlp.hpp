#ifndef DRLEARN_MLP_HPP
#define DRLEARN_MLP_HPP

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "drlearn/matrix.hpp"
#include "drlearn/numerics.hpp"
#include "drlearn/rng.hpp"
#include "drlearn/sideinfo.hpp"

namespace drlearn {

enum class OutputKind { kSoftmax, kLinear, kSigmoid };

/// Fully-connected network with logistic hidden units. weights(i,j) maps
/// input i to output j, so out = act(x W + b) layer by layer.
struct Mlp {
    struct Layer {
        Matrix weights; // n_in x n_out
        Vector bias;
    };

    std::vector<Layer> layers;
    OutputKind output_kind = OutputKind::kSoftmax;

    std::size_t input_dim() const { return layers.front().weights.rows(); }
    std::size_t output_dim() const { return layers.back().weights.cols(); }
    std::size_t n_hidden_layers() const { return layers.size() - 1; }
};

/// How the objective's pair sum is normalized before alpha_l weights it.
///   kSum        plain sum over the pair set
///   kPairMean   divided by |pairs| (mean over the pairs present)
///   kBatchSquare divided by B^2, the ordered pair slots of the batch; the
///               regularization pressure then tracks how densely the batch is
///               covered by sampled pairs instead of spiking with their count
enum class PairTermNorm { kSum, kPairMean, kBatchSquare };

/// Per-layer diversifying trade-offs: alpha_l(epoch) =
/// alpha0 * decay^epoch * per_layer_scale[l]. An empty scale vector means a
/// uniform 1.0 at every hidden layer.
struct DrSchedule {
    double alpha0 = 0.0;
    double decay = 1.0;
    Vector per_layer_scale;
    PairTermNorm pair_norm = PairTermNorm::kSum;

    double alpha_at(int epoch, std::size_t hidden_layer) const {
        if (alpha0 < 0.0) throw std::invalid_argument("DrSchedule: alpha0 must be >= 0");
        const double scale =
            per_layer_scale.empty() ? 1.0 : per_layer_scale.at(hidden_layer);
        return alpha0 * std::pow(decay, epoch) * scale;
    }

    double pair_scale(std::size_t n_pairs, std::size_t batch_size) const {
        switch (pair_norm) {
            case PairTermNorm::kPairMean: return n_pairs > 0 ? 1.0 / double(n_pairs) : 1.0;
            case PairTermNorm::kBatchSquare: return 1.0 / (double(batch_size) * double(batch_size));
            case PairTermNorm::kSum: break;
        }
        return 1.0;
    }

    bool active() const { return alpha0 != 0.0; }
};

struct MlpActivations {
    std::vector<Vector> hidden; // hidden[l] = h^{l+1}, logistic activations
    Vector logits;              // pre-activation of the output layer
    Vector output;              // softmax/sigmoid/identity of logits
};

struct MlpGradient {
    std::vector<Mlp::Layer> layers;

    explicit MlpGradient(const Mlp& model) {
        layers.reserve(model.layers.size());
        for (const auto& layer : model.layers)
            layers.push_back({Matrix(layer.weights.rows(), layer.weights.cols()),
                              Vector(layer.bias.size(), 0.0)});
    }
};

struct MlpStepMetrics {
    double cost = 0.0;     // mean cross-entropy over the batch
    double dr_value = 0.0; // the alpha-weighted DR term as it enters J
};

/// Gaussian-initialized network: weights ~ N(0, init_std^2), biases zero.
inline Mlp make_mlp(const std::vector<std::size_t>& sizes, Rng& rng, double init_std = 0.1,
                    OutputKind output_kind = OutputKind::kSoftmax) {
    if (sizes.size() < 2) throw std::invalid_argument("make_mlp: need at least input and output sizes");
    Mlp model;
    model.output_kind = output_kind;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        Mlp::Layer layer;
        layer.weights = Matrix(sizes[l], sizes[l + 1]);
        for (std::size_t i = 0; i < layer.weights.size(); ++i)
            layer.weights.data()[i] = init_std * rng.gaussian();
        layer.bias.assign(sizes[l + 1], 0.0);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

namespace detail {

inline Vector affine(const Mlp::Layer& layer, std::span<const double> in) {
    if (in.size() != layer.weights.rows()) throw std::invalid_argument("Mlp: dimension mismatch");
    Vector out = layer.bias;
    for (std::size_t i = 0; i < in.size(); ++i) {
        const double xi = in[i];
        if (xi == 0.0) continue;
        const double* w = layer.weights.row(i);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += xi * w[j];
    }
    return out;
}

} // namespace detail

/// Forward pass caching every hidden activation (the DR terms need them all).
inline MlpActivations forward(const Mlp& model, std::span<const double> x) {
    MlpActivations acts;
    acts.hidden.reserve(model.n_hidden_layers());
    std::span<const double> in = x;
    for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
        Vector a = detail::affine(model.layers[l], in);
        for (double& v : a) v = sigmoid(v);
        acts.hidden.push_back(std::move(a));
        in = acts.hidden.back();
    }
    acts.logits = detail::affine(model.layers.back(), in);
    acts.output = acts.logits;
    switch (model.output_kind) {
        case OutputKind::kSoftmax: softmax_inplace(acts.output); break;
        case OutputKind::kSigmoid:
            for (double& v : acts.output) v = sigmoid(v);
            break;
        case OutputKind::kLinear: break;
    }
    return acts;
}

/// Squared Euclidean distance between two activation vectors.
inline double dr_layer_penalty(const Vector& h_p, const Vector& h_q) {
    if (h_p.size() != h_q.size()) throw std::invalid_argument("dr_layer_penalty: length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < h_p.size(); ++i) {
        const double diff = h_p[i] - h_q[i];
        d += diff * diff;
    }
    return d;
}

namespace detail {

/// Cross-entropy -log softmax(logits)[label], computed from logits.
inline double cross_entropy(const Vector& logits, int label) {
    double m = logits[0];
    for (double v : logits) m = std::max(m, v);
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - m);
    return m + std::log(sum) - logits[std::size_t(label)];
}

} // namespace detail

/// Eq.-style training objective over a batch, as a plain sum:
///   J = sum_x CE(softmax(G(x)), y) + omega_coeff * ||theta||^2
///       - sum_{(p,q) in pairs} sum_l alpha_l(epoch) ||h_p^l - h_q^l||^2
/// Pairs index into the batch. Minimizing J maximizes cross-class layer
/// distances.
inline double objective(const Mlp& model, const Matrix& batch, const std::vector<int>& labels,
                        const PairSet& pairs, const DrSchedule& schedule, int epoch,
                        double omega_coeff = 0.0) {
    if (labels.size() != batch.rows()) throw std::invalid_argument("objective: labels/batch size mismatch");
    std::vector<MlpActivations> acts;
    acts.reserve(batch.rows());
    double j = 0.0;
    for (std::size_t row = 0; row < batch.rows(); ++row) {
        acts.push_back(forward(model, std::span(batch.row(row), batch.cols())));
        j += detail::cross_entropy(acts.back().logits, labels[row]);
    }
    if (omega_coeff != 0.0) {
        double norm = 0.0;
        for (const auto& layer : model.layers) {
            for (std::size_t i = 0; i < layer.weights.size(); ++i)
                norm += layer.weights.data()[i] * layer.weights.data()[i];
            for (double b : layer.bias) norm += b * b;
        }
        j += omega_coeff * norm;
    }
    const double pair_scale = schedule.pair_scale(pairs.size(), batch.rows());
    for (const auto& [p, q] : pairs.pairs) {
        if (p >= batch.rows() || q >= batch.rows()) throw std::out_of_range("objective: pair index outside batch");
        for (std::size_t l = 0; l < model.n_hidden_layers(); ++l)
            j -= pair_scale * schedule.alpha_at(epoch, l) *
                 dr_layer_penalty(acts[p].hidden[l], acts[q].hidden[l]);
    }
    return j;
}

/// Exact dJ/dtheta for the objective above. The DR terms inject gradient at
/// every hidden layer (that is the mechanism: each layer receives class-label
/// signal directly, not only through the chain from the output).
inline MlpGradient objective_gradient(const Mlp& model, const Matrix& batch,
                                      const std::vector<int>& labels, const PairSet& pairs,
                                      const DrSchedule& schedule, int epoch, double omega_coeff = 0.0,
                                      MlpStepMetrics* metrics = nullptr) {
    if (labels.size() != batch.rows())
        throw std::invalid_argument("objective_gradient: labels/batch size mismatch");
    const std::size_t n_hidden_layers = model.n_hidden_layers();

    std::vector<MlpActivations> acts;
    acts.reserve(batch.rows());
    for (std::size_t row = 0; row < batch.rows(); ++row)
        acts.push_back(forward(model, std::span(batch.row(row), batch.cols())));

    // dJ/dh^l contributions arriving from the DR pair terms
    std::vector<std::vector<Vector>> injections(batch.rows());
    auto injection_at = [&](std::size_t example, std::size_t l) -> Vector& {
        auto& per_layer = injections[example];
        if (per_layer.empty()) {
            per_layer.resize(n_hidden_layers);
            for (std::size_t k = 0; k < n_hidden_layers; ++k)
                per_layer[k].assign(acts[example].hidden[k].size(), 0.0);
        }
        return per_layer[l];
    };

    double dr_sum = 0.0;
    const double pair_scale = schedule.pair_scale(pairs.size(), batch.rows());
    for (const auto& [p, q] : pairs.pairs) {
        if (p >= batch.rows() || q >= batch.rows())
            throw std::out_of_range("objective_gradient: pair index outside batch");
        for (std::size_t l = 0; l < n_hidden_layers; ++l) {
            const double alpha_l = pair_scale * schedule.alpha_at(epoch, l);
            const Vector& h_p = acts[p].hidden[l];
            const Vector& h_q = acts[q].hidden[l];
            if (metrics) dr_sum += alpha_l * dr_layer_penalty(h_p, h_q);
            if (alpha_l == 0.0) continue;
            Vector& inj_p = injection_at(p, l);
            Vector& inj_q = injection_at(q, l);
            for (std::size_t i = 0; i < h_p.size(); ++i) {
                const double g = -alpha_l * 2.0 * (h_p[i] - h_q[i]);
                inj_p[i] += g;
                inj_q[i] -= g;
            }
        }
    }

    MlpGradient grad(model);
    double cost_sum = 0.0;
    Vector delta, down;
    for (std::size_t row = 0; row < batch.rows(); ++row) {
        const MlpActivations& a = acts[row];
        cost_sum += detail::cross_entropy(a.logits, labels[row]);

        // softmax + cross-entropy: dJ/dlogits = output - onehot
        delta = a.output;
        delta[std::size_t(labels[row])] -= 1.0;

        for (std::size_t l = model.layers.size(); l-- > 0;) {
            const std::span<const double> in = l == 0 ? std::span(batch.row(row), batch.cols())
                                                      : std::span<const double>(a.hidden[l - 1]);
            auto& layer_grad = grad.layers[l];
            for (std::size_t i = 0; i < in.size(); ++i) {
                if (in[i] == 0.0) continue;
                double* w = layer_grad.weights.row(i);
                for (std::size_t j = 0; j < delta.size(); ++j) w[j] += in[i] * delta[j];
            }
            axpy(layer_grad.bias, 1.0, delta);
            if (l == 0) break;

            down.assign(in.size(), 0.0);
            const Matrix& w = model.layers[l].weights;
            for (std::size_t i = 0; i < in.size(); ++i) {
                const double* row_w = w.row(i);
                double s = 0.0;
                for (std::size_t j = 0; j < delta.size(); ++j) s += row_w[j] * delta[j];
                down[i] = s;
            }
            if (!injections[row].empty()) axpy(down, 1.0, injections[row][l - 1]);
            const Vector& h = a.hidden[l - 1];
            for (std::size_t i = 0; i < down.size(); ++i) down[i] *= h[i] * (1.0 - h[i]);
            delta = down;
        }
    }

    if (omega_coeff != 0.0) {
        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            grad.layers[l].weights.axpy(2.0 * omega_coeff, model.layers[l].weights);
            axpy(grad.layers[l].bias, 2.0 * omega_coeff, model.layers[l].bias);
        }
    }

    if (metrics) {
        metrics->cost = cost_sum / double(batch.rows());
        metrics->dr_value = dr_sum;
    }
    return grad;
}

/// theta += scale * grad for every layer.
inline void apply_gradient(Mlp& model, const MlpGradient& grad, double scale) {
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        model.layers[l].weights.axpy(scale, grad.layers[l].weights);
        axpy(model.layers[l].bias, scale, grad.layers[l].bias);
    }
}

/// Backpropagate an arbitrary output-preactivation delta through the network,
/// adding scale * (parameter gradients) into grad. Returns dJ/dx. Used by
/// heads whose loss is not softmax cross-entropy (e.g. the VAE networks).
inline Vector backward_from_output(const Mlp& model, std::span<const double> x,
                                   const MlpActivations& acts, const Vector& delta_logits,
                                   MlpGradient& grad, double scale = 1.0) {
    Vector delta = delta_logits;
    Vector down;
    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const std::span<const double> in =
            l == 0 ? x : std::span<const double>(acts.hidden[l - 1]);
        auto& layer_grad = grad.layers[l];
        for (std::size_t i = 0; i < in.size(); ++i) {
            if (in[i] == 0.0) continue;
            double* w = layer_grad.weights.row(i);
            const double v = scale * in[i];
            for (std::size_t j = 0; j < delta.size(); ++j) w[j] += v * delta[j];
        }
        axpy(layer_grad.bias, scale, delta);

        down.assign(in.size(), 0.0);
        const Matrix& w = model.layers[l].weights;
        for (std::size_t i = 0; i < in.size(); ++i) {
            const double* row_w = w.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < delta.size(); ++j) s += row_w[j] * delta[j];
            down[i] = s;
        }
        if (l == 0) return down;
        const Vector& h = acts.hidden[l - 1];
        for (std::size_t i = 0; i < down.size(); ++i) down[i] *= h[i] * (1.0 - h[i]);
        delta = down;
    }
    return down;
}

/// One gradient-descent step on the batch. The update uses the batch-averaged
/// gradient (theta -= lr/|batch| * dJ/dtheta) so that a configured learning
/// rate keeps its meaning across batch sizes.
inline MlpStepMetrics backprop_step(Mlp& model, const Matrix& batch, const std::vector<int>& labels,
                                    const PairSet& pairs, const DrSchedule& schedule, int epoch,
                                    double lr, double omega_coeff = 0.0) {
    if (!(lr > 0.0)) throw std::invalid_argument("backprop_step: lr must be positive");
    MlpStepMetrics metrics;
    const MlpGradient grad =
        objective_gradient(model, batch, labels, pairs, schedule, epoch, omega_coeff, &metrics);
    apply_gradient(model, grad, -lr / double(batch.rows()));
    return metrics;
}

/// Fraction of argmax-misclassified examples; ties break toward the lowest
/// class index.
inline double evaluate(const Mlp& model, const Matrix& inputs, const std::vector<int>& labels) {
    if (labels.empty() || labels.size() != inputs.rows())
        throw std::invalid_argument("evaluate: empty or mismatched test set");
    std::size_t wrong = 0;
    for (std::size_t row = 0; row < inputs.rows(); ++row) {
        const MlpActivations acts = forward(model, std::span(inputs.row(row), inputs.cols()));
        std::size_t best = 0;
        for (std::size_t j = 1; j < acts.output.size(); ++j)
            if (acts.output[j] > acts.output[best]) best = j;
        if (int(best) != labels[row]) ++wrong;
    }
    return double(wrong) / double(labels.size());
}

} // namespace drlearn

#endif
