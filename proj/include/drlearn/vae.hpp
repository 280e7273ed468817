#ifndef DRLEARN_VAE_HPP
#define DRLEARN_VAE_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "drlearn/curve.hpp"
#include "drlearn/dbn.hpp"
#include "drlearn/matrix.hpp"
#include "drlearn/mlp.hpp"
#include "drlearn/numerics.hpp"
#include "drlearn/rng.hpp"
#include "drlearn/sideinfo.hpp"

namespace drlearn {

/// Variational autoencoder: diagonal-Gaussian posterior over a d-dimensional
/// latent, Bernoulli decoder over the input. The encoder's linear output is
/// [mu, log_var] of width 2d; log_var is clamped to [-30, 30].
struct VaeModel {
    Mlp encoder; // sigmoid hiddens, linear output of size 2 * latent_dim
    Mlp decoder; // sigmoid hiddens, sigmoid output of size input_dim
    std::size_t latent_dim = 0;

    std::size_t input_dim() const { return encoder.input_dim(); }
};

struct LatentSample {
    Vector z;
    Vector epsilon;
};

enum class VaeDrMode { kNone, kCrossEntropy, kL2 };

constexpr double kLogVarClamp = 30.0;

inline VaeModel make_vae(std::size_t input_dim, std::size_t hidden, std::size_t latent_dim, Rng& rng,
                         double init_std = 0.1) {
    VaeModel model;
    model.latent_dim = latent_dim;
    model.encoder = make_mlp({input_dim, hidden, 2 * latent_dim}, rng, init_std, OutputKind::kLinear);
    model.decoder = make_mlp({latent_dim, hidden, input_dim}, rng, init_std, OutputKind::kSigmoid);
    return model;
}

/// Deterministic encoder pass; returns (mu, log_var), log_var clamped.
inline std::pair<Vector, Vector> encode(const VaeModel& model, std::span<const double> x) {
    const MlpActivations acts = forward(model.encoder, x);
    const std::size_t d = model.latent_dim;
    Vector mu(acts.output.begin(), acts.output.begin() + d);
    Vector log_var(d);
    for (std::size_t j = 0; j < d; ++j)
        log_var[j] = std::clamp(acts.output[d + j], -kLogVarClamp, kLogVarClamp);
    return {std::move(mu), std::move(log_var)};
}

/// z = mu + exp(log_var / 2) . epsilon, epsilon ~ N(0, I).
inline LatentSample reparameterize(const Vector& mu, const Vector& log_var, Rng& rng) {
    if (mu.size() != log_var.size()) throw std::invalid_argument("reparameterize: dimension mismatch");
    LatentSample sample;
    sample.epsilon.resize(mu.size());
    sample.z.resize(mu.size());
    for (std::size_t j = 0; j < mu.size(); ++j) {
        sample.epsilon[j] = rng.gaussian();
        sample.z[j] = mu[j] + std::exp(0.5 * log_var[j]) * sample.epsilon[j];
    }
    return sample;
}

/// Decoder Bernoulli means for a latent point.
inline Vector decode(const VaeModel& model, const Vector& z) {
    return forward(model.decoder, z).output;
}

/// KL(N(mu, sigma^2 I) || N(0, I)) = 1/2 sum (mu^2 + sigma^2 - 1 - log sigma^2).
inline double gaussian_kl(const Vector& mu, const Vector& log_var) {
    double kl = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j)
        kl += 0.5 * (mu[j] * mu[j] + std::exp(log_var[j]) - 1.0 - log_var[j]);
    return kl;
}

namespace detail {

/// Everything one training example needs for the backward pass.
struct VaeCache {
    MlpActivations enc;
    Vector mu, log_var; // clamped
    Vector eps, z;
    MlpActivations dec;
};

inline VaeCache vae_forward(const VaeModel& model, std::span<const double> x, const Vector& eps) {
    if (eps.size() != model.latent_dim) throw std::invalid_argument("vae_forward: epsilon dimension mismatch");
    VaeCache cache;
    cache.enc = forward(model.encoder, x);
    const std::size_t d = model.latent_dim;
    cache.mu.assign(cache.enc.output.begin(), cache.enc.output.begin() + d);
    cache.log_var.resize(d);
    cache.z.resize(d);
    cache.eps = eps;
    for (std::size_t j = 0; j < d; ++j) {
        cache.log_var[j] = std::clamp(cache.enc.output[d + j], -kLogVarClamp, kLogVarClamp);
        cache.z[j] = cache.mu[j] + std::exp(0.5 * cache.log_var[j]) * eps[j];
    }
    cache.dec = forward(model.decoder, cache.z);
    return cache;
}

/// log P(x | decoder logits), Bernoulli factors, computed from logits so the
/// values stay finite at saturation.
inline double bernoulli_log_likelihood(std::span<const double> x, const Vector& logits) {
    double ll = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        ll += x[i] * log_sigmoid(logits[i]) + (1.0 - x[i]) * log_sigmoid(-logits[i]);
    return ll;
}

} // namespace detail

struct VaeGradient {
    MlpGradient encoder;
    MlpGradient decoder;

    explicit VaeGradient(const VaeModel& model) : encoder(model.encoder), decoder(model.decoder) {}
};

namespace detail {

/// Backward through decoder, reparameterization and encoder for one example.
/// delta_dec_logits = dO/d(decoder output preactivation) accumulated over all
/// objective terms touching this example's reconstruction; with_kl adds the
/// -KL gradient at the (mu, log_var) junction.
inline void vae_backward(const VaeModel& model, std::span<const double> x, const VaeCache& cache,
                         const Vector& delta_dec_logits, bool with_kl, VaeGradient& grad) {
    const std::size_t d = model.latent_dim;
    const Vector delta_z =
        backward_from_output(model.decoder, cache.z, cache.dec, delta_dec_logits, grad.decoder);

    Vector delta_enc(2 * d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double dmu = delta_z[j];
        double dlv = delta_z[j] * cache.eps[j] * 0.5 * std::exp(0.5 * cache.log_var[j]);
        if (with_kl) {
            dmu -= cache.mu[j];
            dlv -= 0.5 * (std::exp(cache.log_var[j]) - 1.0);
        }
        // the clamp on log_var zeroes the gradient outside its range
        if (std::abs(cache.enc.output[d + j]) >= kLogVarClamp) dlv = 0.0;
        delta_enc[j] = dmu;
        delta_enc[d + j] = dlv;
    }
    backward_from_output(model.encoder, x, cache.enc, delta_enc, grad.encoder);
}

} // namespace detail

/// Variational lower bound of one example given a frozen noise draw.
inline double elbo_frozen(const VaeModel& model, std::span<const double> x, const Vector& eps) {
    const detail::VaeCache cache = detail::vae_forward(model, x, eps);
    return detail::bernoulli_log_likelihood(x, cache.dec.logits) -
           gaussian_kl(cache.mu, cache.log_var);
}

/// Single-sample ELBO summed over the batch: E_Q[log P(x|H)] - KL(Q || N(0,I))
/// with one reparameterized draw per example.
inline double elbo(const VaeModel& model, const Matrix& batch, Rng& rng) {
    double total = 0.0;
    for (std::size_t row = 0; row < batch.rows(); ++row) {
        Vector eps(model.latent_dim);
        for (double& e : eps) e = rng.gaussian();
        total += elbo_frozen(model, std::span(batch.row(row), batch.cols()), eps);
    }
    return total;
}

/// Cross-entropy diversifying term D_CE(x_p, x_q) = E_{Q_{x_q}}[log P(x_p|H)]
/// with a single sample: encodes x_q, decodes, scores x_p. A similarity:
/// larger when the two representations are interchangeable. Always <= 0.
inline double dr_cross_entropy(const VaeModel& model, const Vector& x_p, const Vector& x_q, Rng& rng) {
    Vector eps(model.latent_dim);
    for (double& e : eps) e = rng.gaussian();
    const detail::VaeCache cache = detail::vae_forward(model, x_q, eps);
    return detail::bernoulli_log_likelihood(x_p, cache.dec.logits);
}

/// Squared Euclidean distance between the two reconstructions. One shared
/// noise draw is used for both encodings, so x_p = x_q gives exactly 0 and
/// the value is symmetric in (p, q).
inline double dr_reconstruction_l2(const VaeModel& model, const Vector& x_p, const Vector& x_q, Rng& rng) {
    Vector eps(model.latent_dim);
    for (double& e : eps) e = rng.gaussian();
    const detail::VaeCache cache_p = detail::vae_forward(model, x_p, eps);
    const detail::VaeCache cache_q = detail::vae_forward(model, x_q, eps);
    return dr_layer_penalty(cache_p.dec.output, cache_q.dec.output);
}

struct VaeStepMetrics {
    double elbo = 0.0;     // mean per example
    double dr_value = 0.0; // mean per pair (0 when no pairs/mode none)
};

/// Training objective with frozen per-example noise:
///   O = sum_i ELBO(x_i; eps_i)  - alpha * sum_pairs D_CE   (mode ce)
///   O = sum_i ELBO(x_i; eps_i)  + alpha * sum_pairs D_2    (mode l2)
/// Pair terms reuse the per-example latent samples from the ELBO pass.
inline double vae_objective_frozen(const VaeModel& model, const Matrix& batch, const PairSet& pairs,
                                   double alpha, VaeDrMode mode, const std::vector<Vector>& eps_list,
                                   VaeStepMetrics* metrics = nullptr) {
    if (eps_list.size() != batch.rows())
        throw std::invalid_argument("vae_objective_frozen: one epsilon per example required");
    std::vector<detail::VaeCache> caches;
    caches.reserve(batch.rows());
    double elbo_sum = 0.0;
    for (std::size_t row = 0; row < batch.rows(); ++row) {
        caches.push_back(detail::vae_forward(model, std::span(batch.row(row), batch.cols()), eps_list[row]));
        elbo_sum += detail::bernoulli_log_likelihood(std::span(batch.row(row), batch.cols()),
                                                     caches.back().dec.logits) -
                    gaussian_kl(caches.back().mu, caches.back().log_var);
    }
    double dr_sum = 0.0;
    if (mode != VaeDrMode::kNone) {
        for (const auto& [p, q] : pairs.pairs) {
            if (p >= batch.rows() || q >= batch.rows())
                throw std::out_of_range("vae_objective_frozen: pair index outside batch");
            if (mode == VaeDrMode::kCrossEntropy)
                dr_sum += detail::bernoulli_log_likelihood(std::span(batch.row(p), batch.cols()),
                                                           caches[q].dec.logits);
            else
                dr_sum += dr_layer_penalty(caches[p].dec.output, caches[q].dec.output);
        }
    }
    if (metrics) {
        metrics->elbo = elbo_sum / double(batch.rows());
        metrics->dr_value = pairs.empty() ? 0.0 : dr_sum / double(pairs.size());
    }
    const double sign = mode == VaeDrMode::kCrossEntropy ? -1.0 : 1.0;
    return elbo_sum + (mode == VaeDrMode::kNone ? 0.0 : sign * alpha * dr_sum);
}

/// Exact gradient of vae_objective_frozen w.r.t. all parameters.
inline VaeGradient vae_objective_gradient_frozen(const VaeModel& model, const Matrix& batch,
                                                 const PairSet& pairs, double alpha, VaeDrMode mode,
                                                 const std::vector<Vector>& eps_list,
                                                 VaeStepMetrics* metrics = nullptr) {
    if (eps_list.size() != batch.rows())
        throw std::invalid_argument("vae_objective_gradient_frozen: one epsilon per example required");
    std::vector<detail::VaeCache> caches;
    caches.reserve(batch.rows());
    for (std::size_t row = 0; row < batch.rows(); ++row)
        caches.push_back(detail::vae_forward(model, std::span(batch.row(row), batch.cols()), eps_list[row]));

    // accumulate dO/d(decoder output preactivation) per example
    std::vector<Vector> delta_dec(batch.rows());
    for (std::size_t row = 0; row < batch.rows(); ++row) {
        delta_dec[row].assign(batch.cols(), 0.0);
        const double* x = batch.row(row);
        const Vector& y = caches[row].dec.output;
        for (std::size_t i = 0; i < batch.cols(); ++i) delta_dec[row][i] = x[i] - y[i];
    }

    double elbo_sum = 0.0, dr_sum = 0.0;
    if (metrics) {
        for (std::size_t row = 0; row < batch.rows(); ++row)
            elbo_sum += detail::bernoulli_log_likelihood(std::span(batch.row(row), batch.cols()),
                                                         caches[row].dec.logits) -
                        gaussian_kl(caches[row].mu, caches[row].log_var);
    }

    if (mode != VaeDrMode::kNone && alpha != 0.0) {
        for (const auto& [p, q] : pairs.pairs) {
            if (p >= batch.rows() || q >= batch.rows())
                throw std::out_of_range("vae_objective_gradient_frozen: pair index outside batch");
            if (mode == VaeDrMode::kCrossEntropy) {
                // O += -alpha * sum_i [x_p log y_q + (1-x_p) log(1-y_q)]
                const double* x_p = batch.row(p);
                const Vector& y_q = caches[q].dec.output;
                if (metrics)
                    dr_sum += detail::bernoulli_log_likelihood(std::span(batch.row(p), batch.cols()),
                                                               caches[q].dec.logits);
                for (std::size_t i = 0; i < batch.cols(); ++i)
                    delta_dec[q][i] -= alpha * (x_p[i] - y_q[i]);
            } else {
                // O += +alpha * ||y_p - y_q||^2
                const Vector& y_p = caches[p].dec.output;
                const Vector& y_q = caches[q].dec.output;
                if (metrics) dr_sum += dr_layer_penalty(y_p, y_q);
                for (std::size_t i = 0; i < batch.cols(); ++i) {
                    const double diff = 2.0 * alpha * (y_p[i] - y_q[i]);
                    delta_dec[p][i] += diff * y_p[i] * (1.0 - y_p[i]);
                    delta_dec[q][i] -= diff * y_q[i] * (1.0 - y_q[i]);
                }
            }
        }
    } else if (metrics && mode != VaeDrMode::kNone) {
        for (const auto& [p, q] : pairs.pairs) {
            if (mode == VaeDrMode::kCrossEntropy)
                dr_sum += detail::bernoulli_log_likelihood(std::span(batch.row(p), batch.cols()),
                                                           caches[q].dec.logits);
            else
                dr_sum += dr_layer_penalty(caches[p].dec.output, caches[q].dec.output);
        }
    }

    VaeGradient grad(model);
    for (std::size_t row = 0; row < batch.rows(); ++row)
        detail::vae_backward(model, std::span(batch.row(row), batch.cols()), caches[row],
                             delta_dec[row], /*with_kl=*/true, grad);

    if (metrics) {
        metrics->elbo = elbo_sum / double(batch.rows());
        metrics->dr_value = pairs.empty() ? 0.0 : dr_sum / double(pairs.size());
    }
    return grad;
}

/// Gradient-ascent VAE training on the ELBO plus the configured diversifying
/// term; pairs are rebuilt from each mini-batch's labels. The update applies
/// the batch-averaged gradient. With mode none (or alpha = 0) the pair
/// machinery is never consulted, so runs are bit-identical to plain VAE
/// training under the same seed.
inline LearningCurve train_vae(VaeModel& model, const Matrix& data, const std::vector<int>& labels,
                               double lr, int epochs, std::size_t batch_size, double alpha,
                               VaeDrMode mode, Rng& rng) {
    if (!(lr > 0.0)) throw std::invalid_argument("train_vae: lr must be positive");
    if (labels.size() != data.rows()) throw std::invalid_argument("train_vae: labels/data size mismatch");
    if (mode != VaeDrMode::kNone && alpha > 0.0 && !has_two_classes(labels))
        throw std::invalid_argument("train_vae: alpha > 0 needs at least two classes");

    LearningCurve curve;
    curve.columns = {"epoch", "elbo", "dr_value"};
    const bool use_pairs = mode != VaeDrMode::kNone && alpha != 0.0;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        const auto order = shuffled_indices(data.rows(), rng);
        double elbo_sum = 0.0, dr_sum = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t count = std::min(batch_size, order.size() - start);
            Matrix batch(count, data.cols());
            std::vector<int> batch_labels(count);
            for (std::size_t b = 0; b < count; ++b) {
                const std::size_t src = order[start + b];
                std::copy(data.row(src), data.row(src) + data.cols(), batch.row(b));
                batch_labels[b] = labels[src];
            }
            std::vector<Vector> eps_list(count);
            for (auto& eps : eps_list) {
                eps.resize(model.latent_dim);
                for (double& e : eps) e = rng.gaussian();
            }
            const PairSet pairs = use_pairs ? pairs_from_batch(batch_labels) : PairSet{};
            VaeStepMetrics metrics;
            const VaeGradient grad =
                vae_objective_gradient_frozen(model, batch, pairs, alpha, mode, eps_list, &metrics);
            apply_gradient(model.encoder, grad.encoder, lr / double(count));
            apply_gradient(model.decoder, grad.decoder, lr / double(count));
            elbo_sum += metrics.elbo;
            dr_sum += metrics.dr_value;
            ++n_batches;
        }
        curve.add_row({double(epoch), elbo_sum / double(n_batches), dr_sum / double(n_batches)});
    }
    return curve;
}

/// Decoder means over a regular steps x steps grid in the 2-D latent square
/// [lo,hi]^2; row i*steps+j holds the decode of (lerp(i), lerp(j)).
inline Matrix manifold_grid(const VaeModel& model, double lo, double hi, std::size_t steps) {
    if (model.latent_dim != 2) throw std::invalid_argument("manifold_grid: latent dimension must be 2");
    if (steps < 2) throw std::invalid_argument("manifold_grid: steps must be >= 2");
    Matrix grid(steps * steps, model.input_dim());
    for (std::size_t i = 0; i < steps; ++i) {
        for (std::size_t j = 0; j < steps; ++j) {
            const double zi = lo + (hi - lo) * double(i) / double(steps - 1);
            const double zj = lo + (hi - lo) * double(j) / double(steps - 1);
            const Vector y = decode(model, {zi, zj});
            std::copy(y.begin(), y.end(), grid.row(i * steps + j));
        }
    }
    return grid;
}

} // namespace drlearn

#endif
