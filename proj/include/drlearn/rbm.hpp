#ifndef DRLEARN_RBM_HPP
#define DRLEARN_RBM_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "drlearn/divergence.hpp"
#include "drlearn/matrix.hpp"
#include "drlearn/numerics.hpp"
#include "drlearn/rng.hpp"
#include "drlearn/sideinfo.hpp"

namespace drlearn {

/// Binary-binary restricted Boltzmann machine.
///
/// weights(i,j) couples visible unit i to hidden unit j. Biases are part of
/// the model by default; biases_enabled=false freezes them at zero, which
/// gives the bias-free energy E(x,h) = -sum_ij x_i w_ij h_j.
struct Rbm {
    Matrix weights; // n_visible x n_hidden
    Vector visible_bias;
    Vector hidden_bias;
    bool biases_enabled = true;

    std::size_t n_visible() const { return weights.rows(); }
    std::size_t n_hidden() const { return weights.cols(); }
};

/// Gradient (or gradient-like accumulator) with the same shape as the model.
struct RbmGradient {
    Matrix weights;
    Vector visible_bias;
    Vector hidden_bias;

    explicit RbmGradient(const Rbm& model)
        : weights(model.n_visible(), model.n_hidden()),
          visible_bias(model.n_visible(), 0.0),
          hidden_bias(model.n_hidden(), 0.0) {}
};

/// End state of a k-step Gibbs chain.
struct CdSample {
    Vector visible_k;
    Vector hidden_k;
};

struct RbmUpdateMetrics {
    double mean_dr = 0.0; // mean hellinger_total over the batch pair set
    double pll = 0.0;     // stochastic pseudo-log-likelihood of the batch
};

/// Weights ~ N(0, 0.01^2), biases zero.
inline Rbm make_rbm(std::size_t n_visible, std::size_t n_hidden, Rng& rng, bool biases_enabled = true) {
    Rbm model;
    model.weights = Matrix(n_visible, n_hidden);
    for (std::size_t i = 0; i < model.weights.size(); ++i)
        model.weights.data()[i] = 0.01 * rng.gaussian();
    model.visible_bias.assign(n_visible, 0.0);
    model.hidden_bias.assign(n_hidden, 0.0);
    model.biases_enabled = biases_enabled;
    return model;
}

/// mu_j = sigmoid(sum_i w_ij x_i + c_j)
inline BernoulliProfile hidden_conditional(const Rbm& model, const Vector& x) {
    if (x.size() != model.n_visible()) throw std::invalid_argument("hidden_conditional: dimension mismatch");
    Vector z(model.n_hidden(), 0.0);
    if (model.biases_enabled) z = model.hidden_bias;
    for (std::size_t i = 0; i < model.n_visible(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* w = model.weights.row(i);
        for (std::size_t j = 0; j < model.n_hidden(); ++j) z[j] += xi * w[j];
    }
    for (double& v : z) v = sigmoid(v);
    return z;
}

/// nu_i = sigmoid(sum_j w_ij h_j + b_i)
inline BernoulliProfile visible_conditional(const Rbm& model, const Vector& h) {
    if (h.size() != model.n_hidden()) throw std::invalid_argument("visible_conditional: dimension mismatch");
    Vector z(model.n_visible(), 0.0);
    for (std::size_t i = 0; i < model.n_visible(); ++i) {
        double s = model.biases_enabled ? model.visible_bias[i] : 0.0;
        const double* w = model.weights.row(i);
        for (std::size_t j = 0; j < model.n_hidden(); ++j) s += w[j] * h[j];
        z[i] = sigmoid(s);
    }
    return z;
}

/// The variational posterior over hidden units. For a single RBM the
/// posterior factorizes exactly, so this is hidden_conditional verbatim.
inline BernoulliProfile mean_field_posterior(const Rbm& model, const Vector& x) {
    return hidden_conditional(model, x);
}

/// k rounds of (h ~ P(h|x), x ~ P(x|h)) starting from x0; returns the final
/// sampled pair.
inline CdSample gibbs_cd_k(const Rbm& model, const Vector& x0, int k, Rng& rng) {
    if (k < 1) throw std::invalid_argument("gibbs_cd_k: k must be >= 1");
    CdSample sample;
    sample.visible_k = x0;
    sample.hidden_k.assign(model.n_hidden(), 0.0);
    for (int round = 0; round < k; ++round) {
        const BernoulliProfile mu_h = hidden_conditional(model, sample.visible_k);
        for (std::size_t j = 0; j < mu_h.size(); ++j) sample.hidden_k[j] = rng.bernoulli(mu_h[j]);
        const BernoulliProfile mu_v = visible_conditional(model, sample.hidden_k);
        for (std::size_t i = 0; i < mu_v.size(); ++i) sample.visible_k[i] = rng.bernoulli(mu_v[i]);
    }
    return sample;
}

/// CD-k likelihood gradient, summed over the batch. Positive phase uses the
/// mean-field posterior, negative phase one Gibbs sample per example:
///   dW_ij ~ sum_x x_i mu_j - sum_x x_i^(k) h_j^(k)
/// Bias terms use the constant-1 unit in place of the opposite layer.
inline RbmGradient cd_gradient(const Rbm& model, const Matrix& batch, int k, Rng& rng) {
    if (batch.rows() == 0) throw std::invalid_argument("cd_gradient: empty batch");
    RbmGradient grad(model);
    for (std::size_t row = 0; row < batch.rows(); ++row) {
        const Vector x = batch.row_copy(row);
        const BernoulliProfile mu = hidden_conditional(model, x);
        const CdSample neg = gibbs_cd_k(model, x, k, rng);
        for (std::size_t i = 0; i < model.n_visible(); ++i) {
            double* w = grad.weights.row(i);
            const double xi = x[i];
            const double ni = neg.visible_k[i];
            for (std::size_t j = 0; j < model.n_hidden(); ++j)
                w[j] += xi * mu[j] - ni * neg.hidden_k[j];
        }
        for (std::size_t j = 0; j < model.n_hidden(); ++j)
            grad.hidden_bias[j] += mu[j] - neg.hidden_k[j];
        for (std::size_t i = 0; i < model.n_visible(); ++i)
            grad.visible_bias[i] += x[i] - neg.visible_k[i];
    }
    return grad;
}

namespace detail {

/// Posterior profiles for every row of a batch.
inline std::vector<BernoulliProfile> batch_posteriors(const Rbm& model, const Matrix& batch) {
    std::vector<BernoulliProfile> mus;
    mus.reserve(batch.rows());
    for (std::size_t row = 0; row < batch.rows(); ++row)
        mus.push_back(mean_field_posterior(model, batch.row_copy(row)));
    return mus;
}

} // namespace detail

/// Gradient of the diversifying term sum_pairs D_H(Q_p, Q_q) w.r.t. the
/// parameters, in the convention where the global 1/2 of the per-pair
/// derivative is absorbed into the trade-off coefficient. Entry (i,j) per
/// pair:
///   sqrt(mb_p mb_q)(m_p x_p_i + m_q x_q_i) - sqrt(m_p m_q)(mb_p x_p_i + mb_q x_q_i)
/// with m = mu^j, mb = 1-mu^j. Equals 2x hellinger_grad_pair summed over
/// pairs. Hidden biases use x = 1; visible biases are untouched (the
/// regularizer reaches the parameters only through the hidden posterior).
inline RbmGradient dr_gradient(const Rbm& model, const Matrix& batch, const PairSet& pairs) {
    RbmGradient grad(model);
    if (pairs.empty()) return grad;

    const auto mus = detail::batch_posteriors(model, batch);
    const std::size_t n_hidden = model.n_hidden();
    const std::size_t n_visible = model.n_visible();
    Vector coeff_p(n_hidden), coeff_q(n_hidden);

    for (const auto& [p, q] : pairs.pairs) {
        if (p >= batch.rows() || q >= batch.rows())
            throw std::out_of_range("dr_gradient: pair index outside batch");
        const BernoulliProfile& mu_p = mus[p];
        const BernoulliProfile& mu_q = mus[q];
        for (std::size_t j = 0; j < n_hidden; ++j) {
            const double root_off = std::sqrt((1.0 - mu_p[j]) * (1.0 - mu_q[j]));
            const double root_on = std::sqrt(mu_p[j] * mu_q[j]);
            coeff_p[j] = root_off * mu_p[j] - root_on * (1.0 - mu_p[j]);
            coeff_q[j] = root_off * mu_q[j] - root_on * (1.0 - mu_q[j]);
            grad.hidden_bias[j] += coeff_p[j] + coeff_q[j];
        }
        const double* x_p = batch.row(p);
        const double* x_q = batch.row(q);
        for (std::size_t i = 0; i < n_visible; ++i) {
            double* w = grad.weights.row(i);
            const double xp = x_p[i];
            const double xq = x_q[i];
            if (xp == 0.0 && xq == 0.0) continue;
            for (std::size_t j = 0; j < n_hidden; ++j) w[j] += coeff_p[j] * xp + coeff_q[j] * xq;
        }
    }
    return grad;
}

/// Free energy F(x) = -b.x - sum_j softplus(z_j); P(x) is proportional to
/// exp(-F(x)).
inline double free_energy(const Rbm& model, const Vector& x) {
    if (x.size() != model.n_visible()) throw std::invalid_argument("free_energy: dimension mismatch");
    double bias_term = 0.0;
    Vector z(model.n_hidden(), 0.0);
    if (model.biases_enabled) {
        bias_term = dot(model.visible_bias, x);
        z = model.hidden_bias;
    }
    for (std::size_t i = 0; i < model.n_visible(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* w = model.weights.row(i);
        for (std::size_t j = 0; j < model.n_hidden(); ++j) z[j] += xi * w[j];
    }
    double hidden_term = 0.0;
    for (double v : z) hidden_term += softplus(v);
    return -bias_term - hidden_term;
}

/// Stochastic pseudo-log-likelihood monitor: one random flip index per
/// example, mean over the batch of n_visible * log sigma(F(x~) - F(x)).
inline double pseudo_log_likelihood(const Rbm& model, const Matrix& batch, Rng& rng) {
    if (batch.rows() == 0) throw std::invalid_argument("pseudo_log_likelihood: empty batch");
    double total = 0.0;
    for (std::size_t row = 0; row < batch.rows(); ++row) {
        Vector x = batch.row_copy(row);
        const std::size_t i = static_cast<std::size_t>(rng.uniform_index(model.n_visible()));
        const double fe = free_energy(model, x);
        x[i] = 1.0 - x[i];
        const double fe_flip = free_energy(model, x);
        total += double(model.n_visible()) * log_sigmoid(fe_flip - fe);
    }
    return total / double(batch.rows());
}

/// Deterministic PLL of one example: sum over every flip index, i.e. the
/// exact sum_i log P(x_i | x_{-i}).
inline double pseudo_log_likelihood_exact(const Rbm& model, const Vector& x_in) {
    Vector x = x_in;
    const double fe = free_energy(model, x);
    double total = 0.0;
    for (std::size_t i = 0; i < model.n_visible(); ++i) {
        x[i] = 1.0 - x[i];
        total += log_sigmoid(free_energy(model, x) - fe);
        x[i] = 1.0 - x[i];
    }
    return total;
}

namespace detail {

inline void check_enumerable(const Rbm& model, const char* where) {
    if (model.n_visible() + model.n_hidden() > 20)
        throw std::invalid_argument(std::string(where) + ": model too large to enumerate");
}

/// All 2^n binary vectors, iterated via the bits of an index counter.
inline Vector binary_vector(std::size_t bits, std::size_t n) {
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = double((bits >> i) & 1u);
    return x;
}

} // namespace detail

/// log Z by enumeration over all visible states.
inline double exact_log_partition(const Rbm& model) {
    detail::check_enumerable(model, "exact_log_partition");
    const std::size_t n = model.n_visible();
    double max_neg_fe = -std::numeric_limits<double>::infinity();
    std::vector<double> neg_fes;
    neg_fes.reserve(std::size_t{1} << n);
    for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
        const double v = -free_energy(model, detail::binary_vector(bits, n));
        neg_fes.push_back(v);
        max_neg_fe = std::max(max_neg_fe, v);
    }
    double sum = 0.0;
    for (double v : neg_fes) sum += std::exp(v - max_neg_fe);
    return max_neg_fe + std::log(sum);
}

/// Exact log-likelihood of a batch by full enumeration (tiny models only).
inline double exact_log_likelihood(const Rbm& model, const Matrix& batch) {
    detail::check_enumerable(model, "exact_log_likelihood");
    const double log_z = exact_log_partition(model);
    double total = 0.0;
    for (std::size_t row = 0; row < batch.rows(); ++row)
        total += -free_energy(model, batch.row_copy(row)) - log_z;
    return total;
}

/// P(h_j = 1 | x) by brute-force enumeration over hidden states. Oracle for
/// mean_field_posterior.
inline Vector exact_hidden_marginals(const Rbm& model, const Vector& x) {
    detail::check_enumerable(model, "exact_hidden_marginals");
    const std::size_t m = model.n_hidden();
    Vector marginals(m, 0.0);
    double z_cond = 0.0;
    for (std::size_t bits = 0; bits < (std::size_t{1} << m); ++bits) {
        const Vector h = detail::binary_vector(bits, m);
        double energy = model.biases_enabled ? -dot(model.visible_bias, x) - dot(model.hidden_bias, h) : 0.0;
        for (std::size_t i = 0; i < model.n_visible(); ++i) {
            if (x[i] == 0.0) continue;
            const double* w = model.weights.row(i);
            for (std::size_t j = 0; j < m; ++j) energy -= x[i] * w[j] * h[j];
        }
        const double weight = std::exp(-energy);
        z_cond += weight;
        for (std::size_t j = 0; j < m; ++j) marginals[j] += weight * h[j];
    }
    for (double& v : marginals) v /= z_cond;
    return marginals;
}

/// Model expectations E[x_i h_j], E[x_i], E[h_j] by enumeration over visible
/// states (the hidden sum is analytic).
inline RbmGradient exact_model_expectation(const Rbm& model) {
    detail::check_enumerable(model, "exact_model_expectation");
    const std::size_t n = model.n_visible();
    const double log_z = exact_log_partition(model);
    RbmGradient expectation(model);
    for (std::size_t bits = 0; bits < (std::size_t{1} << n); ++bits) {
        const Vector x = detail::binary_vector(bits, n);
        const double px = std::exp(-free_energy(model, x) - log_z);
        const BernoulliProfile mu = hidden_conditional(model, x);
        for (std::size_t i = 0; i < n; ++i) {
            if (x[i] == 0.0) continue;
            double* w = expectation.weights.row(i);
            for (std::size_t j = 0; j < model.n_hidden(); ++j) w[j] += px * mu[j];
            expectation.visible_bias[i] += px;
        }
        for (std::size_t j = 0; j < model.n_hidden(); ++j) expectation.hidden_bias[j] += px * mu[j];
    }
    return expectation;
}

/// Likelihood gradient with BOTH phases exact (enumerated negative phase);
/// matches finite differences of exact_log_likelihood on tiny models.
inline RbmGradient exact_gradient(const Rbm& model, const Matrix& batch) {
    RbmGradient grad(model);
    const RbmGradient expectation = exact_model_expectation(model);
    const double count = double(batch.rows());
    for (std::size_t row = 0; row < batch.rows(); ++row) {
        const Vector x = batch.row_copy(row);
        const BernoulliProfile mu = hidden_conditional(model, x);
        for (std::size_t i = 0; i < model.n_visible(); ++i) {
            if (x[i] == 0.0) continue;
            double* w = grad.weights.row(i);
            for (std::size_t j = 0; j < model.n_hidden(); ++j) w[j] += mu[j];
            grad.visible_bias[i] += 1.0;
        }
        for (std::size_t j = 0; j < model.n_hidden(); ++j) grad.hidden_bias[j] += mu[j];
    }
    grad.weights.axpy(-count, expectation.weights);
    axpy(grad.visible_bias, -count, expectation.visible_bias);
    axpy(grad.hidden_bias, -count, expectation.hidden_bias);
    return grad;
}

/// Plain CD-k ascent step (no side information anywhere on this path).
inline RbmUpdateMetrics cd_update(Rbm& model, const Matrix& batch, double lr, int k, Rng& rng) {
    const RbmGradient grad = cd_gradient(model, batch, k, rng);
    RbmUpdateMetrics metrics;
    metrics.pll = pseudo_log_likelihood(model, batch, rng);
    model.weights.axpy(lr, grad.weights);
    if (model.biases_enabled) {
        axpy(model.visible_bias, lr, grad.visible_bias);
        axpy(model.hidden_bias, lr, grad.hidden_bias);
    }
    return metrics;
}

/// DR-regularized ascent step on r(theta) = log-likelihood + alpha * sum D_H:
///   theta <- theta + lr * (cd_gradient + alpha * dr_gradient)
/// Pairs come from the labels of the current batch. Draws from rng exactly as
/// cd_update does, so alpha = 0 reproduces the plain CD trajectory bit for
/// bit.
inline RbmUpdateMetrics regularized_update(Rbm& model, const Matrix& batch, const std::vector<int>& labels,
                                           double lr, double alpha, int k, Rng& rng) {
    if (!(lr > 0.0)) throw std::invalid_argument("regularized_update: lr must be positive");
    if (alpha < 0.0) throw std::invalid_argument("regularized_update: alpha must be >= 0");
    if (labels.size() != batch.rows())
        throw std::invalid_argument("regularized_update: labels/batch size mismatch");

    const PairSet pairs = pairs_from_batch(labels);
    RbmGradient grad = cd_gradient(model, batch, k, rng);

    RbmUpdateMetrics metrics;
    if (!pairs.empty()) {
        const auto mus = detail::batch_posteriors(model, batch);
        double dr_sum = 0.0;
        for (const auto& [p, q] : pairs.pairs) dr_sum += hellinger_total(mus[p], mus[q]);
        metrics.mean_dr = dr_sum / double(pairs.size());
        if (alpha != 0.0) {
            const RbmGradient dr = dr_gradient(model, batch, pairs);
            grad.weights.axpy(alpha, dr.weights);
            axpy(grad.hidden_bias, alpha, dr.hidden_bias);
        }
    }
    metrics.pll = pseudo_log_likelihood(model, batch, rng);

    model.weights.axpy(lr, grad.weights);
    if (model.biases_enabled) {
        axpy(model.visible_bias, lr, grad.visible_bias);
        axpy(model.hidden_bias, lr, grad.hidden_bias);
    }
    return metrics;
}

} // namespace drlearn

#endif
