#ifndef DRLEARN_GRADCHECK_HPP
#define DRLEARN_GRADCHECK_HPP

#include <cstdio>
#include <string>
#include <vector>

#include "drlearn/mlp.hpp"
#include "drlearn/numerics.hpp"
#include "drlearn/rbm.hpp"
#include "drlearn/sideinfo.hpp"
#include "drlearn/vae.hpp"

namespace drlearn {

/// Flattened parameter vectors for finite-difference probing. Layout is
/// documented per overload and must match between pack and unpack.

// rbm: weights row-major, visible_bias, hidden_bias
inline Vector pack_params(const Rbm& model) {
    Vector params;
    params.insert(params.end(), model.weights.data(), model.weights.data() + model.weights.size());
    params.insert(params.end(), model.visible_bias.begin(), model.visible_bias.end());
    params.insert(params.end(), model.hidden_bias.begin(), model.hidden_bias.end());
    return params;
}

inline void unpack_params(const Vector& params, Rbm& model) {
    std::size_t at = 0;
    for (std::size_t i = 0; i < model.weights.size(); ++i) model.weights.data()[i] = params[at++];
    for (double& v : model.visible_bias) v = params[at++];
    for (double& v : model.hidden_bias) v = params[at++];
}

inline Vector pack_params(const RbmGradient& grad) {
    Vector params;
    params.insert(params.end(), grad.weights.data(), grad.weights.data() + grad.weights.size());
    params.insert(params.end(), grad.visible_bias.begin(), grad.visible_bias.end());
    params.insert(params.end(), grad.hidden_bias.begin(), grad.hidden_bias.end());
    return params;
}

// mlp: per layer, weights row-major then bias
inline Vector pack_params(const Mlp& model) {
    Vector params;
    for (const auto& layer : model.layers) {
        params.insert(params.end(), layer.weights.data(), layer.weights.data() + layer.weights.size());
        params.insert(params.end(), layer.bias.begin(), layer.bias.end());
    }
    return params;
}

inline void unpack_params(const Vector& params, Mlp& model) {
    std::size_t at = 0;
    for (auto& layer : model.layers) {
        for (std::size_t i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = params[at++];
        for (double& v : layer.bias) v = params[at++];
    }
}

inline Vector pack_params(const MlpGradient& grad) {
    Vector params;
    for (const auto& layer : grad.layers) {
        params.insert(params.end(), layer.weights.data(), layer.weights.data() + layer.weights.size());
        params.insert(params.end(), layer.bias.begin(), layer.bias.end());
    }
    return params;
}

// vae: encoder then decoder, mlp layout each
inline Vector pack_params(const VaeModel& model) {
    Vector params = pack_params(model.encoder);
    const Vector dec = pack_params(model.decoder);
    params.insert(params.end(), dec.begin(), dec.end());
    return params;
}

inline void unpack_params(const Vector& params, VaeModel& model) {
    const std::size_t enc_size = pack_params(model.encoder).size();
    Vector enc(params.begin(), params.begin() + enc_size);
    Vector dec(params.begin() + enc_size, params.end());
    unpack_params(enc, model.encoder);
    unpack_params(dec, model.decoder);
}

inline Vector pack_params(const VaeGradient& grad) {
    Vector params = pack_params(grad.encoder);
    const Vector dec = pack_params(grad.decoder);
    params.insert(params.end(), dec.begin(), dec.end());
    return params;
}

/// One named oracle comparison.
struct GradCheckResult {
    std::string name;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    int instances = 0;

    bool passed() const { return max_rel_error <= tolerance; }
};

namespace gradcheck {

inline Matrix random_binary_batch(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix batch(rows, cols);
    for (std::size_t i = 0; i < batch.size(); ++i) batch.data()[i] = rng.bernoulli(0.5);
    return batch;
}

/// d hellinger_total(posterior(x_p), posterior(x_q)) / d weights vs central
/// differences over the weight matrix.
inline GradCheckResult check_hellinger_grad(int instances, Rng& rng, double tolerance = 1e-5) {
    GradCheckResult result{"hellinger_grad_pair", 0.0, tolerance, instances};
    for (int inst = 0; inst < instances; ++inst) {
        const std::size_t n_visible = 2 + rng.uniform_index(4);
        const std::size_t n_hidden = 1 + rng.uniform_index(4);
        Rbm model = make_rbm(n_visible, n_hidden, rng);
        for (std::size_t i = 0; i < model.weights.size(); ++i) model.weights.data()[i] = rng.gaussian();
        for (double& v : model.hidden_bias) v = 0.5 * rng.gaussian();
        Vector x_p(n_visible), x_q(n_visible);
        for (double& v : x_p) v = rng.uniform();
        for (double& v : x_q) v = rng.uniform();

        const BernoulliProfile mu_p = hidden_conditional(model, x_p);
        const BernoulliProfile mu_q = hidden_conditional(model, x_q);
        const Matrix analytic = hellinger_grad_pair(x_p, x_q, mu_p, mu_q);
        Vector analytic_flat(analytic.data(), analytic.data() + analytic.size());

        Vector weights(model.weights.data(), model.weights.data() + model.weights.size());
        Rbm probe = model;
        const auto f = [&](const Vector& w) {
            for (std::size_t i = 0; i < probe.weights.size(); ++i) probe.weights.data()[i] = w[i];
            return hellinger_total(hidden_conditional(probe, x_p), hidden_conditional(probe, x_q));
        };
        const Vector numeric = finite_diff_grad(f, weights);
        result.max_rel_error = std::max(result.max_rel_error, gradient_rel_error(analytic_flat, numeric));
    }
    return result;
}

/// rbm dr_gradient vs 2x central differences of the pair-summed Hellinger
/// term, over weights and hidden biases.
inline GradCheckResult check_rbm_dr_gradient(int instances, Rng& rng, double tolerance = 1e-5) {
    GradCheckResult result{"rbm_dr_gradient", 0.0, tolerance, instances};
    for (int inst = 0; inst < instances; ++inst) {
        const std::size_t n_visible = 3 + rng.uniform_index(3);
        const std::size_t n_hidden = 2 + rng.uniform_index(3);
        Rbm model = make_rbm(n_visible, n_hidden, rng);
        for (std::size_t i = 0; i < model.weights.size(); ++i) model.weights.data()[i] = rng.gaussian();
        for (double& v : model.hidden_bias) v = 0.5 * rng.gaussian();

        const Matrix batch = random_binary_batch(5, n_visible, rng);
        const std::vector<int> labels = {0, 1, 0, 1, 2};
        const PairSet pairs = pairs_from_batch(labels);

        const RbmGradient analytic = dr_gradient(model, batch, pairs);
        Vector analytic_flat = pack_params(analytic);

        Rbm probe = model;
        const auto f = [&](const Vector& params) {
            unpack_params(params, probe);
            double total = 0.0;
            for (const auto& [p, q] : pairs.pairs)
                total += hellinger_total(mean_field_posterior(probe, batch.row_copy(p)),
                                         mean_field_posterior(probe, batch.row_copy(q)));
            return 2.0 * total; // the absorbed 1/2
        };
        const Vector numeric = finite_diff_grad(f, pack_params(model));
        // dr_gradient leaves visible biases at zero by contract; the numeric
        // gradient is zero there too since the posterior ignores them
        result.max_rel_error = std::max(result.max_rel_error, gradient_rel_error(analytic_flat, numeric));
    }
    return result;
}

/// Likelihood gradient with exact phases vs central differences of
/// exact_log_likelihood on enumerable models.
inline GradCheckResult check_rbm_exact_gradient(int instances, Rng& rng, double tolerance = 1e-5) {
    GradCheckResult result{"rbm_exact_likelihood_gradient", 0.0, tolerance, instances};
    for (int inst = 0; inst < instances; ++inst) {
        const std::size_t n_visible = 2 + rng.uniform_index(3);
        const std::size_t n_hidden = 1 + rng.uniform_index(3);
        Rbm model = make_rbm(n_visible, n_hidden, rng);
        for (std::size_t i = 0; i < model.weights.size(); ++i) model.weights.data()[i] = rng.gaussian();
        for (double& v : model.visible_bias) v = 0.5 * rng.gaussian();
        for (double& v : model.hidden_bias) v = 0.5 * rng.gaussian();
        const Matrix batch = random_binary_batch(4, n_visible, rng);

        const Vector analytic_flat = pack_params(exact_gradient(model, batch));
        Rbm probe = model;
        const auto f = [&](const Vector& params) {
            unpack_params(params, probe);
            return exact_log_likelihood(probe, batch);
        };
        const Vector numeric = finite_diff_grad(f, pack_params(model));
        result.max_rel_error = std::max(result.max_rel_error, gradient_rel_error(analytic_flat, numeric));
    }
    return result;
}

/// Full DNN objective gradient (cross-entropy plus DR terms) vs central
/// differences.
inline GradCheckResult check_mlp_gradient(int instances, Rng& rng, double tolerance = 1e-4) {
    GradCheckResult result{"dnn_backprop_with_dr", 0.0, tolerance, instances};
    for (int inst = 0; inst < instances; ++inst) {
        Mlp model = make_mlp({4, 3, 2, 2}, rng, 0.5);
        Matrix batch(6, 4);
        for (std::size_t i = 0; i < batch.size(); ++i) batch.data()[i] = rng.uniform();
        const std::vector<int> labels = {0, 1, 0, 1, 1, 0};
        const PairSet pairs = pairs_from_batch(labels);
        DrSchedule schedule;
        schedule.alpha0 = 0.7;
        schedule.decay = 0.9;
        schedule.pair_norm = inst % 3 == 0   ? PairTermNorm::kSum
                             : inst % 3 == 1 ? PairTermNorm::kPairMean
                                             : PairTermNorm::kBatchSquare;
        const int epoch = int(rng.uniform_index(3));
        const double omega = inst % 2 == 0 ? 0.0 : 0.05;

        const Vector analytic_flat =
            pack_params(objective_gradient(model, batch, labels, pairs, schedule, epoch, omega));
        Mlp probe = model;
        const auto f = [&](const Vector& params) {
            unpack_params(params, probe);
            return objective(probe, batch, labels, pairs, schedule, epoch, omega);
        };
        const Vector numeric = finite_diff_grad(f, pack_params(model));
        result.max_rel_error = std::max(result.max_rel_error, gradient_rel_error(analytic_flat, numeric));
    }
    return result;
}

/// VAE objective gradient with frozen noise vs central differences, cycling
/// through the three DR modes.
inline GradCheckResult check_vae_gradient(int instances, Rng& rng, double tolerance = 1e-4) {
    GradCheckResult result{"vae_frozen_noise_gradient", 0.0, tolerance, instances};
    for (int inst = 0; inst < instances; ++inst) {
        VaeModel model = make_vae(6, 4, 2, rng, 0.4);
        Matrix batch = random_binary_batch(5, 6, rng);
        const std::vector<int> labels = {0, 1, 1, 0, 2};
        const PairSet pairs = pairs_from_batch(labels);
        const VaeDrMode mode = inst % 3 == 0   ? VaeDrMode::kNone
                               : inst % 3 == 1 ? VaeDrMode::kCrossEntropy
                                               : VaeDrMode::kL2;
        const double alpha = mode == VaeDrMode::kNone ? 0.0 : 0.6;
        std::vector<Vector> eps_list(batch.rows());
        for (auto& eps : eps_list) {
            eps.resize(model.latent_dim);
            for (double& e : eps) e = rng.gaussian();
        }

        const Vector analytic_flat =
            pack_params(vae_objective_gradient_frozen(model, batch, pairs, alpha, mode, eps_list));
        VaeModel probe = model;
        const auto f = [&](const Vector& params) {
            unpack_params(params, probe);
            return vae_objective_frozen(probe, batch, pairs, alpha, mode, eps_list);
        };
        const Vector numeric = finite_diff_grad(f, pack_params(model));
        result.max_rel_error = std::max(result.max_rel_error, gradient_rel_error(analytic_flat, numeric));
    }
    return result;
}

/// The whole battery at the tolerances used by the gradcheck CLI command.
inline std::vector<GradCheckResult> run_battery(int instances, std::uint64_t seed) {
    std::vector<GradCheckResult> results;
    Rng rng(seed);
    results.push_back(check_hellinger_grad(instances, rng));
    results.push_back(check_rbm_dr_gradient(instances, rng));
    results.push_back(check_rbm_exact_gradient(instances, rng));
    results.push_back(check_mlp_gradient(instances, rng));
    results.push_back(check_vae_gradient(instances, rng));
    return results;
}

} // namespace gradcheck
} // namespace drlearn

#endif
