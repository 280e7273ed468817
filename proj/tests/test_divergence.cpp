#include "drlearn/divergence.hpp"
#include "drlearn/numerics.hpp"
#include "drlearn/rbm.hpp"
#include "drlearn/rng.hpp"

#include <cmath>

#include <gtest/gtest.h>

using namespace drlearn;

namespace {
const auto kl_f = [](double t) { return t <= 0.0 ? 0.0 : t * std::log(t); };
const auto hellinger_f = [](double t) { return 1.0 - std::sqrt(t); };
} // namespace

TEST(FDivergence, ZeroAtEqualDistributions) {
    const Vector p = {0.3, 0.2, 0.5};
    EXPECT_NEAR(f_divergence(kl_f, p, p), 0.0, 1e-12);
    EXPECT_NEAR(f_divergence(hellinger_f, p, p), 0.0, 1e-12);
}

TEST(FDivergence, KullbackLeiblerValue) {
    // KL((.5,.5) || (.25,.75)) = .5 ln 2 + .5 ln(2/3)
    const double expected = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
    EXPECT_NEAR(f_divergence(kl_f, {0.5, 0.5}, {0.25, 0.75}), expected, 1e-12);
    EXPECT_NEAR(expected, 0.1438, 5e-5);
}

TEST(FDivergence, HellingerDisjointSupport) {
    EXPECT_NEAR(f_divergence(hellinger_f, {1.0, 0.0}, {0.0, 1.0}, /*f_slope_at_inf=*/0.0), 1.0, 1e-12);
}

TEST(FDivergence, RejectsBadInputs) {
    EXPECT_THROW(f_divergence(kl_f, {0.5, 0.5}, {1.0}), std::invalid_argument);
    EXPECT_THROW(f_divergence(kl_f, {0.7, 0.7}, {0.5, 0.5}), std::invalid_argument);
    const auto not_zero_at_one = [](double t) { return t; };
    EXPECT_THROW(f_divergence(not_zero_at_one, {0.5, 0.5}, {0.5, 0.5}), std::invalid_argument);
}

TEST(HellingerUnit, KnownValues) {
    EXPECT_DOUBLE_EQ(hellinger_unit(0.5, 0.5), 0.0);
    EXPECT_DOUBLE_EQ(hellinger_unit(1.0, 0.0), 1.0);
    EXPECT_NEAR(hellinger_unit(0.8, 0.2), 0.2, 1e-12); // 1 - 2 sqrt(0.16)
}

TEST(HellingerUnit, SymmetricAndBounded) {
    Rng rng(3);
    for (int i = 0; i < 5000; ++i) {
        const double a = rng.uniform();
        const double b = rng.uniform();
        const double d = hellinger_unit(a, b);
        EXPECT_DOUBLE_EQ(d, hellinger_unit(b, a));
        EXPECT_GE(d, 0.0);
        EXPECT_LE(d, 1.0);
    }
}

TEST(HellingerUnit, ZeroOnlyAtEqualMeans) {
    EXPECT_DOUBLE_EQ(hellinger_unit(0.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(hellinger_unit(1.0, 1.0), 0.0);
    Rng rng(4);
    for (int i = 0; i < 5000; ++i) {
        const double a = rng.uniform();
        const double b = rng.uniform();
        if (std::abs(a - b) > 1e-3) EXPECT_GT(hellinger_unit(a, b), 0.0);
    }
}

TEST(HellingerUnit, AgreesWithFDivergence) {
    Rng rng(6);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform();
        const double b = rng.uniform();
        const double via_f = f_divergence(hellinger_f, {a, 1.0 - a}, {b, 1.0 - b}, 0.0);
        EXPECT_NEAR(hellinger_unit(a, b), via_f, 1e-12);
    }
}

TEST(HellingerTotal, KnownValues) {
    EXPECT_DOUBLE_EQ(hellinger_total({0.3, 0.7}, {0.3, 0.7}), 0.0);
    EXPECT_DOUBLE_EQ(hellinger_total({1.0, 1.0}, {0.0, 0.0}), 2.0);
    EXPECT_NEAR(hellinger_total({0.8, 0.5}, {0.2, 0.5}), 0.2, 1e-12);
    EXPECT_THROW(hellinger_total({0.5}, {0.5, 0.5}), std::invalid_argument);
}

TEST(HellingerGradPair, ZeroAtIdenticalInputs) {
    Rng rng(8);
    Rbm model = make_rbm(4, 3, rng);
    for (std::size_t i = 0; i < model.weights.size(); ++i) model.weights.data()[i] = rng.gaussian();
    const Vector x = {1.0, 0.0, 1.0, 1.0};
    const BernoulliProfile mu = hidden_conditional(model, x);
    const Matrix grad = hellinger_grad_pair(x, x, mu, mu);
    for (std::size_t i = 0; i < grad.size(); ++i) EXPECT_DOUBLE_EQ(grad.data()[i], 0.0);
}

TEST(HellingerGradPair, ZeroWeightsSaturationPoint) {
    // all mu = 0.5: both bracket terms coincide, every entry cancels
    const Vector x_p = {1.0, 0.0};
    const Vector x_q = {0.0, 1.0};
    const BernoulliProfile mu = {0.5, 0.5, 0.5};
    const Matrix grad = hellinger_grad_pair(x_p, x_q, mu, mu);
    for (std::size_t i = 0; i < grad.size(); ++i) EXPECT_DOUBLE_EQ(grad.data()[i], 0.0);
}

TEST(HellingerGradPair, MatchesFiniteDifferences) {
    Rng rng(10);
    for (int instance = 0; instance < 100; ++instance) {
        Rbm model = make_rbm(4, 3, rng);
        for (std::size_t i = 0; i < model.weights.size(); ++i) model.weights.data()[i] = rng.gaussian();
        Vector x_p(4), x_q(4);
        for (double& v : x_p) v = rng.uniform();
        for (double& v : x_q) v = rng.uniform();

        const Matrix analytic =
            hellinger_grad_pair(x_p, x_q, hidden_conditional(model, x_p), hidden_conditional(model, x_q));

        Rbm probe = model;
        const auto f = [&](const Vector& w) {
            for (std::size_t i = 0; i < probe.weights.size(); ++i) probe.weights.data()[i] = w[i];
            return hellinger_total(hidden_conditional(probe, x_p), hidden_conditional(probe, x_q));
        };
        const Vector numeric =
            finite_diff_grad(f, Vector(model.weights.data(), model.weights.data() + model.weights.size()));
        const Vector analytic_flat(analytic.data(), analytic.data() + analytic.size());
        EXPECT_LE(gradient_rel_error(analytic_flat, numeric), 1e-5);
    }
}

TEST(Bhattacharyya, KnownValues) {
    const Vector p = {0.8, 0.2};
    const Vector q = {0.2, 0.8};
    EXPECT_NEAR(bhattacharyya(p, p), 0.0, 1e-12);
    EXPECT_NEAR(bhattacharyya(p, q), -std::log(0.8), 1e-12); // ~0.2231
    EXPECT_TRUE(std::isinf(bhattacharyya({1.0, 0.0}, {0.0, 1.0})));
}

TEST(Bhattacharyya, RelatesToHellinger) {
    Rng rng(12);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform();
        const double b = rng.uniform();
        const double d_h = hellinger_unit(a, b);
        if (d_h >= 1.0) continue;
        EXPECT_NEAR(bhattacharyya({a, 1.0 - a}, {b, 1.0 - b}), -std::log(1.0 - d_h), 1e-9);
    }
}
