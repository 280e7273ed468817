#include "drlearn/numerics.hpp"
#include "drlearn/rng.hpp"

#include <cmath>

#include <gtest/gtest.h>

using namespace drlearn;

TEST(Sigmoid, SymmetryPoint) { EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5); }

TEST(Sigmoid, DirectEvaluation) {
    // 1 / (1 + 1/3)
    EXPECT_NEAR(sigmoid(std::log(3.0)), 0.75, 1e-12);
}

TEST(Sigmoid, ComplementIdentity) {
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        const double z = 80.0 * (rng.uniform() - 0.5);
        EXPECT_NEAR(sigmoid(z) + sigmoid(-z), 1.0, 1e-12);
    }
}

TEST(Sigmoid, SaturatesWithoutOverflow) {
    EXPECT_GT(sigmoid(1e6), 0.999999);
    EXPECT_LT(sigmoid(-1e6), 1e-6);
    EXPECT_TRUE(std::isfinite(sigmoid(1e308)));
}

TEST(FiniteDiff, Quadratic) {
    const auto f = [](const Vector& p) { return p[0] * p[0]; };
    const Vector grad = finite_diff_grad(f, {3.0});
    EXPECT_NEAR(grad[0], 6.0, 1e-6);
}

TEST(FiniteDiff, ConstantFunction) {
    const auto f = [](const Vector&) { return 4.2; };
    const Vector grad = finite_diff_grad(f, {1.0, -2.0, 0.5});
    for (double g : grad) EXPECT_DOUBLE_EQ(g, 0.0);
}

TEST(FiniteDiff, SigmoidDerivativeAtZero) {
    const auto f = [](const Vector& p) { return sigmoid(p[0]); };
    const Vector grad = finite_diff_grad(f, {0.0});
    EXPECT_NEAR(grad[0], 0.25, 1e-6); // sigma'(0) = sigma(1-sigma)
}

TEST(FiniteDiff, MatchesAnalyticDerivativesOnClosedForms) {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const double a = rng.gaussian();
        const double b = rng.gaussian();
        const Vector point = {rng.gaussian(), rng.gaussian()};
        const auto f = [&](const Vector& p) {
            return a * std::sin(p[0]) + b * p[1] * p[1] * p[1];
        };
        const Vector analytic = {a * std::cos(point[0]), 3.0 * b * point[1] * point[1]};
        const Vector numeric = finite_diff_grad(f, point);
        EXPECT_LE(gradient_rel_error(analytic, numeric), 1e-5);
    }
}

TEST(FiniteDiff, RejectsNonPositiveEps) {
    const auto f = [](const Vector& p) { return p[0]; };
    EXPECT_THROW(finite_diff_grad(f, {1.0}, 0.0), std::invalid_argument);
}

TEST(FiniteDiff, ReportsNonFiniteEvaluations) {
    const auto f = [](const Vector& p) { return std::log(p[0]); };
    EXPECT_THROW(finite_diff_grad(f, {0.0}), std::runtime_error);
}

TEST(RngTest, SameSeedSameStream) {
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
    Rng c(123), d(123);
    for (int i = 0; i < 100; ++i) {
        ASSERT_EQ(c.uniform(), d.uniform());
        ASSERT_EQ(c.gaussian(), d.gaussian());
    }
}

TEST(RngTest, DifferentStreamsDiffer) {
    Rng a = Rng::derive(123, 0);
    Rng b = Rng::derive(123, 1);
    int equal = 0;
    for (int i = 0; i < 100; ++i) equal += a.next_u64() == b.next_u64();
    EXPECT_EQ(equal, 0);
}

TEST(RngTest, UniformIndexInRange) {
    Rng rng(9);
    for (int i = 0; i < 10000; ++i) EXPECT_LT(rng.uniform_index(7), 7u);
}

TEST(RngTest, GaussianMoments) {
    Rng rng(42);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        sum += g;
        sq += g * g;
    }
    EXPECT_NEAR(sum / n, 0.0, 0.01);
    EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Softmax, NormalizesAndPreservesArgmax) {
    Vector v = {1.0, 3.0, 2.0};
    softmax_inplace(v);
    EXPECT_NEAR(v[0] + v[1] + v[2], 1.0, 1e-12);
    EXPECT_GT(v[1], v[2]);
    EXPECT_GT(v[2], v[0]);
}
