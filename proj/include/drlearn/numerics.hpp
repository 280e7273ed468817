#ifndef DRLEARN_NUMERICS_HPP
#define DRLEARN_NUMERICS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "drlearn/matrix.hpp"

namespace drlearn {

/// Logistic function. Inputs are clamped to |z| <= 30 before exponentiation;
/// sigma saturates beyond machine precision there anyway.
inline double sigmoid(double z) {
    z = std::clamp(z, -30.0, 30.0);
    return 1.0 / (1.0 + std::exp(-z));
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
    if (z > 30.0) return z;
    if (z < -30.0) return std::exp(z);
    return std::log1p(std::exp(z));
}

/// log(sigmoid(z)), stable for large negative z.
inline double log_sigmoid(double z) { return -softplus(-z); }

/// In-place softmax over a logits vector.
inline void softmax_inplace(Vector& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - m);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

using ScalarFunction = std::function<double(const Vector&)>;

/// Central-difference gradient of f at params. The oracle every analytic
/// gradient in this library is tested against.
inline Vector finite_diff_grad(const ScalarFunction& f, const Vector& params, double eps = 1e-5) {
    if (!(eps > 0.0)) throw std::invalid_argument("finite_diff_grad: eps must be positive");
    Vector grad(params.size());
    Vector point = params;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = point[i];
        point[i] = saved + eps;
        const double fp = f(point);
        point[i] = saved - eps;
        const double fm = f(point);
        point[i] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw std::runtime_error("finite_diff_grad: non-finite function value at coordinate " +
                                     std::to_string(i));
        grad[i] = (fp - fm) / (2.0 * eps);
    }
    return grad;
}

/// Relative error between two gradients: ||a-b|| / max(||a||, ||b||, floor).
inline double gradient_rel_error(const Vector& a, const Vector& b, double floor = 1e-8) {
    if (a.size() != b.size()) throw std::invalid_argument("gradient_rel_error: length mismatch");
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

} // namespace drlearn

#endif
