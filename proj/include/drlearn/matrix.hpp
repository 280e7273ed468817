#ifndef DRLEARN_MATRIX_HPP
#define DRLEARN_MATRIX_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace drlearn {

using Vector = std::vector<double>;

/// Row-major dense matrix of doubles. All model parameters, activations and
/// gradients in this library live in Matrix/Vector; there is deliberately no
/// general tensor machinery.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return values_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    double* row(std::size_t r) { return values_.data() + r * cols_; }
    const double* row(std::size_t r) const { return values_.data() + r * cols_; }

    Vector row_copy(std::size_t r) const {
        return Vector(row(r), row(r) + cols_);
    }

    void fill(double v) { values_.assign(values_.size(), v); }

    Matrix& operator+=(const Matrix& other) {
        check_same_shape(other);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
        return *this;
    }

    Matrix& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }

    /// this += s * other
    void axpy(double s, const Matrix& other) {
        check_same_shape(other);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
    }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && values_ == other.values_;
    }

private:
    void check_same_shape(const Matrix& other) const {
        if (rows_ != other.rows_ || cols_ != other.cols_)
            throw std::invalid_argument("Matrix shape mismatch: " + std::to_string(rows_) + "x" +
                                        std::to_string(cols_) + " vs " + std::to_string(other.rows_) +
                                        "x" + std::to_string(other.cols_));
    }

    std::size_t rows_, cols_;
    Vector values_;
};

inline void axpy(Vector& y, double s, const Vector& x) {
    if (y.size() != x.size()) throw std::invalid_argument("Vector length mismatch in axpy");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

inline double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("Vector length mismatch in dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace drlearn

#endif
