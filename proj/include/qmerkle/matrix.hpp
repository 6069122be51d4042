#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace qmerkle::linalg {

template <typename T>
struct scalar_traits {
    static double abs2(T v) { return double(v) * double(v); }
    static T conj(T v) { return v; }
};

template <>
struct scalar_traits<std::complex<double>> {
    static double abs2(std::complex<double> v) { return std::norm(v); }
    static std::complex<double> conj(std::complex<double> v) { return std::conj(v); }
};

/// Dense row-major matrix over double or complex<double>.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, T{}) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    static Matrix ones(std::size_t rows, std::size_t cols) {
        Matrix m(rows, cols);
        for (auto& v : m.data_) v = T{1};
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    /// out = M * in
    void apply(std::span<const T> in, std::span<T> out) const {
        if (in.size() != cols_ || out.size() != rows_)
            throw std::invalid_argument("Matrix::apply: dimension mismatch");
        for (std::size_t r = 0; r < rows_; ++r) {
            T acc{};
            const T* row = data_.data() + r * cols_;
            for (std::size_t c = 0; c < cols_; ++c) acc += row[c] * in[c];
            out[r] = acc;
        }
    }

    /// out = M^H * in (conjugate transpose; plain transpose over reals)
    void apply_adjoint(std::span<const T> in, std::span<T> out) const {
        if (in.size() != rows_ || out.size() != cols_)
            throw std::invalid_argument("Matrix::apply_adjoint: dimension mismatch");
        for (auto& v : out) v = T{};
        for (std::size_t r = 0; r < rows_; ++r) {
            const T* row = data_.data() + r * cols_;
            const T x = in[r];
            for (std::size_t c = 0; c < cols_; ++c)
                out[c] += scalar_traits<T>::conj(row[c]) * x;
        }
    }

    double frobenius() const {
        double acc = 0;
        for (const auto& v : data_) acc += scalar_traits<T>::abs2(v);
        return std::sqrt(acc);
    }

    Matrix adjoint() const {
        Matrix out(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c)
                out(c, r) = scalar_traits<T>::conj((*this)(r, c));
        return out;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("Matrix product: shape");
        Matrix out(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T aik = a(i, k);
                if (aik == T{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
            }
        return out;
    }

    friend Matrix operator-(const Matrix& a, const Matrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            throw std::invalid_argument("Matrix difference: shape");
        Matrix out = a;
        for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= b.data_[i];
        return out;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

using RMatrix = Matrix<double>;
using CMatrix = Matrix<std::complex<double>>;

/// Compensated accumulator for long sums of doubles.
class KahanSum {
public:
    void add(double v) {
        const double y = v - carry_;
        const double t = total_ + y;
        carry_ = (t - total_) - y;
        total_ = t;
    }
    double value() const { return total_; }

private:
    double total_ = 0.0, carry_ = 0.0;
};

} // namespace qmerkle::linalg
