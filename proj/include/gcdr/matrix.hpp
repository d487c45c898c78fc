#ifndef GCDR_MATRIX_HPP
#define GCDR_MATRIX_HPP

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

/**
 * @file matrix.hpp
 *
 * @brief Row-major dense matrix of doubles.
 */

namespace gcdr {

/**
 * @brief Dense row-major matrix.
 *
 * Holds the input data, embeddings, kernels and every intermediate quantity.
 * Storage is a single contiguous vector so rows can be viewed as spans.
 */
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw ContractViolation("matrix data length " + std::to_string(data_.size()) +
                                    " does not match shape " + std::to_string(rows_) + "x" +
                                    std::to_string(cols_));
        }
    }

    /// Build from nested rows; all rows must have the same length.
    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) {
                throw ContractViolation("ragged initializer for DenseMatrix");
            }
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix out(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            out(i, i) = 1.0;
        }
        return out;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

    DenseMatrix transpose() const {
        DenseMatrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) {
                out(j, i) = (*this)(i, j);
            }
        }
        return out;
    }

    double max_abs() const {
        double m = 0;
        for (double v : data_) {
            m = std::max(m, std::abs(v));
        }
        return m;
    }

    double frobenius() const {
        double s = 0;
        for (double v : data_) {
            s += v * v;
        }
        return std::sqrt(s);
    }

    double sum() const {
        double s = 0;
        for (double v : data_) {
            s += v;
        }
        return s;
    }

    DenseMatrix& operator+=(const DenseMatrix& other) {
        require_same_shape(other);
        for (std::size_t k = 0; k < data_.size(); ++k) {
            data_[k] += other.data_[k];
        }
        return *this;
    }

    DenseMatrix& operator-=(const DenseMatrix& other) {
        require_same_shape(other);
        for (std::size_t k = 0; k < data_.size(); ++k) {
            data_[k] -= other.data_[k];
        }
        return *this;
    }

    DenseMatrix& operator*=(double s) {
        for (double& v : data_) {
            v *= s;
        }
        return *this;
    }

    friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
    friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
    friend DenseMatrix operator*(DenseMatrix a, double s) { return a *= s; }
    friend DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    void require_same_shape(const DenseMatrix& other) const {
        if (rows_ != other.rows_ || cols_ != other.cols_) {
            throw ContractViolation("shape mismatch: " + std::to_string(rows_) + "x" +
                                    std::to_string(cols_) + " vs " + std::to_string(other.rows_) +
                                    "x" + std::to_string(other.cols_));
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace gcdr

#endif
