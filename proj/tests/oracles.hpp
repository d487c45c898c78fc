// Shared helpers for the unit tests: random inputs and independent reference
// computations that do not reuse library code paths.
#pragma once

#include <gcdr/matrix.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using gcdr::DenseMatrix;

inline DenseMatrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& g, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    DenseMatrix m(r, c);
    for (double& v : m.data()) {
        v = d(g);
    }
    return m;
}

inline DenseMatrix random_symmetric(std::size_t n, std::mt19937_64& g) {
    DenseMatrix a = random_matrix(n, n, g);
    DenseMatrix s(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            s(i, j) = 0.5 * (a(i, j) + a(j, i));
        }
    }
    return s;
}

/// Positive off-diagonal matrix with zero diagonal.
inline DenseMatrix random_kernel(std::size_t n, std::mt19937_64& g, double lo = 0.05, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    DenseMatrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            k(i, j) = i == j ? 0.0 : d(g);
        }
    }
    return k;
}

inline DenseMatrix naive_matmul(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            long double s = 0;
            for (std::size_t k = 0; k < a.cols(); ++k) {
                s += static_cast<long double>(a(i, k)) * b(k, j);
            }
            c(i, j) = static_cast<double>(s);
        }
    }
    return c;
}

inline double sqdist(const DenseMatrix& x, std::size_t i, std::size_t j) {
    double s = 0;
    for (std::size_t k = 0; k < x.cols(); ++k) {
        const double d = x(i, k) - x(j, k);
        s += d * d;
    }
    return s;
}

/// Central finite-difference gradient of `f` at `z` with step `h`.
inline DenseMatrix numeric_gradient(const std::function<double(const DenseMatrix&)>& f, const DenseMatrix& z,
                                    double h = 1e-5) {
    DenseMatrix g(z.rows(), z.cols());
    for (std::size_t k = 0; k < z.size(); ++k) {
        DenseMatrix zp = z;
        DenseMatrix zm = z;
        zp.data()[k] += h;
        zm.data()[k] -= h;
        g.data()[k] = (f(zp) - f(zm)) / (2 * h);
    }
    return g;
}

/**
 * Worst per-coordinate ratio |a - n| / (rel * |n| + abs); at most 1 means every
 * coordinate agrees to `rel` relative error, with `abs` covering the round-off
 * floor of the central difference itself.
 */
inline double gradient_ratio(const DenseMatrix& analytic, const DenseMatrix& numeric, double rel = 1e-5,
                             double abs = 1e-9) {
    double worst = 0;
    for (std::size_t k = 0; k < analytic.size(); ++k) {
        const double n = numeric.data()[k];
        worst = std::max(worst, std::abs(analytic.data()[k] - n) / (rel * std::abs(n) + abs));
    }
    return worst;
}

inline double rel_frobenius(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix d = a;
    d -= b;
    return d.frobenius() / std::max(1e-300, a.frobenius());
}

} // namespace oracle
