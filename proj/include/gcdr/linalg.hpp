#ifndef GCDR_LINALG_HPP
#define GCDR_LINALG_HPP

#include "error.hpp"
#include "matrix.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

/**
 * @file linalg.hpp
 *
 * @brief The dense linear algebra needed by the rest of the library.
 */

namespace gcdr {

struct SymEigResult {
    /// Sorted in descending order.
    std::vector<double> values;
    /// Column `i` is the unit eigenvector paired with `values[i]`.
    DenseMatrix vectors;
};

struct JacobiOptions {
    /// Stop when the off-diagonal Frobenius norm drops below `tolerance * ||A||_F`.
    double tolerance = 1e-12;
    int max_sweeps = 100;
};

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) {
        throw ContractViolation("matmul: inner dimensions differ");
    }
    DenseMatrix out(a.rows(), b.cols());
    parallel_for(a.rows(), [&](std::size_t i) {
        auto orow = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) {
                continue;
            }
            auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                orow[j] += aik * brow[j];
            }
        }
    });
    return out;
}

/// `X X^T`, the n x n Gram matrix of the rows.
inline DenseMatrix gram(const DenseMatrix& x) {
    const std::size_t n = x.rows();
    DenseMatrix out(n, n);
    parallel_for(n, [&](std::size_t i) {
        auto xi = x.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            auto xj = x.row(j);
            double s = 0;
            for (std::size_t k = 0; k < x.cols(); ++k) {
                s += xi[k] * xj[k];
            }
            out(i, j) = s;
        }
    });
    return out;
}

inline double trace(const DenseMatrix& a) {
    double s = 0;
    for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) {
        s += a(i, i);
    }
    return s;
}

inline DenseMatrix center_columns(const DenseMatrix& x) {
    DenseMatrix out = x;
    if (x.rows() == 0) {
        return out;
    }
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double mean = 0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            mean += x(i, j);
        }
        mean /= static_cast<double>(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            out(i, j) -= mean;
        }
    }
    return out;
}

/**
 * Squared Euclidean distances between rows. Differences are formed before
 * squaring, so the result does not suffer from the cancellation of the
 * `|a|^2 + |b|^2 - 2ab` expansion and stays translation invariant.
 */
inline DenseMatrix pairwise_sq_dists(const DenseMatrix& x) {
    const std::size_t n = x.rows();
    DenseMatrix out(n, n);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            // Compute each unordered pair in a fixed orientation so D stays exactly symmetric.
            auto lo = x.row(std::min(i, j));
            auto hi = x.row(std::max(i, j));
            double s = 0;
            for (std::size_t k = 0; k < x.cols(); ++k) {
                const double d = lo[k] - hi[k];
                s += d * d;
            }
            out(i, j) = s;
        }
    });
    return out;
}

namespace detail {

inline void require_symmetric(const DenseMatrix& a, double rel_tol) {
    if (!a.square()) {
        throw ContractViolation("sym_eig: matrix is " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + ", expected square");
    }
    const double scale = std::max(a.max_abs(), 1e-300);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = i + 1; j < a.cols(); ++j) {
            if (std::abs(a(i, j) - a(j, i)) > rel_tol * scale) {
                std::ostringstream msg;
                msg << "sym_eig: matrix not symmetric at (" << i << "," << j << ")";
                throw ContractViolation(msg.str());
            }
        }
    }
}

inline double off_diagonal_norm(const DenseMatrix& a) {
    double s = 0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (i != j) {
                s += a(i, j) * a(i, j);
            }
        }
    }
    return std::sqrt(s);
}

/// Flip a column so its largest-magnitude entry (lowest index on ties) is positive.
inline void fix_column_sign(DenseMatrix& v, std::size_t col) {
    std::size_t best = 0;
    double best_abs = -1;
    for (std::size_t i = 0; i < v.rows(); ++i) {
        const double m = std::abs(v(i, col));
        if (m > best_abs) {
            best_abs = m;
            best = i;
        }
    }
    if (v.rows() && v(best, col) < 0) {
        for (std::size_t i = 0; i < v.rows(); ++i) {
            v(i, col) = -v(i, col);
        }
    }
}

} // namespace detail

/**
 * Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
 *
 * Eigenvalues come back in descending order (ties keep their diagonal order)
 * and each eigenvector has its largest-magnitude component positive, so the
 * output is fully determined by the input bits.
 */
inline SymEigResult sym_eig(const DenseMatrix& input, const JacobiOptions& opt = {}) {
    detail::require_symmetric(input, 1e-10);
    const std::size_t n = input.rows();

    // Work on the exactly-symmetrized copy.
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            a(i, j) = 0.5 * (input(i, j) + input(j, i));
        }
    }
    DenseMatrix v = DenseMatrix::identity(n);

    const double target = opt.tolerance * std::max(a.frobenius(), 1e-300);
    double off = detail::off_diagonal_norm(a);
    int sweep = 0;
    while (off > target) {
        if (sweep == opt.max_sweeps) {
            std::ostringstream msg;
            msg << "sym_eig: no convergence after " << opt.max_sweeps
                << " sweeps, off-diagonal residual " << off;
            throw NumericalError(msg.str());
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) {
                    continue;
                }
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;

                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
        ++sweep;
        off = detail::off_diagonal_norm(a);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return a(l, l) > a(r, r); });

    SymEigResult out;
    out.values.resize(n);
    out.vectors = DenseMatrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        out.values[c] = a(order[c], order[c]);
        for (std::size_t k = 0; k < n; ++k) {
            out.vectors(k, c) = v(k, order[c]);
        }
        detail::fix_column_sign(out.vectors, c);
    }
    return out;
}

} // namespace gcdr

#endif
