#ifndef GCDR_SPECTRAL_HPP
#define GCDR_SPECTRAL_HPP

#include "error.hpp"
#include "graph.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "posterior.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

/**
 * @file spectral.hpp
 *
 * @brief PCA, Laplacian eigenmaps and the Gaussian precision-coupling problem.
 *
 * Precision coupling matches Wishart posteriors over the among-row precision
 * matrices of `X` and `Z`. Keeping the `Z`-dependent terms gives
 *
 *     tr(Z^T (I + X X^T)^{-1} Z) - gamma * log|I + Z Z^T|
 *
 * where `gamma` is the log-determinant coefficient over the trace coefficient,
 * `(nu_Z + q) / (nu_X + p)`. The conjugate choice `nu_Z = nu_X + p - q` gives
 * `gamma = 1`, under which the minimizer is the (uncentered) PCA embedding.
 * With `X X^T = V diag(d) V^T` the minimizer is `V_q diag(lambda)^{1/2}` where
 * `lambda_i = max(0, gamma (1 + d_i) - 1)`.
 */

namespace gcdr {

namespace detail {

/// Columns of `Z` with the largest-magnitude entry made positive.
inline void fix_signs(DenseMatrix& z) {
    for (std::size_t c = 0; c < z.cols(); ++c) {
        fix_column_sign(z, c);
    }
}

/// Top-`q` principal coordinates of `X` as given (no centering): `V_q D_q^{1/2}` of `X X^T`.
inline DenseMatrix principal_coordinates(const DenseMatrix& x, std::size_t q) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    DenseMatrix z(n, q);
    // Large n with few features: diagonalize the p x p scatter matrix instead; same Z up to sign.
    if (n > 512 && p < n) {
        const auto eig = sym_eig(matmul(x.transpose(), x));
        for (std::size_t c = 0; c < q; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0;
                for (std::size_t k = 0; k < p; ++k) {
                    s += x(i, k) * eig.vectors(k, c);
                }
                z(i, c) = s;
            }
        }
    } else {
        const auto eig = sym_eig(gram(x));
        for (std::size_t c = 0; c < q; ++c) {
            const double scale = std::sqrt(std::max(0.0, eig.values[c]));
            for (std::size_t i = 0; i < n; ++i) {
                z(i, c) = eig.vectors(i, c) * scale;
            }
        }
    }
    fix_signs(z);
    return z;
}

inline void require_rank(std::size_t q, std::size_t n, std::size_t p) {
    if (q == 0 || q > std::min(n, p)) {
        throw ParameterError("target dimension " + std::to_string(q) + " must lie in [1, min(n, p)] = [1, " +
                             std::to_string(std::min(n, p)) + "]");
    }
}

} // namespace detail

/// PCA embedding: principal coordinates of the column-centered data.
inline DenseMatrix pca(const DenseMatrix& x, std::size_t q) {
    detail::require_rank(q, x.rows(), x.cols());
    return detail::principal_coordinates(center_columns(x), q);
}

struct LaplacianEigenmap {
    DenseMatrix embedding;
    /// Connected components of the affinity graph.
    std::size_t components = 1;
    /// Set when the graph is disconnected: the skipped null-space directions
    /// (component indicators) carry all between-component information.
    bool degenerate = false;
    /// Laplacian eigenvalues matching the embedding columns.
    std::vector<double> eigenvalues;
};

/**
 * Eigenvectors of `L(P + P^T)` for the `q` smallest eigenvalues after the
 * null space, whose dimension is the number of connected components.
 */
inline LaplacianEigenmap laplacian_eigenmaps(const AffinityMatrix& p, std::size_t q) {
    const std::size_t n = p.size();
    const Partition parts = connected_components(p.values);
    const std::size_t r = parts.count();
    if (q == 0 || r + q > n) {
        throw ParameterError("laplacian_eigenmaps: cannot extract " + std::to_string(q) +
                             " non-null directions from " + std::to_string(n) + " nodes with " +
                             std::to_string(r) + " components");
    }
    const auto eig = sym_eig(laplacian(p.values));
    LaplacianEigenmap out{DenseMatrix(n, q), r, r > 1, {}};
    for (std::size_t c = 0; c < q; ++c) {
        // Descending order: the null space sits in the last r columns.
        const std::size_t src = n - 1 - r - c;
        out.eigenvalues.push_back(eig.values[src]);
        for (std::size_t i = 0; i < n; ++i) {
            out.embedding(i, c) = eig.vectors(i, src);
        }
    }
    return out;
}

struct PrecisionCouplingConfig {
    double gamma = 1.0;
    std::size_t q = 2;
};

/**
 * @brief Precision-coupling objective with `(I + X X^T)^{-1}` precomputed.
 */
class PrecisionCoupling {
public:
    PrecisionCoupling(const DenseMatrix& x, const PrecisionCouplingConfig& cfg) : gamma_(cfg.gamma) {
        if (!(cfg.gamma > 0)) {
            throw ParameterError("gamma must be positive");
        }
        const std::size_t n = x.rows();
        const auto eig = sym_eig(gram(x));
        inverse_ = DenseMatrix(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0;
                for (std::size_t k = 0; k < n; ++k) {
                    s += eig.vectors(i, k) * eig.vectors(j, k) / (1.0 + eig.values[k]);
                }
                inverse_(i, j) = s;
            }
        }
    }

    double value(const DenseMatrix& z, double = 1.0) const {
        require(z);
        const DenseMatrix mz = matmul(inverse_, z);
        double tr = 0;
        for (std::size_t k = 0; k < z.size(); ++k) {
            tr += z.data()[k] * mz.data()[k];
        }
        // log|I_n + Z Z^T| = log|I_q + Z^T Z|.
        const auto small = sym_eig(inner_plus_identity(z));
        double logdet = 0;
        for (double v : small.values) {
            logdet += std::log(v);
        }
        return tr - gamma_ * logdet;
    }

    DenseMatrix gradient(const DenseMatrix& z, double = 1.0) const {
        require(z);
        DenseMatrix g = matmul(inverse_, z) * 2.0;
        const auto small = sym_eig(inner_plus_identity(z));
        const std::size_t q = z.cols();
        DenseMatrix inv(q, q);
        for (std::size_t a = 0; a < q; ++a) {
            for (std::size_t b = 0; b < q; ++b) {
                double s = 0;
                for (std::size_t k = 0; k < q; ++k) {
                    s += small.vectors(a, k) * small.vectors(b, k) / small.values[k];
                }
                inv(a, b) = s;
            }
        }
        g -= matmul(z, inv) * (2.0 * gamma_);
        return g;
    }

private:
    void require(const DenseMatrix& z) const {
        if (z.rows() != inverse_.rows()) {
            throw ContractViolation("precision coupling: embedding rows do not match data rows");
        }
    }

    static DenseMatrix inner_plus_identity(const DenseMatrix& z) {
        DenseMatrix m = matmul(z.transpose(), z);
        for (std::size_t a = 0; a < m.rows(); ++a) {
            m(a, a) += 1.0;
        }
        return m;
    }

    double gamma_;
    DenseMatrix inverse_;
};

inline double precision_coupling_objective(const DenseMatrix& z, const DenseMatrix& x,
                                           const PrecisionCouplingConfig& cfg) {
    return PrecisionCoupling(x, cfg).value(z);
}

/// Optimal eigenvalues `max(0, gamma (1 + d_i) - 1)` of `Z Z^T` for the top `q` eigenvalues `d` of `X X^T`.
inline std::vector<double> precision_coupling_eigenvalues(const std::vector<double>& d, double gamma,
                                                          std::size_t q) {
    std::vector<double> out;
    for (std::size_t i = 0; i < std::min(q, d.size()); ++i) {
        out.push_back(std::max(0.0, gamma * (1.0 + d[i]) - 1.0));
    }
    return out;
}

/// Closed-form minimizer of the precision-coupling objective (uncentered `X`).
inline DenseMatrix precision_coupling_closed_form(const DenseMatrix& x, const PrecisionCouplingConfig& cfg) {
    if (!(cfg.gamma > 0)) {
        throw ParameterError("gamma must be positive");
    }
    const std::size_t n = x.rows();
    if (cfg.q == 0 || cfg.q > n) {
        throw ParameterError("target dimension must lie in [1, n]");
    }
    const auto eig = sym_eig(gram(x));
    const auto lambda = precision_coupling_eigenvalues(eig.values, cfg.gamma, cfg.q);
    DenseMatrix z(n, cfg.q);
    for (std::size_t c = 0; c < cfg.q; ++c) {
        const double s = std::sqrt(lambda[c]);
        for (std::size_t i = 0; i < n; ++i) {
            z(i, c) = eig.vectors(i, c) * s;
        }
    }
    return z;
}

} // namespace gcdr

#endif
