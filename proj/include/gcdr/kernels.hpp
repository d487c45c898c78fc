#ifndef GCDR_KERNELS_HPP
#define GCDR_KERNELS_HPP

#include "error.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "parallel.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

/**
 * @file kernels.hpp
 *
 * @brief Shift-invariant kernels, perplexity calibration and kernel matrices.
 */

namespace gcdr {

/**
 * Both kernels are positive, bounded by `k(0) = 1` and integrable, and depend
 * on a displacement only through its squared norm.
 *
 * - `Gaussian`: `k(u) = exp(-|u|^2 / 2)`.
 * - `Student`: `k(u) = 1 / (1 + |u|^2)` (one degree of freedom).
 */
enum class KernelKind { Gaussian, Student };

inline std::string to_string(KernelKind k) { return k == KernelKind::Gaussian ? "gaussian" : "student"; }

inline KernelKind kernel_from_string(const std::string& s) {
    if (s == "gaussian") {
        return KernelKind::Gaussian;
    }
    if (s == "student") {
        return KernelKind::Student;
    }
    throw ParameterError("unknown kernel '" + s + "' (expected gaussian or student)");
}

/// `k` as a function of the squared displacement norm.
inline double kernel_value(KernelKind kind, double sq_norm) {
    return kind == KernelKind::Gaussian ? std::exp(-0.5 * sq_norm) : 1.0 / (1.0 + sq_norm);
}

/// `log k` as a function of the squared displacement norm; never -inf for finite input.
inline double log_kernel(KernelKind kind, double sq_norm) {
    return kind == KernelKind::Gaussian ? -0.5 * sq_norm : -std::log1p(sq_norm);
}

/// Derivative of `log k` with respect to the squared norm.
inline double log_kernel_slope(KernelKind kind, double sq_norm) {
    return kind == KernelKind::Gaussian ? -0.5 : -1.0 / (1.0 + sq_norm);
}

/// Per-node bandwidths `tau_i > 0`.
struct Bandwidths {
    std::vector<double> tau;

    static Bandwidths uniform(std::size_t n, double value = 1.0) { return {std::vector<double>(n, value)}; }
    std::size_t size() const { return tau.size(); }
};

/**
 * @brief Kernel evaluated between all pairs of rows.
 *
 * Entry `(i, j)` is `k((X_i - X_j) / tau_i)` for `i != j`; the diagonal is
 * held at exactly zero so self-affinity never reaches posteriors or losses.
 */
struct KernelMatrix {
    DenseMatrix values;
    KernelKind kind = KernelKind::Gaussian;
    std::optional<Bandwidths> bandwidths;

    std::size_t size() const { return values.rows(); }
};

struct CalibrationOptions {
    /// Allowed gap between the row entropy (bits) and log2(perplexity).
    double tolerance = 1e-5;
    int max_iterations = 64;
};

namespace detail {

/// Entropy in bits of the row distribution `p_j ∝ exp(-beta * (d_j - d_min))`.
inline double row_entropy_bits(std::span<const double> d, std::size_t self, double d_min, double beta) {
    double z = 0;
    double weighted = 0;
    for (std::size_t j = 0; j < d.size(); ++j) {
        if (j == self) {
            continue;
        }
        const double shifted = d[j] - d_min;
        const double w = std::exp(-beta * shifted);
        z += w;
        weighted += w * shifted;
    }
    // H = log Z + beta * E[d - d_min], in nats.
    const double h = std::log(z) + beta * weighted / z;
    return h / std::log(2.0);
}

} // namespace detail

/**
 * Find per-row Gaussian bandwidths such that the normalized row
 * `p_{j|i} ∝ exp(-D_ij / (2 tau_i^2))` has perplexity `2^H` equal to `perplexity`.
 *
 * The search runs on `log(beta)` with `beta = 1 / (2 tau^2)` measured in units
 * of the row's mean distance: the bracket is expanded geometrically until it
 * contains the target, then bisected. If the target entropy cannot be reached
 * (ties among nearest neighbors cap the attainable range) the closest bandwidth
 * found within the iteration budget is returned.
 */
inline Bandwidths calibrate_bandwidths(const DenseMatrix& sq_dists, double perplexity,
                                       const CalibrationOptions& opt = {}) {
    if (!sq_dists.square()) {
        throw ContractViolation("calibrate_bandwidths: distance matrix must be square");
    }
    const std::size_t n = sq_dists.rows();
    if (n < 2 || !(perplexity >= 1.0) || perplexity > static_cast<double>(n - 1)) {
        throw ParameterError("perplexity " + std::to_string(perplexity) + " outside [1, n-1] for n = " +
                             std::to_string(n));
    }
    const double target = std::log2(perplexity);

    // Validate every row before spawning work so errors name the first bad row.
    std::vector<double> scale(n), d_min(n);
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0;
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                total += sq_dists(i, j);
                lo = std::min(lo, sq_dists(i, j));
            }
        }
        if (!(total > 0)) {
            throw DegenerateRowError(i, "calibrate_bandwidths: row " + std::to_string(i) +
                                            " has no distinct neighbor (all points coincide with it)");
        }
        scale[i] = total / static_cast<double>(n - 1);
        d_min[i] = lo;
    }

    Bandwidths out{std::vector<double>(n)};
    parallel_for(n, [&](std::size_t i) {
        std::vector<double> row(n);
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = sq_dists(i, j) / scale[i];
        }
        const double row_min = d_min[i] / scale[i];

        double log_beta = 0.0;
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        double step = 1.0;
        double best_log_beta = log_beta;
        double best_gap = std::numeric_limits<double>::infinity();

        for (int it = 0; it < opt.max_iterations; ++it) {
            const double h = detail::row_entropy_bits(row, i, row_min, std::exp(log_beta));
            const double gap = h - target;
            if (std::abs(gap) < best_gap) {
                best_gap = std::abs(gap);
                best_log_beta = log_beta;
            }
            if (std::abs(gap) <= opt.tolerance) {
                break;
            }
            if (gap > 0) {
                // Too flat: sharpen.
                lo = log_beta;
                if (std::isfinite(hi)) {
                    log_beta = 0.5 * (lo + hi);
                } else {
                    log_beta += step;
                    step *= 2;
                }
            } else {
                hi = log_beta;
                if (std::isfinite(lo)) {
                    log_beta = 0.5 * (lo + hi);
                } else {
                    log_beta -= step;
                    step *= 2;
                }
            }
        }
        const double beta = std::exp(best_log_beta) / scale[i];
        out.tau[i] = std::sqrt(1.0 / (2.0 * beta));
    });
    return out;
}

/// `K_ij = k((X_i - X_j) / tau_i)` with `tau = 1` when no bandwidths are given.
inline KernelMatrix kernel_matrix(const DenseMatrix& x, KernelKind kind,
                                  const std::optional<Bandwidths>& tau = std::nullopt) {
    const std::size_t n = x.rows();
    if (tau && tau->size() != n) {
        throw ContractViolation("kernel_matrix: " + std::to_string(tau->size()) + " bandwidths for " +
                                std::to_string(n) + " rows");
    }
    const DenseMatrix d = pairwise_sq_dists(x);
    KernelMatrix out{DenseMatrix(n, n), kind, tau};
    parallel_for(n, [&](std::size_t i) {
        const double t = tau ? tau->tau[i] : 1.0;
        const double inv = 1.0 / (t * t);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                out.values(i, j) = kernel_value(kind, tau ? d(i, j) * inv : d(i, j));
            }
        }
    });
    return out;
}

} // namespace gcdr

#endif
