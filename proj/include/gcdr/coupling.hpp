#ifndef GCDR_COUPLING_HPP
#define GCDR_COUPLING_HPP

#include "error.hpp"
#include "kernels.hpp"
#include "matrix.hpp"
#include "parallel.hpp"
#include "posterior.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

/**
 * @file coupling.hpp
 *
 * @brief Cross-entropy between input-side and latent-side graph posteriors.
 *
 * The four prior pairings give the classical neighbor-embedding objectives:
 *
 * | method   | input side | latent side | loss                                                        |
 * |----------|------------|-------------|-------------------------------------------------------------|
 * | SNE      | D          | D           | `-sum_{i!=j} P_ij log Q^D_ij`                               |
 * | TSNE     | D          | E           | `-sum_{i<j} Pbar_ij log Q^E_ij`                             |
 * | LARGEVIS | D          | B           | `-sum_{i<j} Pbar_ij log Q^B_ij + (2 - Pbar_ij) log(1-Q^B_ij)` |
 * | UMAP     | B~         | B           | `-2 sum_{i<j} P~_ij log Q^B_ij + (1 - P~_ij) log(1-Q^B_ij)`   |
 *
 * Every loss is evaluated as `attraction + repulsion`, where attraction is
 * `-sum_{i<j} A_ij log k(Z_i - Z_j)` for the method's symmetric input weights
 * `A` and repulsion collects the normalizers. Because the loss is literally that
 * sum, the decomposition is exact in floating point.
 */

namespace gcdr {

enum class MethodKind { SNE, TSNE, LARGEVIS, UMAP };

inline std::string to_string(MethodKind m) {
    switch (m) {
    case MethodKind::SNE:
        return "sne";
    case MethodKind::TSNE:
        return "tsne";
    case MethodKind::LARGEVIS:
        return "largevis";
    default:
        return "umap";
    }
}

inline MethodKind method_from_string(const std::string& s) {
    if (s == "sne") {
        return MethodKind::SNE;
    }
    if (s == "tsne") {
        return MethodKind::TSNE;
    }
    if (s == "largevis") {
        return MethodKind::LARGEVIS;
    }
    if (s == "umap") {
        return MethodKind::UMAP;
    }
    throw ParameterError("unknown method '" + s + "' (expected sne, tsne, largevis or umap)");
}

/// Normalization of the input-side affinity each method consumes.
inline Normalization required_normalization(MethodKind m) {
    switch (m) {
    case MethodKind::SNE:
        return Normalization::Row;
    case MethodKind::TSNE:
    case MethodKind::LARGEVIS:
        return Normalization::SymmetrizedRow;
    default:
        return Normalization::ThresholdedBernoulli;
    }
}

/// Gaussian for SNE, Student for the others.
inline KernelKind default_latent_kernel(MethodKind m) {
    return m == MethodKind::SNE ? KernelKind::Gaussian : KernelKind::Student;
}

struct CouplingProblem {
    MethodKind method = MethodKind::TSNE;
    AffinityMatrix P;
    KernelKind latent_kernel = KernelKind::Student;
    /// TSNE only: divide `Pbar` by `2n` so it sums to one, as common t-SNE codes do.
    bool classic_scale = false;

    std::size_t size() const { return P.size(); }
};

inline void validate(const CouplingProblem& prob) {
    if (prob.P.normalization != required_normalization(prob.method)) {
        throw ContractViolation(to_string(prob.method) + " expects a " +
                                to_string(required_normalization(prob.method)) + " affinity, got " +
                                to_string(prob.P.normalization));
    }
    if (prob.classic_scale && prob.method != MethodKind::TSNE) {
        throw ContractViolation("classic_scale only applies to tsne");
    }
    if (!prob.P.values.square()) {
        throw ContractViolation("affinity matrix must be square");
    }
}

inline CouplingProblem make_coupling_problem(MethodKind method, AffinityMatrix p,
                                             KernelKind latent_kernel, bool classic_scale = false) {
    CouplingProblem prob{method, std::move(p), latent_kernel, classic_scale};
    validate(prob);
    return prob;
}

inline CouplingProblem make_coupling_problem(MethodKind method, AffinityMatrix p) {
    return make_coupling_problem(method, std::move(p), default_latent_kernel(method));
}

struct LossTerms {
    double attraction = 0;
    double repulsion = 0;
    double total() const { return attraction + repulsion; }
};

namespace detail {

inline double sq_dist_rows(const DenseMatrix& z, std::size_t i, std::size_t j) {
    // Fixed orientation keeps d(i,j) and d(j,i) bit-identical.
    auto a = z.row(std::min(i, j));
    auto b = z.row(std::max(i, j));
    double s = 0;
    for (std::size_t k = 0; k < z.cols(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

/// Symmetric input weight `A_ij` of the attraction term, before exaggeration.
inline double attraction_weight(const CouplingProblem& prob, std::size_t i, std::size_t j) {
    const auto& p = prob.P.values;
    switch (prob.method) {
    case MethodKind::SNE:
        return p(i, j) + p(j, i);
    case MethodKind::TSNE:
        return prob.classic_scale ? p(i, j) / (2.0 * static_cast<double>(prob.size())) : p(i, j);
    case MethodKind::LARGEVIS:
        return p(i, j);
    default:
        return 2.0 * p(i, j);
    }
}

inline double log_sum_exp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) {
        m = std::max(m, x);
    }
    if (!std::isfinite(m)) {
        return m;
    }
    double s = 0;
    for (double x : v) {
        s += std::exp(x - m);
    }
    return m + std::log(s);
}

/// Per-row quantities shared by loss and gradient.
struct Normalizers {
    /// SNE: `log sum_{j!=i} k_ij`; TSNE: unused.
    std::vector<double> row_log_mass;
    /// SNE: exaggerated row mass `sum_j P_ij`.
    std::vector<double> row_weight;
    /// TSNE: `log sum_{i!=j} k_ij` and `sum_{i<j} A_ij` (exaggerated).
    double log_mass = 0;
    double weight = 0;
};

inline Normalizers normalizers(const CouplingProblem& prob, const DenseMatrix& z, double exaggeration) {
    const std::size_t n = prob.size();
    Normalizers out;
    if (prob.method == MethodKind::SNE || prob.method == MethodKind::TSNE) {
        out.row_log_mass.resize(n);
        parallel_for(n, [&](std::size_t i) {
            std::vector<double> logs;
            logs.reserve(n);
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) {
                    logs.push_back(log_kernel(prob.latent_kernel, sq_dist_rows(z, i, j)));
                }
            }
            out.row_log_mass[i] = log_sum_exp(logs);
        });
    }
    if (prob.method == MethodKind::SNE) {
        out.row_weight.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < n; ++j) {
                s += prob.P.values(i, j);
            }
            out.row_weight[i] = exaggeration * s;
        }
    } else if (prob.method == MethodKind::TSNE) {
        out.log_mass = log_sum_exp(out.row_log_mass);
        std::vector<double> rows(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                rows[i] += attraction_weight(prob, i, j);
            }
        }
        double s = 0;
        for (double r : rows) {
            s += r;
        }
        out.weight = exaggeration * s;
    }
    return out;
}

inline void require_shape(const CouplingProblem& prob, const DenseMatrix& z) {
    validate(prob);
    if (z.rows() != prob.size()) {
        throw ContractViolation("embedding has " + std::to_string(z.rows()) + " rows, problem has " +
                                std::to_string(prob.size()));
    }
}

} // namespace detail

/**
 * Attraction and repulsion terms of the loss at `Z`. `exaggeration`
 * multiplies the input-side affinities (early exaggeration).
 */
inline LossTerms loss_terms(const CouplingProblem& prob, const DenseMatrix& z, double exaggeration = 1.0) {
    detail::require_shape(prob, z);
    const std::size_t n = prob.size();
    const auto norm = detail::normalizers(prob, z, exaggeration);

    std::vector<double> attr_rows(n, 0.0), rep_rows(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        double attr = 0;
        double rep = 0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d2 = detail::sq_dist_rows(z, i, j);
            const double lk = log_kernel(prob.latent_kernel, d2);
            const double a = exaggeration * detail::attraction_weight(prob, i, j);
            if (a != 0.0) {
                attr -= a * lk;
            }
            if (prob.method == MethodKind::LARGEVIS || prob.method == MethodKind::UMAP) {
                rep += 2.0 * std::log1p(kernel_value(prob.latent_kernel, d2));
            }
        }
        if (prob.method == MethodKind::SNE) {
            rep = norm.row_weight[i] * norm.row_log_mass[i];
        }
        attr_rows[i] = attr;
        rep_rows[i] = rep;
    });

    LossTerms out;
    for (std::size_t i = 0; i < n; ++i) {
        out.attraction += attr_rows[i];
        out.repulsion += rep_rows[i];
    }
    if (prob.method == MethodKind::TSNE) {
        out.repulsion = norm.weight * norm.log_mass;
    }
    return out;
}

/// Cross-entropy loss; `+inf` if it cannot be evaluated (so callers can reject the step).
inline double loss(const CouplingProblem& prob, const DenseMatrix& z, double exaggeration = 1.0) {
    const double v = loss_terms(prob, z, exaggeration).total();
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

/// `(attraction, repulsion)` with `attraction + repulsion == loss(prob, Z)` exactly.
inline LossTerms attraction_repulsion(const CouplingProblem& prob, const DenseMatrix& z) {
    return loss_terms(prob, z, 1.0);
}

/**
 * Analytic gradient of `loss` with respect to `Z`.
 *
 * Each pair contributes `c_ij * 2 (Z_i - Z_j)` to row `i`, where `c_ij` is the
 * derivative of the loss with respect to the squared distance `|Z_i - Z_j|^2`.
 * Rows are accumulated independently over all partners in index order.
 */
inline DenseMatrix grad(const CouplingProblem& prob, const DenseMatrix& z, double exaggeration = 1.0) {
    detail::require_shape(prob, z);
    const std::size_t n = prob.size();
    const std::size_t q = z.cols();
    const auto norm = detail::normalizers(prob, z, exaggeration);

    auto pair_slope = [&](std::size_t i, std::size_t j) {
        const std::size_t lo = std::min(i, j);
        const std::size_t hi = std::max(i, j);
        const double d2 = detail::sq_dist_rows(z, lo, hi);
        const double lk = log_kernel(prob.latent_kernel, d2);
        const double slope = log_kernel_slope(prob.latent_kernel, d2);
        const double a = exaggeration * detail::attraction_weight(prob, lo, hi);
        double repulsive = 0;
        switch (prob.method) {
        case MethodKind::SNE:
            repulsive = norm.row_weight[lo] * std::exp(lk - norm.row_log_mass[lo]) +
                        norm.row_weight[hi] * std::exp(lk - norm.row_log_mass[hi]);
            break;
        case MethodKind::TSNE:
            repulsive = 2.0 * norm.weight * std::exp(lk - norm.log_mass);
            break;
        default: {
            const double k = kernel_value(prob.latent_kernel, d2);
            repulsive = 2.0 * k / (1.0 + k);
            break;
        }
        }
        return slope * (repulsive - a);
    };

    DenseMatrix g(n, q);
    parallel_for(n, [&](std::size_t i) {
        auto gi = g.row(i);
        auto zi = z.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            const double c = 2.0 * pair_slope(i, j);
            auto zj = z.row(j);
            for (std::size_t k = 0; k < q; ++k) {
                gi[k] += c * (zi[k] - zj[k]);
            }
        }
    });
    return g;
}

/// Total attraction weight `sum_{i<j} A_ij` (unexaggerated).
inline double input_mass(const CouplingProblem& prob) {
    validate(prob);
    double s = 0;
    for (std::size_t i = 0; i < prob.size(); ++i) {
        for (std::size_t j = i + 1; j < prob.size(); ++j) {
            s += detail::attraction_weight(prob, i, j);
        }
    }
    return s;
}

} // namespace gcdr

#endif
