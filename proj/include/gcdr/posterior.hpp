#ifndef GCDR_POSTERIOR_HPP
#define GCDR_POSTERIOR_HPP

#include "error.hpp"
#include "graph.hpp"
#include "kernels.hpp"
#include "matrix.hpp"
#include "random.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

/**
 * @file posterior.hpp
 *
 * @brief Limit posterior laws of the latent graph given the data, for the
 * binary (B), unitary out-degree (D) and n-edges (E) priors.
 *
 * With edge prior `pi` and kernel matrix `K`, write `A = pi ⊙ K`. Then
 * - B: every off-diagonal `W_ij` is an independent Bernoulli(`A_ij / (1 + A_ij)`);
 * - D: every row is an independent one-draw multinomial over `A_i / A_{i+}`;
 * - E: the whole matrix is one n-draw multinomial over `A / A_{++}`.
 */

namespace gcdr {

enum class PriorKind { B, D, E };

inline std::string to_string(PriorKind p) {
    switch (p) {
    case PriorKind::B:
        return "B";
    case PriorKind::D:
        return "D";
    default:
        return "E";
    }
}

inline PriorKind prior_from_string(const std::string& s) {
    if (s == "B" || s == "b") {
        return PriorKind::B;
    }
    if (s == "D" || s == "d") {
        return PriorKind::D;
    }
    if (s == "E" || s == "e") {
        return PriorKind::E;
    }
    throw ParameterError("unknown prior '" + s + "' (expected B, D or E)");
}

/**
 * How the entries of an affinity matrix are normalized. `SymmetrizedRow` is
 * `P + P^T` for a row-normalized `P` (total mass `2n`), `ThresholdedBernoulli`
 * is the edge probability of the symmetrized Bernoulli graph.
 */
enum class Normalization { Row, Global, Bernoulli, SymmetrizedRow, ThresholdedBernoulli };

inline std::string to_string(Normalization n) {
    switch (n) {
    case Normalization::Row:
        return "row";
    case Normalization::Global:
        return "global";
    case Normalization::Bernoulli:
        return "bernoulli";
    case Normalization::SymmetrizedRow:
        return "symmetrized-row";
    default:
        return "thresholded-bernoulli";
    }
}

struct AffinityMatrix {
    DenseMatrix values;
    PriorKind prior = PriorKind::D;
    Normalization normalization = Normalization::Row;

    std::size_t size() const { return values.rows(); }
};

namespace detail {

inline DenseMatrix weighted_kernel(const KernelMatrix& k, const std::optional<DenseMatrix>& pi) {
    const std::size_t n = k.size();
    if (!k.values.square()) {
        throw ContractViolation("kernel matrix must be square");
    }
    DenseMatrix a = k.values;
    for (std::size_t i = 0; i < n; ++i) {
        if (a(i, i) != 0.0) {
            throw ContractViolation("kernel matrix diagonal must be zero (node " + std::to_string(i) + ")");
        }
    }
    if (pi) {
        if (pi->rows() != n || pi->cols() != n) {
            throw ContractViolation("edge prior must be n x n");
        }
        for (std::size_t c = 0; c < a.size(); ++c) {
            if (pi->data()[c] < 0) {
                throw ContractViolation("edge prior entries must be nonnegative");
            }
            a.data()[c] *= pi->data()[c];
        }
    }
    for (double v : a.data()) {
        if (!(v >= 0) || !std::isfinite(v)) {
            throw ContractViolation("kernel entries must be finite and nonnegative");
        }
    }
    return a;
}

inline double row_mass(const DenseMatrix& a, std::size_t i) {
    double s = 0;
    for (double v : a.row(i)) {
        s += v;
    }
    return s;
}

inline void require_rows_positive(const DenseMatrix& a) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
        if (!(row_mass(a, i) > 0)) {
            throw IsolatedNodeError(i, "node " + std::to_string(i) +
                                           " has zero kernel mass; D-prior posterior undefined");
        }
    }
}

inline double require_total_positive(const DenseMatrix& a) {
    const double total = a.sum();
    if (!(total > 0)) {
        throw DataError("kernel matrix has zero total mass; E-prior posterior undefined");
    }
    return total;
}

/// Index of the first cell whose cumulative mass exceeds `u * total`, skipping empty cells.
inline std::size_t pick(const std::vector<double>& cumulative, double u) {
    const double target = u * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) {
        // Only reachable through rounding at u -> 1; take the last nonempty cell.
        it = std::prev(cumulative.end());
        while (it != cumulative.begin() && *std::prev(it) == *it) {
            --it;
        }
    }
    return static_cast<std::size_t>(it - cumulative.begin());
}

} // namespace detail

/**
 * Posterior expectation of the latent graph (divided by `n` for the E prior,
 * so that all entries sum to one).
 */
inline AffinityMatrix posterior_expectation(const KernelMatrix& k, PriorKind prior,
                                            const std::optional<DenseMatrix>& pi = std::nullopt) {
    DenseMatrix a = detail::weighted_kernel(k, pi);
    const std::size_t n = a.rows();
    switch (prior) {
    case PriorKind::B:
        for (double& v : a.data()) {
            v = v / (1.0 + v);
        }
        return {std::move(a), prior, Normalization::Bernoulli};
    case PriorKind::D:
        detail::require_rows_positive(a);
        for (std::size_t i = 0; i < n; ++i) {
            const double mass = detail::row_mass(a, i);
            for (double& v : a.row(i)) {
                v /= mass;
            }
        }
        return {std::move(a), prior, Normalization::Row};
    default: {
        const double total = detail::require_total_positive(a);
        for (double& v : a.data()) {
            v /= total;
        }
        return {std::move(a), prior, Normalization::Global};
    }
    }
}

/**
 * @brief Exact sampler for the limit posterior graph.
 *
 * Preprocessing (cumulative tables) is done once so repeated draws cost
 * `O(n log n)` for D and E and `O(n^2)` for B.
 */
class PosteriorSampler {
public:
    PosteriorSampler(const KernelMatrix& k, PriorKind prior, const std::optional<DenseMatrix>& pi = std::nullopt)
        : prior_(prior), n_(k.size()) {
        DenseMatrix a = detail::weighted_kernel(k, pi);
        switch (prior_) {
        case PriorKind::B:
            probs_ = std::move(a);
            for (double& v : probs_.data()) {
                v = v / (1.0 + v);
            }
            break;
        case PriorKind::D:
            detail::require_rows_positive(a);
            rows_.resize(n_);
            for (std::size_t i = 0; i < n_; ++i) {
                rows_[i].resize(n_);
                double acc = 0;
                for (std::size_t j = 0; j < n_; ++j) {
                    acc += a(i, j);
                    rows_[i][j] = acc;
                }
            }
            break;
        case PriorKind::E: {
            detail::require_total_positive(a);
            global_.resize(n_ * n_);
            double acc = 0;
            for (std::size_t c = 0; c < n_ * n_; ++c) {
                acc += a.data()[c];
                global_[c] = acc;
            }
            break;
        }
        }
    }

    PriorKind prior() const { return prior_; }
    std::size_t size() const { return n_; }

    LatentGraph sample(Rng& rng) const {
        LatentGraph w(n_);
        switch (prior_) {
        case PriorKind::B:
            for (std::size_t i = 0; i < n_; ++i) {
                for (std::size_t j = 0; j < n_; ++j) {
                    const double p = probs_(i, j);
                    // Draw unconditionally to keep the stream layout independent of K.
                    const double u = uniform01(rng);
                    if (i != j && u < p) {
                        w(i, j) = 1;
                    }
                }
            }
            break;
        case PriorKind::D:
            for (std::size_t i = 0; i < n_; ++i) {
                w(i, detail::pick(rows_[i], uniform01(rng))) = 1;
            }
            break;
        case PriorKind::E:
            for (std::size_t draw = 0; draw < n_; ++draw) {
                const std::size_t cell = detail::pick(global_, uniform01(rng));
                ++w(cell / n_, cell % n_);
            }
            break;
        }
        return w;
    }

private:
    PriorKind prior_;
    std::size_t n_;
    DenseMatrix probs_;
    std::vector<std::vector<double>> rows_;
    std::vector<double> global_;
};

inline LatentGraph sample_posterior_graph(const KernelMatrix& k, PriorKind prior,
                                          const std::optional<DenseMatrix>& pi, Rng& rng) {
    return PosteriorSampler(k, prior, pi).sample(rng);
}

/// `P + P^T` for a row-normalized D-prior expectation; total mass becomes `2n`.
inline AffinityMatrix symmetrize_row_affinity(const AffinityMatrix& p) {
    if (p.normalization != Normalization::Row || p.prior != PriorKind::D) {
        throw ContractViolation("symmetrize_row_affinity expects a row-normalized D-prior affinity, got " +
                                to_string(p.normalization));
    }
    const std::size_t n = p.size();
    AffinityMatrix out{DenseMatrix(n, n), PriorKind::D, Normalization::SymmetrizedRow};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out.values(i, j) = p.values(i, j) + p.values(j, i);
        }
    }
    return out;
}

/// Edge probability of `1{W + W^T >= 1}` for an independent-Bernoulli `W`.
inline AffinityMatrix umap_threshold_prob(const AffinityMatrix& p) {
    if (p.normalization != Normalization::Bernoulli) {
        throw ContractViolation("umap_threshold_prob expects a bernoulli affinity, got " +
                                to_string(p.normalization));
    }
    const std::size_t n = p.size();
    AffinityMatrix out{DenseMatrix(n, n), PriorKind::B, Normalization::ThresholdedBernoulli};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double a = p.values(i, j);
            const double b = p.values(j, i);
            out.values(i, j) = a + b - a * b;
        }
    }
    return out;
}

} // namespace gcdr

#endif
