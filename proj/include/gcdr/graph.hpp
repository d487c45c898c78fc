#ifndef GCDR_GRAPH_HPP
#define GCDR_GRAPH_HPP

#include "error.hpp"
#include "kernels.hpp"
#include "matrix.hpp"

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

/**
 * @file graph.hpp
 *
 * @brief Latent structuring graphs, their Laplacian and connected components,
 * and the pairwise MRF log-density they induce on the rows of a data matrix.
 */

namespace gcdr {

/**
 * @brief Directed multigraph on `n` nodes stored as an integer weight matrix.
 *
 * Valid graphs have a zero diagonal and entries in `[0, n]`.
 */
class LatentGraph {
public:
    LatentGraph() = default;
    explicit LatentGraph(std::size_t n) : n_(n), w_(n * n, 0) {}
    LatentGraph(std::size_t n, std::vector<std::int64_t> weights) : n_(n), w_(std::move(weights)) {
        if (w_.size() != n_ * n_) {
            throw ContractViolation("LatentGraph: expected " + std::to_string(n_ * n_) + " weights");
        }
    }
    LatentGraph(std::initializer_list<std::initializer_list<std::int64_t>> rows) : n_(rows.size()) {
        for (const auto& r : rows) {
            if (r.size() != n_) {
                throw ContractViolation("LatentGraph: weight matrix must be square");
            }
            w_.insert(w_.end(), r.begin(), r.end());
        }
    }

    std::size_t size() const { return n_; }
    std::int64_t& operator()(std::size_t i, std::size_t j) { return w_[i * n_ + j]; }
    std::int64_t operator()(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }
    const std::vector<std::int64_t>& weights() const { return w_; }

    std::int64_t total() const {
        std::int64_t s = 0;
        for (auto v : w_) {
            s += v;
        }
        return s;
    }

    std::int64_t out_degree(std::size_t i) const {
        std::int64_t s = 0;
        for (std::size_t j = 0; j < n_; ++j) {
            s += (*this)(i, j);
        }
        return s;
    }

    /// Throws unless the graph has a zero diagonal and every weight lies in `[0, n]`.
    void validate() const {
        const auto cap = static_cast<std::int64_t>(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            if ((*this)(i, i) != 0) {
                throw ContractViolation("latent graph has nonzero diagonal at node " + std::to_string(i));
            }
            for (std::size_t j = 0; j < n_; ++j) {
                const auto w = (*this)(i, j);
                if (w < 0 || w > cap) {
                    throw ContractViolation("latent graph weight (" + std::to_string(i) + "," +
                                            std::to_string(j) + ") = " + std::to_string(w) +
                                            " outside [0, n]");
                }
            }
        }
    }

    friend bool operator==(const LatentGraph&, const LatentGraph&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::int64_t> w_;
};

/// Connected components; indices are contiguous and ordered by smallest member node.
struct Partition {
    std::vector<std::size_t> assignment;
    std::vector<std::size_t> component_sizes;

    std::size_t count() const { return component_sizes.size(); }
    std::size_t size() const { return assignment.size(); }
};

/// Orthogonal projector onto the span of the normalized component indicators.
struct CCProjector {
    DenseMatrix matrix;
};

/// `L(W + W^T)`, computed in integer arithmetic so rows sum to exactly zero.
inline DenseMatrix laplacian(const LatentGraph& w) {
    w.validate();
    const std::size_t n = w.size();
    DenseMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        std::int64_t degree = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            const std::int64_t sym = w(i, j) + w(j, i);
            degree += sym;
            out(i, j) = -static_cast<double>(sym);
        }
        out(i, i) = static_cast<double>(degree);
    }
    return out;
}

/// `L(W + W^T)` for a real nonnegative weight matrix such as an expected graph.
inline DenseMatrix laplacian(const DenseMatrix& w) {
    if (!w.square()) {
        throw ContractViolation("laplacian: weight matrix must be square");
    }
    const std::size_t n = w.rows();
    DenseMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (w(i, i) != 0.0) {
            throw ContractViolation("laplacian: nonzero diagonal at node " + std::to_string(i));
        }
        double degree = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (w(i, j) < 0) {
                throw ContractViolation("laplacian: negative weight at (" + std::to_string(i) + "," +
                                        std::to_string(j) + ")");
            }
            if (i == j) {
                continue;
            }
            const double sym = w(i, j) + w(j, i);
            degree += sym;
            out(i, j) = -sym;
        }
        out(i, i) = degree;
    }
    return out;
}

namespace detail {

template<class Adjacent>
Partition bfs_components(std::size_t n, Adjacent&& adjacent) {
    constexpr auto unset = std::numeric_limits<std::size_t>::max();
    Partition p{std::vector<std::size_t>(n, unset), {}};
    std::deque<std::size_t> queue;
    for (std::size_t start = 0; start < n; ++start) {
        if (p.assignment[start] != unset) {
            continue;
        }
        const std::size_t label = p.component_sizes.size();
        p.component_sizes.push_back(0);
        p.assignment[start] = label;
        queue.push_back(start);
        while (!queue.empty()) {
            const std::size_t u = queue.front();
            queue.pop_front();
            ++p.component_sizes[label];
            for (std::size_t v = 0; v < n; ++v) {
                if (p.assignment[v] == unset && adjacent(u, v)) {
                    p.assignment[v] = label;
                    queue.push_back(v);
                }
            }
        }
    }
    return p;
}

} // namespace detail

/// Components of the undirected support of `W + W^T`.
inline Partition connected_components(const LatentGraph& w) {
    w.validate();
    return detail::bfs_components(w.size(), [&](std::size_t u, std::size_t v) {
        return u != v && (w(u, v) > 0 || w(v, u) > 0);
    });
}

/// Components of the strictly positive support of a real weight matrix (symmetrized).
inline Partition connected_components(const DenseMatrix& w) {
    if (!w.square()) {
        throw ContractViolation("connected_components: weight matrix must be square");
    }
    return detail::bfs_components(w.rows(), [&](std::size_t u, std::size_t v) {
        return u != v && (w(u, v) > 0 || w(v, u) > 0);
    });
}

inline void validate(const Partition& p) {
    std::vector<std::size_t> counted(p.count(), 0);
    for (std::size_t a : p.assignment) {
        if (a >= p.count()) {
            throw ContractViolation("partition assignment " + std::to_string(a) + " out of range");
        }
        ++counted[a];
    }
    if (counted != p.component_sizes) {
        throw ContractViolation("partition sizes disagree with assignment");
    }
    for (std::size_t s : p.component_sizes) {
        if (s == 0) {
            throw ContractViolation("partition has an empty component");
        }
    }
}

/// Block-constant matrix with `1 / n_r` wherever both nodes lie in component `r`.
inline CCProjector cc_projector(const Partition& p) {
    validate(p);
    const std::size_t n = p.size();
    CCProjector out{DenseMatrix(n, n)};
    for (std::size_t i = 0; i < n; ++i) {
        const double inv = 1.0 / static_cast<double>(p.component_sizes[p.assignment[i]]);
        for (std::size_t j = 0; j < n; ++j) {
            if (p.assignment[j] == p.assignment[i]) {
                out.matrix(i, j) = inv;
            }
        }
    }
    return out;
}

struct MeanCenteredSplit {
    /// Rows replaced by the mean of their component.
    DenseMatrix means;
    /// `X - means`; centered within every component.
    DenseMatrix centered;
};

inline MeanCenteredSplit split_mean_centered(const DenseMatrix& x, const Partition& p) {
    validate(p);
    if (x.rows() != p.size()) {
        throw ContractViolation("split_mean_centered: data has " + std::to_string(x.rows()) +
                                " rows, partition covers " + std::to_string(p.size()));
    }
    DenseMatrix sums(p.count(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t k = 0; k < x.cols(); ++k) {
            sums(p.assignment[i], k) += x(i, k);
        }
    }
    MeanCenteredSplit out{DenseMatrix(x.rows(), x.cols()), x};
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const std::size_t r = p.assignment[i];
        const double inv = 1.0 / static_cast<double>(p.component_sizes[r]);
        for (std::size_t k = 0; k < x.cols(); ++k) {
            out.means(i, k) = sums(r, k) * inv;
            out.centered(i, k) -= out.means(i, k);
        }
    }
    return out;
}

/**
 * Unnormalized pairwise MRF log-density `sum_ij W_ij log k((X_i - X_j) / tau_i)`.
 *
 * Returns -infinity when an edge carries zero kernel value, which the Gaussian
 * and Student kernels only produce for non-finite input.
 */
inline double log_mrf_density(const DenseMatrix& x, const LatentGraph& w, KernelKind kind,
                              const std::optional<Bandwidths>& tau = std::nullopt) {
    w.validate();
    const std::size_t n = w.size();
    if (x.rows() != n) {
        throw ContractViolation("log_mrf_density: data rows do not match graph size");
    }
    if (tau && tau->size() != n) {
        throw ContractViolation("log_mrf_density: bandwidth count does not match graph size");
    }
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = tau ? tau->tau[i] : 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            const auto wij = w(i, j);
            if (wij == 0) {
                continue;
            }
            double d = 0;
            for (std::size_t k = 0; k < x.cols(); ++k) {
                const double diff = (x(i, k) - x(j, k)) / t;
                d += diff * diff;
            }
            const double lk = log_kernel(kind, d);
            if (lk == -std::numeric_limits<double>::infinity() || std::isnan(lk)) {
                return -std::numeric_limits<double>::infinity();
            }
            total += static_cast<double>(wij) * lk;
        }
    }
    return total;
}

} // namespace gcdr

#endif
