#ifndef GCDR_EVAL_HPP
#define GCDR_EVAL_HPP

#include "error.hpp"
#include "linalg.hpp"
#include "matrix.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

/**
 * @file eval.hpp
 *
 * @brief K-ary neighborhood agreement between input and embedding.
 *
 * `Q_n(K)` is the average fraction of each point's K nearest input neighbors
 * that are also among its K nearest embedding neighbors. `R_n(K)` rescales it
 * so that a random embedding scores 0 and a perfect one scores 1:
 *
 *     R_n(K) = ((n - 1) Q_n(K) - K) / (n - 1 - K)
 *
 * Distance ties are broken by the smaller point index, identically in both spaces.
 */

namespace gcdr {

struct NeighborhoodScore {
    std::size_t K = 0;
    double Q = 0;
    double R = 0;
};

inline double rescale_agreement(double q, std::size_t n, std::size_t k) {
    const double nm1 = static_cast<double>(n - 1);
    const double kk = static_cast<double>(k);
    return (nm1 * q - kk) / (nm1 - kk);
}

/// For each row, the indices of its `k` nearest other rows (ascending distance, then index).
inline std::vector<std::vector<std::size_t>> nearest_neighbors(const DenseMatrix& x, std::size_t k) {
    const std::size_t n = x.rows();
    const DenseMatrix d = pairwise_sq_dists(x);
    std::vector<std::vector<std::size_t>> out(n);
    parallel_for(n, [&](std::size_t i) {
        std::vector<std::pair<double, std::size_t>> row;
        row.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                row.emplace_back(d(i, j), j);
            }
        }
        std::sort(row.begin(), row.end());
        out[i].reserve(k);
        for (std::size_t r = 0; r < k; ++r) {
            out[i].push_back(row[r].second);
        }
    });
    return out;
}

inline void require_neighborhood_size(std::size_t k, std::size_t n) {
    if (n < 3 || k < 1 || k > n - 2) {
        throw ParameterError("neighborhood size K = " + std::to_string(k) + " must lie in [1, n-2] for n = " +
                             std::to_string(n));
    }
}

inline NeighborhoodScore kary_agreement(const DenseMatrix& x, const DenseMatrix& z, std::size_t k) {
    const std::size_t n = x.rows();
    if (z.rows() != n) {
        throw ContractViolation("kary_agreement: input has " + std::to_string(n) + " rows, embedding " +
                                std::to_string(z.rows()));
    }
    require_neighborhood_size(k, n);

    const auto input = nearest_neighbors(x, k);
    const auto latent = nearest_neighbors(z, k);
    std::vector<std::size_t> overlap(n, 0);
    parallel_for(n, [&](std::size_t i) {
        std::vector<char> mark(n, 0);
        for (std::size_t j : input[i]) {
            mark[j] = 1;
        }
        std::size_t c = 0;
        for (std::size_t j : latent[i]) {
            c += mark[j];
        }
        overlap[i] = c;
    });
    const std::size_t total = std::accumulate(overlap.begin(), overlap.end(), std::size_t{0});
    NeighborhoodScore out;
    out.K = k;
    out.Q = static_cast<double>(total) / (static_cast<double>(k) * static_cast<double>(n));
    out.R = rescale_agreement(out.Q, n, k);
    return out;
}

/**
 * Parse a neighborhood size: a plain integer, or `n/<d>` for `floor(n / d)`,
 * or a fraction in (0, 1) of `n`.
 */
inline std::size_t resolve_neighborhood_size(const std::string& spec, std::size_t n) {
    try {
        if (spec.rfind("n/", 0) == 0) {
            const double div = std::stod(spec.substr(2));
            if (!(div > 0)) {
                throw ParameterError("bad divisor in '" + spec + "'");
            }
            return static_cast<std::size_t>(static_cast<double>(n) / div);
        }
        if (spec.find('.') != std::string::npos) {
            const double frac = std::stod(spec);
            if (!(frac > 0 && frac < 1)) {
                throw ParameterError("fractional K must lie in (0, 1): '" + spec + "'");
            }
            return static_cast<std::size_t>(frac * static_cast<double>(n));
        }
        std::size_t pos = 0;
        const long v = std::stol(spec, &pos);
        if (pos != spec.size() || v < 0) {
            throw ParameterError("bad neighborhood size '" + spec + "'");
        }
        return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
        throw ParameterError("bad neighborhood size '" + spec + "'");
    }
}

} // namespace gcdr

#endif
