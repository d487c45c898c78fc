#ifndef GCDR_CCPCA_HPP
#define GCDR_CCPCA_HPP

#include "graph.hpp"
#include "kernels.hpp"
#include "linalg.hpp"
#include "parallel.hpp"
#include "posterior.hpp"
#include "random.hpp"
#include "spectral.hpp"

#include <cstdint>
#include <vector>

/**
 * @file ccpca.hpp
 *
 * @brief ccPCA initialization.
 *
 * Shift-invariant kernels make the embedding objective blind to the means of
 * the connected components of the latent graph. ccPCA recovers that
 * between-component structure: draw graphs from the posterior, average the
 * projectors onto their component indicators, and run PCA on the projected data.
 */

namespace gcdr {

struct CcpcaConfig {
    std::size_t samples = 100;
    PriorKind prior = PriorKind::D;
    std::size_t q = 2;
    std::uint64_t seed = 0;
};

/// Component partitions of `samples` posterior draws; sample `l` uses stream `(seed, l)`.
inline std::vector<Partition> sample_partitions(const KernelMatrix& k, PriorKind prior, std::size_t samples,
                                                std::uint64_t seed) {
    const PosteriorSampler sampler(k, prior);
    std::vector<Partition> out(samples);
    parallel_for(samples, [&](std::size_t l) {
        Rng rng = derive_stream(seed, l);
        out[l] = connected_components(sampler.sample(rng));
    });
    return out;
}

/// Monte-Carlo average `(1/N) sum_l U_l U_l^T` of the component projectors.
inline DenseMatrix averaged_projector(const KernelMatrix& k, const CcpcaConfig& cfg) {
    if (cfg.samples == 0) {
        throw ParameterError("ccPCA needs at least one Monte-Carlo sample");
    }
    const std::size_t n = k.size();
    const auto parts = sample_partitions(k, cfg.prior, cfg.samples, cfg.seed);

    DenseMatrix acc(n, n);
    for (const auto& p : parts) {
        for (std::size_t i = 0; i < n; ++i) {
            const double w = 1.0 / static_cast<double>(p.component_sizes[p.assignment[i]]);
            for (std::size_t j = 0; j < n; ++j) {
                if (p.assignment[j] == p.assignment[i]) {
                    acc(i, j) += w;
                }
            }
        }
    }
    acc *= 1.0 / static_cast<double>(cfg.samples);
    return acc;
}

inline DenseMatrix ccpca(const DenseMatrix& x, const KernelMatrix& k, const CcpcaConfig& cfg) {
    if (x.rows() != k.size()) {
        throw ContractViolation("ccpca: data rows do not match kernel size");
    }
    detail::require_rank(cfg.q, x.rows(), x.cols());
    return pca(matmul(averaged_projector(k, cfg), x), cfg.q);
}

/// Average number of connected components over posterior draws.
inline double mean_component_count(const KernelMatrix& k, PriorKind prior, std::size_t samples,
                                   std::uint64_t seed) {
    const auto parts = sample_partitions(k, prior, samples, seed);
    double total = 0;
    for (const auto& p : parts) {
        total += static_cast<double>(p.count());
    }
    return total / static_cast<double>(samples);
}

} // namespace gcdr

#endif
