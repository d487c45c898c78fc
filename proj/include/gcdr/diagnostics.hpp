#ifndef GCDR_DIAGNOSTICS_HPP
#define GCDR_DIAGNOSTICS_HPP

#include "graph.hpp"
#include "kernels.hpp"
#include "linalg.hpp"
#include "posterior.hpp"
#include "random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

/**
 * @file diagnostics.hpp
 *
 * @brief Checks of the graph-coupling degeneracy properties on concrete data.
 *
 * - trace identity: the Gaussian MRF log-density equals `-tr(X^T L X) / 2`;
 * - shift invariance: translating each connected component of `W` leaves the
 *   log-density of any shift-invariant kernel unchanged;
 * - posterior frequencies: empirical edge counts of the exact samplers match
 *   the closed-form posterior expectations.
 */

namespace gcdr {

struct DiagnosticResult {
    std::string name;
    bool passed = false;
    /// Worst observed deviation, in the unit named by `metric`.
    double worst = 0;
    double tolerance = 0;
    std::string metric;
};

/// `|log f + tr(X^T L X)/2| / (1 + |tr(X^T L X)/2|)` for the unit-bandwidth Gaussian kernel.
inline double trace_identity_error(const DenseMatrix& x, const LatentGraph& w) {
    const double lhs = log_mrf_density(x, w, KernelKind::Gaussian);
    const DenseMatrix l = laplacian(w);
    const double rhs = -0.5 * trace(matmul(matmul(x.transpose(), l), x));
    return std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
}

/// Add an independent random offset to every connected component of `W`.
inline DenseMatrix shift_components(const DenseMatrix& x, const LatentGraph& w, Rng& rng, double scale = 10.0) {
    const Partition parts = connected_components(w);
    DenseMatrix offsets(parts.count(), x.cols());
    for (double& v : offsets.data()) {
        v = scale * standard_normal(rng);
    }
    DenseMatrix out = x;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t k = 0; k < x.cols(); ++k) {
            out(i, k) += offsets(parts.assignment[i], k);
        }
    }
    return out;
}

/// Largest relative change of the log-density under per-component translation.
inline double shift_invariance_error(const DenseMatrix& x, const LatentGraph& w, KernelKind kind,
                                     const std::optional<Bandwidths>& tau, Rng& rng) {
    const double before = log_mrf_density(x, w, kind, tau);
    const double after = log_mrf_density(shift_components(x, w, rng), w, kind, tau);
    return std::abs(after - before) / (1.0 + std::abs(before));
}

/**
 * Largest per-cell z-score between empirical edge frequencies over `samples`
 * draws and the posterior expectation. For E the per-draw edge count of a cell
 * is binomial with `n` trials; its standard error accounts for that.
 */
inline double posterior_frequency_zmax(const KernelMatrix& k, PriorKind prior, std::size_t samples,
                                       std::uint64_t seed) {
    const std::size_t n = k.size();
    const AffinityMatrix expect = posterior_expectation(k, prior);
    const PosteriorSampler sampler(k, prior);
    Rng rng = derive_stream(seed, 0);
    DenseMatrix counts(n, n);
    for (std::size_t s = 0; s < samples; ++s) {
        const LatentGraph w = sampler.sample(rng);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                counts(i, j) += static_cast<double>(w(i, j));
            }
        }
    }
    const double trials = prior == PriorKind::E ? static_cast<double>(n) : 1.0;
    const double s = static_cast<double>(samples);
    double zmax = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double p = expect.values(i, j);
            const double freq = counts(i, j) / (s * trials);
            const double se = std::sqrt(p * (1.0 - p) / (s * trials));
            if (se == 0) {
                if (freq != p) {
                    return std::numeric_limits<double>::infinity();
                }
                continue;
            }
            zmax = std::max(zmax, std::abs(freq - p) / se);
        }
    }
    return zmax;
}

struct DiagnosticOptions {
    double perplexity = 5.0;
    std::size_t instances = 20;
    std::size_t samples = 20000;
    /// Rows used for the frequency checks (the cost is quadratic in this).
    std::size_t subset = 6;
    std::uint64_t seed = 0;
};

/**
 * Run the property suite on `x`. Graphs are drawn from the D-prior posterior
 * of the perplexity-calibrated Gaussian kernel, so they reflect the data.
 */
inline std::vector<DiagnosticResult> run_diagnostics(const DenseMatrix& x, const DiagnosticOptions& opt) {
    const std::size_t n = x.rows();
    if (n < 3) {
        throw ParameterError("diagnostics need at least 3 rows");
    }
    const double perp = std::min(opt.perplexity, static_cast<double>(n - 1));
    const Bandwidths tau = calibrate_bandwidths(pairwise_sq_dists(x), perp);
    const KernelMatrix kx = kernel_matrix(x, KernelKind::Gaussian, tau);
    const PosteriorSampler sampler(kx, PriorKind::D);

    std::vector<DiagnosticResult> out;
    DiagnosticResult trace_res{"trace identity", true, 0, 1e-8, "relative error"};
    DiagnosticResult shift_res{"shift invariance", true, 0, 1e-9, "relative error"};
    Rng rng = derive_stream(opt.seed, 1);
    for (std::size_t t = 0; t < opt.instances; ++t) {
        const LatentGraph w = sampler.sample(rng);
        trace_res.worst = std::max(trace_res.worst, trace_identity_error(x, w));
        for (KernelKind kind : {KernelKind::Gaussian, KernelKind::Student}) {
            shift_res.worst = std::max(shift_res.worst, shift_invariance_error(x, w, kind, tau, rng));
        }
    }
    trace_res.passed = trace_res.worst <= trace_res.tolerance;
    shift_res.passed = shift_res.worst <= shift_res.tolerance;
    out.push_back(trace_res);
    out.push_back(shift_res);

    const std::size_t m = std::min(opt.subset, n);
    DenseMatrix sub(m, x.cols());
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < x.cols(); ++k) {
            sub(i, k) = x(i, k);
        }
    }
    const Bandwidths sub_tau = calibrate_bandwidths(pairwise_sq_dists(sub), std::min(2.0, double(m - 1)));
    const KernelMatrix ksub = kernel_matrix(sub, KernelKind::Gaussian, sub_tau);
    std::uint64_t stream = 2;
    for (PriorKind prior : {PriorKind::B, PriorKind::D, PriorKind::E}) {
        DiagnosticResult r{"posterior frequencies (" + to_string(prior) + ")", true, 0, 4.0, "max z-score"};
        r.worst = posterior_frequency_zmax(ksub, prior, opt.samples, splitmix64(opt.seed + stream++));
        r.passed = r.worst <= r.tolerance;
        out.push_back(r);
    }
    return out;
}

} // namespace gcdr

#endif
