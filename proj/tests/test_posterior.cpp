#include "oracles.hpp"

#include <gcdr/posterior.hpp>

#include <gtest/gtest.h>

#include <cmath>

using gcdr::AffinityMatrix;
using gcdr::DenseMatrix;
using gcdr::KernelMatrix;
using gcdr::LatentGraph;
using gcdr::Normalization;
using gcdr::PriorKind;

namespace {

KernelMatrix km(DenseMatrix v) { return KernelMatrix{std::move(v), gcdr::KernelKind::Gaussian, std::nullopt}; }

/// Per-cell z-scores of empirical edge frequencies (E counts are binomial with n trials).
double max_zscore(const KernelMatrix& k, PriorKind prior, std::size_t samples, std::uint64_t seed) {
    const std::size_t n = k.size();
    const gcdr::PosteriorSampler s(k, prior);
    auto rng = gcdr::derive_stream(seed, 0);
    DenseMatrix counts(n, n);
    for (std::size_t t = 0; t < samples; ++t) {
        const LatentGraph w = s.sample(rng);
        for (std::size_t c = 0; c < n * n; ++c) {
            counts.data()[c] += static_cast<double>(w.weights()[c]);
        }
    }
    // Expected edge probabilities computed here from the kernel, not via the library.
    DenseMatrix p(n, n);
    double total = k.values.sum();
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0;
        for (std::size_t j = 0; j < n; ++j) {
            row += k.values(i, j);
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double a = k.values(i, j);
            p(i, j) = prior == PriorKind::B ? a / (1 + a) : prior == PriorKind::D ? a / row : a / total;
        }
    }
    const double trials = prior == PriorKind::E ? static_cast<double>(n) : 1.0;
    double worst = 0;
    for (std::size_t c = 0; c < n * n; ++c) {
        const double pc = p.data()[c];
        const double freq = counts.data()[c] / (samples * trials);
        const double se = std::sqrt(pc * (1 - pc) / (samples * trials));
        if (se == 0) {
            EXPECT_EQ(freq, pc);
            continue;
        }
        worst = std::max(worst, std::abs(freq - pc) / se);
    }
    return worst;
}

} // namespace

TEST(PosteriorExpectation, Examples) {
    const auto d = gcdr::posterior_expectation(km(DenseMatrix{{0, 2, 2}, {1, 0, 1}, {1, 3, 0}}), PriorKind::D);
    EXPECT_EQ(d.values(0, 1), 0.5);
    EXPECT_EQ(d.values(0, 2), 0.5);
    EXPECT_EQ(d.values(2, 1), 0.75);
    EXPECT_EQ(d.normalization, Normalization::Row);

    const auto b = gcdr::posterior_expectation(km(DenseMatrix{{0, 1}, {1, 0}}), PriorKind::B);
    EXPECT_EQ(b.values, (DenseMatrix{{0, .5}, {.5, 0}}));
    EXPECT_EQ(b.normalization, Normalization::Bernoulli);

    const auto e = gcdr::posterior_expectation(km(DenseMatrix{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}), PriorKind::E);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            EXPECT_DOUBLE_EQ(e.values(i, j), i == j ? 0.0 : 1.0 / 6);
        }
    }
    EXPECT_EQ(e.normalization, Normalization::Global);
}

TEST(PosteriorExpectation, ScaleInvarianceOfDAndEOnly) {
    std::mt19937_64 g(1);
    const DenseMatrix k = oracle::random_kernel(6, g);
    // Power-of-two scale keeps the comparison exact.
    const DenseMatrix k8 = k * 8.0;
    for (auto prior : {PriorKind::D, PriorKind::E}) {
        EXPECT_EQ(gcdr::posterior_expectation(km(k), prior).values, gcdr::posterior_expectation(km(k8), prior).values);
    }
    const auto b1 = gcdr::posterior_expectation(km(k), PriorKind::B).values;
    const auto b8 = gcdr::posterior_expectation(km(k8), PriorKind::B).values;
    EXPECT_GT(oracle::rel_frobenius(b1, b8), 1e-3);
    // Non-dyadic scale: equal up to rounding.
    const auto d3 = gcdr::posterior_expectation(km(k * 3.7), PriorKind::D).values;
    EXPECT_LE(oracle::rel_frobenius(gcdr::posterior_expectation(km(k), PriorKind::D).values, d3), 1e-15);
}

TEST(PosteriorExpectation, EdgePriorWeights) {
    const DenseMatrix k{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
    const DenseMatrix pi{{1, 3, 1}, {1, 1, 1}, {1, 1, 1}};
    const auto d = gcdr::posterior_expectation(km(k), PriorKind::D, pi);
    EXPECT_DOUBLE_EQ(d.values(0, 1), 0.75);
    EXPECT_THROW(gcdr::posterior_expectation(km(k), PriorKind::D, DenseMatrix(2, 2)), gcdr::ContractViolation);
    EXPECT_THROW(gcdr::posterior_expectation(km(k), PriorKind::D, pi * -1.0), gcdr::ContractViolation);
}

TEST(PosteriorExpectation, Errors) {
    try {
        gcdr::posterior_expectation(km(DenseMatrix{{0, 1, 0}, {0, 0, 0}, {1, 0, 0}}), PriorKind::D);
        FAIL();
    } catch (const gcdr::IsolatedNodeError& e) {
        EXPECT_EQ(e.node(), 1u);
    }
    EXPECT_THROW(gcdr::posterior_expectation(km(DenseMatrix(3, 3)), PriorKind::E), gcdr::DataError);
    EXPECT_THROW(gcdr::posterior_expectation(km(DenseMatrix{{1, 1}, {1, 0}}), PriorKind::B), gcdr::ContractViolation);
    // B tolerates empty rows.
    EXPECT_EQ(gcdr::posterior_expectation(km(DenseMatrix(2, 2)), PriorKind::B).values, DenseMatrix(2, 2));
}

TEST(Sampler, SingleSupportAndZeroKernel) {
    auto rng = gcdr::derive_stream(3, 0);
    const gcdr::PosteriorSampler d(km(DenseMatrix{{0, 5, 0}, {1, 0, 0}, {0, 2, 0}}), PriorKind::D);
    const gcdr::PosteriorSampler b(km(DenseMatrix(4, 4)), PriorKind::B);
    for (int t = 0; t < 200; ++t) {
        const LatentGraph w = d.sample(rng);
        EXPECT_EQ(w(0, 1), 1);
        EXPECT_EQ(w(1, 0), 1);
        EXPECT_EQ(w(2, 1), 1);
        EXPECT_EQ(b.sample(rng), LatentGraph(4));
    }
}

TEST(Sampler, SupportConstraints) {
    std::mt19937_64 g(4);
    const KernelMatrix k = km(oracle::random_kernel(7, g));
    auto rng = gcdr::derive_stream(5, 0);
    for (auto prior : {PriorKind::B, PriorKind::D, PriorKind::E}) {
        const gcdr::PosteriorSampler s(k, prior);
        for (int t = 0; t < 300; ++t) {
            const LatentGraph w = s.sample(rng);
            EXPECT_NO_THROW(w.validate());
            if (prior == PriorKind::D) {
                for (std::size_t i = 0; i < 7; ++i) {
                    EXPECT_EQ(w.out_degree(i), 1);
                }
            }
            if (prior == PriorKind::E) {
                EXPECT_EQ(w.total(), 7);
            }
            if (prior != PriorKind::E) {
                for (auto v : w.weights()) {
                    EXPECT_LE(v, 1);
                }
            }
        }
    }
}

TEST(Sampler, EdgeFrequenciesMatchExpectation) {
    std::mt19937_64 g(6);
    const KernelMatrix k = km(oracle::random_kernel(5, g, 0.05, 2.0));
    for (auto prior : {PriorKind::B, PriorKind::D, PriorKind::E}) {
        EXPECT_LE(max_zscore(k, prior, 100000, 17 + static_cast<int>(prior)), 4.0) << gcdr::to_string(prior);
    }
}

TEST(Sampler, DeterministicPerStream) {
    std::mt19937_64 g(7);
    const KernelMatrix k = km(oracle::random_kernel(6, g));
    for (auto prior : {PriorKind::B, PriorKind::D, PriorKind::E}) {
        auto r1 = gcdr::derive_stream(9, 4);
        auto r2 = gcdr::derive_stream(9, 4);
        EXPECT_EQ(gcdr::sample_posterior_graph(k, prior, std::nullopt, r1),
                  gcdr::sample_posterior_graph(k, prior, std::nullopt, r2));
    }
}

TEST(SymmetrizeRowAffinity, Examples) {
    const AffinityMatrix sym{DenseMatrix{{0, .5, .5}, {.5, 0, .5}, {.5, .5, 0}}, PriorKind::D, Normalization::Row};
    const auto pb = gcdr::symmetrize_row_affinity(sym);
    EXPECT_EQ(pb.values, sym.values * 2.0);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            EXPECT_EQ(pb.values(i, j), i == j ? 0.0 : 1.0);
        }
    }
    const auto two = gcdr::symmetrize_row_affinity(
        AffinityMatrix{DenseMatrix{{0, 1}, {1, 0}}, PriorKind::D, Normalization::Row});
    EXPECT_EQ(two.values, (DenseMatrix{{0, 2}, {2, 0}}));
    EXPECT_EQ(two.values.sum(), 4.0);
    EXPECT_EQ(two.normalization, Normalization::SymmetrizedRow);
    EXPECT_THROW(gcdr::symmetrize_row_affinity(AffinityMatrix{DenseMatrix(2, 2), PriorKind::B, Normalization::Bernoulli}),
                 gcdr::ContractViolation);
}

TEST(UmapThresholdProb, Examples) {
    const AffinityMatrix half{DenseMatrix{{0, .5}, {.5, 0}}, PriorKind::B, Normalization::Bernoulli};
    EXPECT_EQ(gcdr::umap_threshold_prob(half).values, (DenseMatrix{{0, .75}, {.75, 0}}));
    const AffinityMatrix zero{DenseMatrix(3, 3), PriorKind::B, Normalization::Bernoulli};
    EXPECT_EQ(gcdr::umap_threshold_prob(zero).values, DenseMatrix(3, 3));
    const double delta = 0.125;
    const AffinityMatrix one_way{DenseMatrix{{0, 1 - delta}, {0, 0}}, PriorKind::B, Normalization::Bernoulli};
    EXPECT_EQ(gcdr::umap_threshold_prob(one_way).values(0, 1), 1 - delta);
    EXPECT_THROW(gcdr::umap_threshold_prob(AffinityMatrix{DenseMatrix(2, 2), PriorKind::D, Normalization::Row}),
                 gcdr::ContractViolation);
}

TEST(UmapThresholdProb, MatchesSymmetrizedBernoulliSampling) {
    std::mt19937_64 g(8);
    const KernelMatrix k = km(oracle::random_kernel(4, g, 0.05, 2.0));
    const auto pt = gcdr::umap_threshold_prob(gcdr::posterior_expectation(k, PriorKind::B));
    const gcdr::PosteriorSampler s(k, PriorKind::B);
    auto rng = gcdr::derive_stream(21, 0);
    const std::size_t samples = 100000;
    DenseMatrix hits(4, 4);
    for (std::size_t t = 0; t < samples; ++t) {
        const LatentGraph w = s.sample(rng);
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                hits(i, j) += (w(i, j) + w(j, i)) >= 1 ? 1.0 : 0.0;
            }
        }
    }
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            if (i == j) {
                continue;
            }
            const double p = pt.values(i, j);
            const double se = std::sqrt(p * (1 - p) / samples);
            EXPECT_LE(std::abs(hits(i, j) / samples - p), 4 * se);
        }
    }
}
