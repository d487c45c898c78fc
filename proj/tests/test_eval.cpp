#include "oracles.hpp"

#include <gcdr/eval.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

using gcdr::DenseMatrix;

namespace {

/// Neighbor set from the rank definition: j is among the K nearest of i when
/// fewer than K other points precede it in (distance, index) order.
std::set<std::size_t> rank_neighbors(const DenseMatrix& x, std::size_t i, std::size_t k) {
    std::set<std::size_t> out;
    for (std::size_t j = 0; j < x.rows(); ++j) {
        if (j == i) {
            continue;
        }
        const double dij = oracle::sqdist(x, i, j);
        std::size_t rank = 0;
        for (std::size_t l = 0; l < x.rows(); ++l) {
            if (l == i || l == j) {
                continue;
            }
            const double dil = oracle::sqdist(x, i, l);
            rank += dil < dij || (dil == dij && l < j);
        }
        if (rank < k) {
            out.insert(j);
        }
    }
    return out;
}

DenseMatrix grid_points(std::size_t n, std::mt19937_64& g) {
    // Small integer coordinates produce many exact distance ties.
    std::uniform_int_distribution<int> u(0, 4);
    DenseMatrix x(n, 2);
    for (double& v : x.data()) {
        v = u(g);
    }
    return x;
}

} // namespace

TEST(KaryAgreement, IdentityIsPerfect) {
    std::mt19937_64 g(1);
    const DenseMatrix x = oracle::random_matrix(40, 4, g);
    for (std::size_t k = 1; k <= 38; ++k) {
        const auto s = gcdr::kary_agreement(x, x, k);
        EXPECT_EQ(s.Q, 1.0);
        EXPECT_EQ(s.R, 1.0);
        EXPECT_EQ(s.K, k);
    }
}

TEST(KaryAgreement, RandomPermutationScoresNearZero) {
    std::mt19937_64 g(2);
    const DenseMatrix x = oracle::random_matrix(500, 5, g);
    double total = 0;
    for (int seed = 0; seed < 20; ++seed) {
        std::vector<std::size_t> perm(500);
        std::iota(perm.begin(), perm.end(), 0);
        std::mt19937_64 pg(100 + seed);
        std::shuffle(perm.begin(), perm.end(), pg);
        DenseMatrix z(500, 5);
        for (std::size_t i = 0; i < 500; ++i) {
            for (std::size_t k = 0; k < 5; ++k) {
                z(i, k) = x(perm[i], k);
            }
        }
        total += gcdr::kary_agreement(x, z, 125).R;
    }
    EXPECT_LE(std::abs(total / 20), 0.05);
}

TEST(KaryAgreement, NeighborSetsMatchRankOracle) {
    std::mt19937_64 g(3);
    for (std::size_t n : {5u, 12u, 30u, 50u}) {
        for (bool ties : {false, true}) {
            const DenseMatrix x = ties ? grid_points(n, g) : oracle::random_matrix(n, 3, g);
            for (std::size_t k : {std::size_t{1}, n / 4 + 1, n / 2, n - 2}) {
                const auto nn = gcdr::nearest_neighbors(x, k);
                for (std::size_t i = 0; i < n; ++i) {
                    EXPECT_EQ(std::set<std::size_t>(nn[i].begin(), nn[i].end()), rank_neighbors(x, i, k));
                }
            }
        }
    }
}

TEST(KaryAgreement, ScoreMatchesOracleOverlap) {
    std::mt19937_64 g(4);
    const DenseMatrix x = grid_points(30, g);
    const DenseMatrix z = oracle::random_matrix(30, 2, g);
    for (std::size_t k : {3u, 7u, 15u}) {
        std::size_t overlap = 0;
        for (std::size_t i = 0; i < 30; ++i) {
            const auto a = rank_neighbors(x, i, k);
            for (std::size_t j : rank_neighbors(z, i, k)) {
                overlap += a.count(j);
            }
        }
        const auto s = gcdr::kary_agreement(x, z, k);
        EXPECT_DOUBLE_EQ(s.Q, static_cast<double>(overlap) / (30.0 * k));
        EXPECT_EQ(s.R, (29 * s.Q - k) / (29.0 - k));
    }
}

TEST(KaryAgreement, RescalingZeroPoint) {
    EXPECT_NEAR(gcdr::rescale_agreement(25.0 / 99, 100, 25), 0.0, 1e-15);
    EXPECT_EQ(gcdr::rescale_agreement(1.0, 100, 25), 1.0);
}

TEST(KaryAgreement, Errors) {
    EXPECT_THROW(gcdr::kary_agreement(DenseMatrix(10, 2), DenseMatrix(10, 2), 0), gcdr::ParameterError);
    EXPECT_THROW(gcdr::kary_agreement(DenseMatrix(10, 2), DenseMatrix(10, 2), 9), gcdr::ParameterError);
    EXPECT_THROW(gcdr::kary_agreement(DenseMatrix(10, 2), DenseMatrix(9, 2), 3), gcdr::ContractViolation);
}

TEST(ResolveNeighborhoodSize, Forms) {
    EXPECT_EQ(gcdr::resolve_neighborhood_size("n/4", 150), 37u);
    EXPECT_EQ(gcdr::resolve_neighborhood_size("n/2", 150), 75u);
    EXPECT_EQ(gcdr::resolve_neighborhood_size("0.25", 150), 37u);
    EXPECT_EQ(gcdr::resolve_neighborhood_size("12", 150), 12u);
    for (const char* bad : {"x", "n/0", "1.5", "-3", "12abc", "n/"}) {
        EXPECT_THROW(gcdr::resolve_neighborhood_size(bad, 150), gcdr::ParameterError) << bad;
    }
}
