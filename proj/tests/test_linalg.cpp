#include "oracles.hpp"

#include <gcdr/linalg.hpp>

#include <gtest/gtest.h>

#include <cmath>

using gcdr::DenseMatrix;

namespace {

DenseMatrix reconstruct(const gcdr::SymEigResult& e) {
    const std::size_t n = e.values.size();
    DenseMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                out(i, j) += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
            }
        }
    }
    return out;
}

} // namespace

TEST(SymEig, Identity) {
    const auto e = gcdr::sym_eig(DenseMatrix::identity(3));
    for (double v : e.values) {
        EXPECT_DOUBLE_EQ(v, 1.0);
    }
    // A signed permutation of the identity: each column has one entry of magnitude 1.
    for (std::size_t c = 0; c < 3; ++c) {
        double norm1 = 0;
        for (std::size_t r = 0; r < 3; ++r) {
            norm1 += std::abs(e.vectors(r, c));
        }
        EXPECT_DOUBLE_EQ(norm1, 1.0);
    }
}

TEST(SymEig, Diagonal) {
    const auto e = gcdr::sym_eig(DenseMatrix{{1, 0}, {0, 3}});
    EXPECT_DOUBLE_EQ(e.values[0], 3.0);
    EXPECT_DOUBLE_EQ(e.values[1], 1.0);
    EXPECT_DOUBLE_EQ(std::abs(e.vectors(1, 0)), 1.0);
    EXPECT_DOUBLE_EQ(std::abs(e.vectors(0, 1)), 1.0);
}

TEST(SymEig, TwoByTwoHandSolved) {
    // det([[2-l,1],[1,2-l]]) = (2-l)^2 - 1 = 0  ->  l = 3, 1.
    const auto e = gcdr::sym_eig(DenseMatrix{{2, 1}, {1, 2}});
    EXPECT_NEAR(e.values[0], 3.0, 1e-14);
    EXPECT_NEAR(e.values[1], 1.0, 1e-14);
    const double r = 1 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(e.vectors(0, 0)), r, 1e-14);
    EXPECT_NEAR(e.vectors(0, 0) * e.vectors(1, 0), 0.5, 1e-14);
    EXPECT_NEAR(e.vectors(0, 1) * e.vectors(1, 1), -0.5, 1e-14);
}

TEST(SymEig, RandomReconstructionAndOrthogonality) {
    std::mt19937_64 g(11);
    for (std::size_t n : {1, 2, 5, 11, 20}) {
        for (int rep = 0; rep < 5; ++rep) {
            const DenseMatrix a = oracle::random_symmetric(n, g);
            const auto e = gcdr::sym_eig(a);
            EXPECT_LE(oracle::rel_frobenius(a, reconstruct(e)), 1e-8);
            const DenseMatrix vtv = oracle::naive_matmul(e.vectors.transpose(), e.vectors);
            EXPECT_LE(oracle::rel_frobenius(DenseMatrix::identity(n), vtv), 1e-12);
            for (std::size_t k = 1; k < n; ++k) {
                EXPECT_GE(e.values[k - 1], e.values[k]);
            }
        }
    }
}

TEST(SymEig, Deterministic) {
    std::mt19937_64 g(5);
    const DenseMatrix a = oracle::random_symmetric(9, g);
    const auto e1 = gcdr::sym_eig(a);
    const auto e2 = gcdr::sym_eig(a);
    EXPECT_EQ(e1.values, e2.values);
    EXPECT_EQ(e1.vectors, e2.vectors);
}

TEST(SymEig, SignConventionLargestComponentPositive) {
    std::mt19937_64 g(8);
    const auto e = gcdr::sym_eig(oracle::random_symmetric(6, g));
    for (std::size_t c = 0; c < 6; ++c) {
        std::size_t best = 0;
        for (std::size_t r = 1; r < 6; ++r) {
            if (std::abs(e.vectors(r, c)) > std::abs(e.vectors(best, c))) {
                best = r;
            }
        }
        EXPECT_GT(e.vectors(best, c), 0.0);
    }
}

TEST(SymEig, RejectsAsymmetricInput) {
    EXPECT_THROW(gcdr::sym_eig(DenseMatrix{{1, 2}, {0, 1}}), gcdr::ContractViolation);
    EXPECT_THROW(gcdr::sym_eig(DenseMatrix(2, 3)), gcdr::ContractViolation);
}

TEST(SymEig, ReportsNonConvergence) {
    std::mt19937_64 g(2);
    gcdr::JacobiOptions opt;
    opt.max_sweeps = 1;
    opt.tolerance = 1e-300;
    EXPECT_THROW(gcdr::sym_eig(oracle::random_symmetric(8, g), opt), gcdr::NumericalError);
}

TEST(CenterColumns, Examples) {
    EXPECT_EQ(gcdr::center_columns(DenseMatrix{{1}, {3}}), (DenseMatrix{{-1}, {1}}));
    EXPECT_EQ(gcdr::center_columns(DenseMatrix(3, 2)), DenseMatrix(3, 2));
    EXPECT_EQ(gcdr::center_columns(DenseMatrix{{1, 2}, {3, 4}, {5, 6}}), (DenseMatrix{{-2, -2}, {0, 0}, {2, 2}}));
}

TEST(PairwiseSqDists, Examples) {
    EXPECT_EQ(gcdr::pairwise_sq_dists(DenseMatrix{{0}, {1}}), (DenseMatrix{{0, 1}, {1, 0}}));
    EXPECT_EQ(gcdr::pairwise_sq_dists(DenseMatrix{{2, 5}, {2, 5}, {2, 5}}), DenseMatrix(3, 3));
    const auto d = gcdr::pairwise_sq_dists(DenseMatrix{{0, 0}, {3, 4}});
    EXPECT_EQ(d(0, 1), 25.0);
    EXPECT_EQ(d(1, 0), 25.0);
}

TEST(PairwiseSqDists, SymmetricAndTranslationInvariant) {
    std::mt19937_64 g(3);
    const DenseMatrix x = oracle::random_matrix(15, 4, g);
    DenseMatrix shifted = x;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        shifted(i, 0) += 3.5;
        shifted(i, 3) -= 1.25;
    }
    const auto d = gcdr::pairwise_sq_dists(x);
    const auto ds = gcdr::pairwise_sq_dists(shifted);
    for (std::size_t i = 0; i < 15; ++i) {
        for (std::size_t j = 0; j < 15; ++j) {
            EXPECT_EQ(d(i, j), d(j, i));
            EXPECT_NEAR(d(i, j), oracle::sqdist(x, i, j), 1e-12);
            EXPECT_LE(std::abs(d(i, j) - ds(i, j)), 1e-10);
        }
    }
}

TEST(Matmul, MatchesNaiveProductAndGram) {
    std::mt19937_64 g(4);
    const DenseMatrix a = oracle::random_matrix(7, 5, g);
    const DenseMatrix b = oracle::random_matrix(5, 3, g);
    EXPECT_LE(oracle::rel_frobenius(oracle::naive_matmul(a, b), gcdr::matmul(a, b)), 1e-14);
    EXPECT_LE(oracle::rel_frobenius(oracle::naive_matmul(a, a.transpose()), gcdr::gram(a)), 1e-14);
    EXPECT_THROW(gcdr::matmul(a, a), gcdr::ContractViolation);
    EXPECT_DOUBLE_EQ(gcdr::trace(DenseMatrix{{1, 9}, {9, 2}}), 3.0);
}
