#ifndef GCDR_SYNTHETIC_HPP
#define GCDR_SYNTHETIC_HPP

#include "error.hpp"
#include "io.hpp"
#include "matrix.hpp"
#include "random.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

/**
 * @file synthetic.hpp
 *
 * @brief Seeded Gaussian-cluster datasets with known geometry.
 */

namespace gcdr {

/// Isotropic Gaussian clusters stored block by block; row `i` of `centers` gets `sizes[i]` points.
inline LabeledDataset gaussian_blobs(const DenseMatrix& centers, const std::vector<std::size_t>& sizes,
                                     const std::vector<double>& stddevs, std::uint64_t seed) {
    if (centers.rows() != sizes.size() || stddevs.size() != sizes.size()) {
        throw ContractViolation("gaussian_blobs: centers, sizes and stddevs disagree in length");
    }
    std::size_t n = 0;
    for (auto s : sizes) {
        n += s;
    }
    const std::size_t p = centers.cols();
    LabeledDataset out;
    out.X = DenseMatrix(n, p);
    Rng rng = derive_stream(seed, 0);
    std::size_t row = 0;
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (!(stddevs[c] >= 0)) {
            throw ParameterError("cluster spread must be non-negative");
        }
        out.categories.push_back(std::to_string(c));
        for (std::size_t k = 0; k < sizes[c]; ++k, ++row) {
            for (std::size_t j = 0; j < p; ++j) {
                out.X(row, j) = centers(c, j) + stddevs[c] * standard_normal(rng);
            }
            out.labels.push_back(static_cast<int>(c));
        }
    }
    for (std::size_t j = 0; j < p; ++j) {
        out.feature_names.push_back("x" + std::to_string(j + 1));
    }
    return out;
}

/**
 * Three unit-spread clusters of `n / 3` points in `p` dimensions with unequal
 * separations (the third cluster sits much farther away), so both local and
 * between-cluster arrangement carry information.
 */
inline LabeledDataset three_clusters(std::uint64_t seed, std::size_t n = 150, std::size_t p = 10) {
    if (p < 2 || n < 3) {
        throw ParameterError("three_clusters needs n >= 3 and p >= 2");
    }
    DenseMatrix centers(3, p);
    centers(1, 0) = 8.0;
    centers(2, 0) = 4.0;
    centers(2, 1) = 24.0;
    const std::size_t base = n / 3;
    std::vector<std::size_t> sizes{base, base, n - 2 * base};
    return gaussian_blobs(centers, sizes, {1.0, 1.0, 1.0}, seed);
}

/**
 * Three elongated clusters: cluster `c` is a segment of length `length` along
 * its own axis `2 + c`, offset to one corner of a triangle in the first two
 * axes, with isotropic noise. Points are uniform along each segment.
 */
inline LabeledDataset three_ribbons(std::uint64_t seed, std::size_t n = 150, std::size_t p = 10,
                                    double separation = 20.0, double length = 10.0, double noise = 0.5) {
    if (p < 5 || n < 3) {
        throw ParameterError("three_ribbons needs n >= 3 and p >= 5");
    }
    const double corner[3][2] = {{0, 0}, {separation, 0}, {0.5 * separation, 1.5 * separation}};
    const std::size_t base = n / 3;
    LabeledDataset out;
    out.X = DenseMatrix(n, p);
    Rng rng = derive_stream(seed, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = std::min<std::size_t>(i / base, 2);
        const double t = uniform01(rng);
        for (std::size_t k = 0; k < p; ++k) {
            out.X(i, k) = noise * standard_normal(rng);
        }
        out.X(i, 0) += corner[c][0];
        out.X(i, 1) += corner[c][1];
        out.X(i, 2 + c) += length * t;
        out.labels.push_back(static_cast<int>(c));
    }
    out.categories = {"0", "1", "2"};
    for (std::size_t j = 0; j < p; ++j) {
        out.feature_names.push_back("x" + std::to_string(j + 1));
    }
    return out;
}

} // namespace gcdr

#endif
