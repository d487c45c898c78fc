#include "oracles.hpp"

#include <gcdr/coupling.hpp>
#include <gcdr/kernels.hpp>
#include <gcdr/linalg.hpp>
#include <gcdr/optim.hpp>
#include <gcdr/parallel.hpp>
#include <gcdr/synthetic.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

using gcdr::DenseMatrix;
using gcdr::OptimizerConfig;

namespace {

gcdr::CouplingProblem tsne_problem(const DenseMatrix& x, double perplexity) {
    const auto tau = gcdr::calibrate_bandwidths(gcdr::pairwise_sq_dists(x), perplexity);
    const auto kx = gcdr::kernel_matrix(x, gcdr::KernelKind::Gaussian, tau);
    return gcdr::make_coupling_problem(gcdr::MethodKind::TSNE,
                                       gcdr::symmetrize_row_affinity(gcdr::posterior_expectation(kx, gcdr::PriorKind::D)));
}

/// Lloyd's algorithm seeded with farthest-point selection from row 0.
std::vector<int> three_means(const DenseMatrix& z) {
    const std::size_t n = z.rows();
    std::vector<std::size_t> seeds{0};
    while (seeds.size() < 3) {
        std::size_t best = 0;
        double far = -1;
        for (std::size_t i = 0; i < n; ++i) {
            double near = std::numeric_limits<double>::infinity();
            for (auto s : seeds) {
                double d = 0;
                for (std::size_t k = 0; k < z.cols(); ++k) {
                    d += (z(i, k) - z(s, k)) * (z(i, k) - z(s, k));
                }
                near = std::min(near, d);
            }
            if (near > far) {
                far = near;
                best = i;
            }
        }
        seeds.push_back(best);
    }
    DenseMatrix c(3, z.cols());
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t k = 0; k < z.cols(); ++k) {
            c(a, k) = z(seeds[a], k);
        }
    }
    std::vector<int> assign(n, 0);
    for (int it = 0; it < 100; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int a = 0; a < 3; ++a) {
                double d = 0;
                for (std::size_t k = 0; k < z.cols(); ++k) {
                    d += (z(i, k) - c(a, k)) * (z(i, k) - c(a, k));
                }
                if (d < best) {
                    best = d;
                    assign[i] = a;
                }
            }
        }
        DenseMatrix sum(3, z.cols());
        std::vector<double> count(3, 0);
        for (std::size_t i = 0; i < n; ++i) {
            count[assign[i]] += 1;
            for (std::size_t k = 0; k < z.cols(); ++k) {
                sum(assign[i], k) += z(i, k);
            }
        }
        for (int a = 0; a < 3; ++a) {
            for (std::size_t k = 0; k < z.cols(); ++k) {
                c(a, k) = count[a] > 0 ? sum(a, k) / count[a] : c(a, k);
            }
        }
    }
    return assign;
}

double purity(const std::vector<int>& clusters, const std::vector<int>& labels) {
    std::size_t agree = 0;
    for (int a = 0; a < 3; ++a) {
        std::vector<std::size_t> votes(3, 0);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (clusters[i] == a) {
                ++votes[labels[i]];
            }
        }
        agree += *std::max_element(votes.begin(), votes.end());
    }
    return static_cast<double>(agree) / static_cast<double>(labels.size());
}

DenseMatrix small_random(std::size_t n, std::size_t q, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    return oracle::random_matrix(n, q, g, 1e-4);
}

struct NanAfter {
    std::size_t* calls;
    std::size_t limit;
    double value(const DenseMatrix& z, double) const { return z.frobenius(); }
    DenseMatrix gradient(const DenseMatrix& z, double) const {
        DenseMatrix g = z;
        if (++*calls > limit) {
            g(0, 0) = std::numeric_limits<double>::quiet_NaN();
        }
        return g;
    }
};

/// Finite inside the unit ball, infinite outside: overshooting steps must be halved.
struct Walled {
    double value(const DenseMatrix& z, double) const {
        const double r = z.frobenius();
        return r < 1 ? (z(0, 0) - 0.5) * (z(0, 0) - 0.5) : std::numeric_limits<double>::infinity();
    }
    DenseMatrix gradient(const DenseMatrix& z, double) const {
        DenseMatrix g(z.rows(), z.cols());
        g(0, 0) = 2 * (z(0, 0) - 0.5);
        return g;
    }
};

} // namespace

TEST(Minimize, QuadraticConverges) {
    std::mt19937_64 g(1);
    const DenseMatrix a = oracle::random_matrix(5, 2, g, 3.0);
    OptimizerConfig cfg;
    cfg.iterations = 500;
    cfg.learning_rate = 0.1;
    const auto res = gcdr::minimize(gcdr::QuadraticObjective{a}, DenseMatrix(5, 2), cfg);
    DenseMatrix diff = res.Z;
    diff -= a;
    EXPECT_LE(diff.max_abs(), 1e-6);
    EXPECT_LE(res.history.size(), 500u);
}

TEST(Minimize, QuadraticStopsEarlyAtStationaryPoint) {
    const DenseMatrix a{{1, 2}};
    OptimizerConfig cfg;
    cfg.iterations = 10;
    const auto res = gcdr::minimize(gcdr::QuadraticObjective{a}, a, cfg);
    EXPECT_TRUE(res.stopped_early);
    EXPECT_TRUE(res.history.empty());
    EXPECT_EQ(res.Z, a);
    EXPECT_LT(res.last_grad_max, 10 * cfg.gradient_tolerance);
}

TEST(Minimize, TsneSeparatesThreeClusters) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto data = gcdr::three_clusters(seed, 60, 5);
        const auto prob = tsne_problem(data.X, 10.0);
        OptimizerConfig cfg;
        cfg.exaggeration.enabled = true;
        // The default rate of 200 is tuned for hundreds of points; at n = 60 it strands stray points.
        cfg.learning_rate = 50;
        const gcdr::CouplingObjective obj{&prob, 1.0 / gcdr::input_mass(prob)};
        const DenseMatrix z0 = small_random(60, 2, seed);
        const auto res = gcdr::minimize(obj, z0, cfg);
        EXPECT_LT(res.best_loss, obj.value(z0, 1.0));
        EXPECT_EQ(purity(three_means(res.Z), data.labels), 1.0) << "seed " << seed;
    }
}

TEST(Minimize, ExaggerationSwitchIsVisibleInHistory) {
    const auto data = gcdr::three_clusters(7, 60, 5);
    const auto prob = tsne_problem(data.X, 10.0);
    OptimizerConfig cfg;
    cfg.iterations = 300;
    cfg.exaggeration.enabled = true;
    const gcdr::CouplingObjective obj{&prob, 1.0 / gcdr::input_mass(prob)};
    const auto res = gcdr::minimize(obj, small_random(60, 2, 3), cfg);
    ASSERT_EQ(res.history.size(), 300u);
    double smooth = 0;
    for (std::size_t i = 200; i < 249; ++i) {
        smooth = std::max(smooth, std::abs(res.history[i + 1] - res.history[i]));
    }
    const double jump = res.history[249] - res.history[250];
    EXPECT_GT(jump, 100 * smooth);
    // For t-SNE the exaggerated objective is exactly the factor times the plain one.
    EXPECT_NEAR(obj.value(res.Z, 12.0), 12.0 * obj.value(res.Z, 1.0), 1e-9);
}

TEST(Minimize, HistorySettlesAfterExaggeration) {
    const auto data = gcdr::three_clusters(8, 60, 5);
    const auto prob = tsne_problem(data.X, 10.0);
    OptimizerConfig cfg;
    cfg.exaggeration.enabled = true;
    const gcdr::CouplingObjective obj{&prob, 1.0 / gcdr::input_mass(prob)};
    const auto res = gcdr::minimize(obj, small_random(60, 2, 4), cfg);
    // Window means over 50 iterations, past the schedule switch.
    std::vector<double> means;
    for (std::size_t start = 300; start + 50 <= res.history.size(); start += 50) {
        double s = 0;
        for (std::size_t i = start; i < start + 50; ++i) {
            s += res.history[i];
        }
        means.push_back(s / 50);
    }
    ASSERT_FALSE(means.empty());
    for (std::size_t w = 1; w < means.size(); ++w) {
        EXPECT_LE(means[w], means[w - 1] + 1e-12);
    }
}

TEST(Minimize, BestSoFarNeverWorseThanAnyIterate) {
    const auto data = gcdr::three_clusters(9, 45, 4);
    const auto prob = tsne_problem(data.X, 8.0);
    OptimizerConfig cfg;
    cfg.iterations = 400;
    const gcdr::CouplingObjective obj{&prob, 1.0 / gcdr::input_mass(prob)};
    std::vector<double> seen;
    const auto res = gcdr::minimize(obj, small_random(45, 2, 5), cfg,
                                    [&](const gcdr::TraceRecord& r) { seen.push_back(r.loss); });
    EXPECT_EQ(seen, res.history);
    EXPECT_EQ(obj.value(res.Z, 1.0), res.best_loss);
    for (double h : res.history) {
        EXPECT_LE(res.best_loss, h);
    }
    EXPECT_LE(res.best_loss, obj.value(small_random(45, 2, 5), 1.0));
    EXPECT_EQ(res.history[res.best_iteration - 1], res.best_loss);
}

TEST(Minimize, DeterministicAcrossRunsAndThreads) {
    const auto data = gcdr::three_clusters(10, 60, 5);
    const auto prob = tsne_problem(data.X, 10.0);
    OptimizerConfig cfg;
    cfg.iterations = 300;
    cfg.exaggeration.enabled = true;
    const gcdr::CouplingObjective obj{&prob, 1.0 / gcdr::input_mass(prob)};
    const int saved = gcdr::num_threads();
    gcdr::set_num_threads(1);
    const auto a = gcdr::minimize(obj, small_random(60, 2, 6), cfg);
    const auto b = gcdr::minimize(obj, small_random(60, 2, 6), cfg);
    gcdr::set_num_threads(3);
    const auto c = gcdr::minimize(obj, small_random(60, 2, 6), cfg);
    gcdr::set_num_threads(saved);
    EXPECT_EQ(a.Z, b.Z);
    EXPECT_EQ(a.Z, c.Z);
    EXPECT_EQ(a.history, c.history);
}

TEST(Minimize, InfiniteStepsAreHalved) {
    OptimizerConfig cfg;
    cfg.iterations = 200;
    cfg.learning_rate = 5.0;
    const auto res = gcdr::minimize(Walled{}, DenseMatrix(1, 2), cfg);
    for (double h : res.history) {
        EXPECT_TRUE(std::isfinite(h));
    }
    EXPECT_LT(res.Z.frobenius(), 1.0);
    EXPECT_NEAR(res.Z(0, 0), 0.5, 1e-6);
}

TEST(Minimize, Errors) {
    OptimizerConfig cfg;
    cfg.iterations = 20;
    std::size_t calls = 0;
    try {
        gcdr::minimize(NanAfter{&calls, 3}, DenseMatrix{{1, 1}}, cfg);
        FAIL();
    } catch (const gcdr::DivergenceError& e) {
        EXPECT_EQ(e.iteration(), 3u);
    }
    EXPECT_THROW(gcdr::minimize(Walled{}, DenseMatrix{{2, 0}}, cfg), gcdr::NumericalError);
    cfg.learning_rate = 0;
    EXPECT_THROW(gcdr::minimize(gcdr::QuadraticObjective{DenseMatrix(1, 1)}, DenseMatrix(1, 1), cfg),
                 gcdr::ParameterError);
}
