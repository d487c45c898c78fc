#ifndef GCDR_OPTIM_HPP
#define GCDR_OPTIM_HPP

#include "coupling.hpp"
#include "error.hpp"
#include "matrix.hpp"

#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <string>
#include <vector>

/**
 * @file optim.hpp
 *
 * @brief Full-gradient descent with momentum and per-coordinate adaptive gains.
 */

namespace gcdr {

struct ExaggerationConfig {
    double factor = 12.0;
    std::size_t iterations = 250;
    bool enabled = false;
};

struct OptimizerConfig {
    std::size_t iterations = 1000;
    double learning_rate = 200.0;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    std::size_t momentum_switch = 250;
    double min_gain = 0.01;
    double gain_increase = 0.2;
    double gain_decrease = 0.8;
    ExaggerationConfig exaggeration;
    /// Stop once the largest gradient component falls below this.
    double gradient_tolerance = 1e-7;
    /// Step halvings allowed when a trial point has infinite loss.
    int max_halvings = 30;
};

inline void validate(const OptimizerConfig& cfg) {
    if (!(cfg.learning_rate > 0)) {
        throw ParameterError("learning rate must be positive");
    }
    if (!(cfg.initial_momentum >= 0 && cfg.initial_momentum < 1) ||
        !(cfg.final_momentum >= 0 && cfg.final_momentum < 1)) {
        throw ParameterError("momentum must lie in [0, 1)");
    }
    if (!(cfg.min_gain > 0) || !(cfg.gain_increase > 0) || !(cfg.gain_decrease > 0)) {
        throw ParameterError("gain parameters must be positive");
    }
    if (cfg.exaggeration.enabled && !(cfg.exaggeration.factor > 0)) {
        throw ParameterError("exaggeration factor must be positive");
    }
}

struct EmbeddingState {
    DenseMatrix Z;
    DenseMatrix velocity;
    DenseMatrix gains;

    explicit EmbeddingState(DenseMatrix z)
        : Z(std::move(z)), velocity(Z.rows(), Z.cols()), gains(Z.rows(), Z.cols(), 1.0) {}
};

/// Anything with a value and a gradient; `exaggeration` may be ignored.
template<class T>
concept Objective = requires(const T& obj, const DenseMatrix& z, double ex) {
    { obj.value(z, ex) } -> std::convertible_to<double>;
    { obj.gradient(z, ex) } -> std::convertible_to<DenseMatrix>;
};

/// Coupling loss scaled by a constant, which rescales the effective learning rate.
struct CouplingObjective {
    const CouplingProblem* problem;
    double scale = 1.0;

    double value(const DenseMatrix& z, double ex) const { return scale * loss(*problem, z, ex); }
    DenseMatrix gradient(const DenseMatrix& z, double ex) const { return grad(*problem, z, ex) * scale; }
};

/// `|Z - A|_F^2`, used to exercise the optimizer on a convex problem.
struct QuadraticObjective {
    DenseMatrix target;

    double value(const DenseMatrix& z, double) const { return (z - target).frobenius() * (z - target).frobenius(); }
    DenseMatrix gradient(const DenseMatrix& z, double) const { return (z - target) * 2.0; }
};

struct TraceRecord {
    std::size_t iteration;
    double loss;
    double grad_max;
};

using TraceSink = std::function<void(const TraceRecord&)>;

struct OptimizationResult {
    /// Lowest unexaggerated-loss iterate seen, including the starting point.
    DenseMatrix Z;
    double best_loss = 0;
    std::size_t best_iteration = 0;
    /// Objective (with the exaggeration in force) after each iteration.
    std::vector<double> history;
    bool stopped_early = false;
    double last_grad_max = 0;
};

/**
 * Minimize `obj` from `z0`.
 *
 * Per iteration: the gain of each coordinate grows additively when the
 * gradient sign disagrees with the current velocity and shrinks
 * multiplicatively otherwise; velocity is `momentum * velocity - lr * gain * grad`.
 * A trial point with infinite objective halves the step (up to
 * `max_halvings` times) before the run is declared divergent.
 */
template<Objective Obj>
OptimizationResult minimize(const Obj& obj, const DenseMatrix& z0, const OptimizerConfig& cfg,
                            const TraceSink& trace = {}) {
    validate(cfg);
    const double start = obj.value(z0, 1.0);
    if (!std::isfinite(start)) {
        throw NumericalError("initial embedding has non-finite loss");
    }

    EmbeddingState state(z0);
    OptimizationResult out;
    out.Z = z0;
    out.best_loss = start;
    out.history.reserve(cfg.iterations);

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        const bool exaggerate = cfg.exaggeration.enabled && it < cfg.exaggeration.iterations;
        const double ex = exaggerate ? cfg.exaggeration.factor : 1.0;
        const double momentum = it < cfg.momentum_switch ? cfg.initial_momentum : cfg.final_momentum;

        const DenseMatrix g = obj.gradient(state.Z, ex);
        double gmax = 0;
        for (double v : g.data()) {
            if (std::isnan(v)) {
                throw DivergenceError(it, "NaN gradient at iteration " + std::to_string(it));
            }
            gmax = std::max(gmax, std::abs(v));
        }
        out.last_grad_max = gmax;
        if (gmax < cfg.gradient_tolerance) {
            out.stopped_early = true;
            break;
        }

        auto& gains = state.gains.data();
        auto& vel = state.velocity.data();
        const auto& gd = g.data();
        for (std::size_t k = 0; k < gd.size(); ++k) {
            const bool same_sign = (gd[k] > 0) == (vel[k] > 0);
            gains[k] = same_sign ? gains[k] * cfg.gain_decrease : gains[k] + cfg.gain_increase;
            gains[k] = std::max(gains[k], cfg.min_gain);
            vel[k] = momentum * vel[k] - cfg.learning_rate * gains[k] * gd[k];
        }

        DenseMatrix trial = state.Z + state.velocity;
        double f = obj.value(trial, ex);
        int halvings = 0;
        while (!std::isfinite(f) && !std::isnan(f) && halvings < cfg.max_halvings) {
            state.velocity *= 0.5;
            trial = state.Z + state.velocity;
            f = obj.value(trial, ex);
            ++halvings;
        }
        if (!std::isfinite(f)) {
            throw DivergenceError(it, "no finite step at iteration " + std::to_string(it) + " after " +
                                          std::to_string(halvings) + " halvings");
        }

        state.Z = std::move(trial);
        out.history.push_back(f);
        const double plain = exaggerate ? obj.value(state.Z, 1.0) : f;
        if (plain < out.best_loss) {
            out.best_loss = plain;
            out.best_iteration = it + 1;
            out.Z = state.Z;
        }
        if (trace) {
            trace({it, f, gmax});
        }
    }
    return out;
}

} // namespace gcdr

#endif
