#ifndef GCDR_PIPELINE_HPP
#define GCDR_PIPELINE_HPP

#include "ccpca.hpp"
#include "coupling.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "kernels.hpp"
#include "linalg.hpp"
#include "optim.hpp"
#include "posterior.hpp"
#include "random.hpp"
#include "spectral.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

/**
 * @file pipeline.hpp
 *
 * @brief affinity -> init -> fit -> eval, with a manifest that pins down the run.
 */

namespace gcdr {

enum class InitKind { Random, PCA, LE, CCPCA };

inline std::string to_string(InitKind k) {
    switch (k) {
    case InitKind::Random:
        return "random";
    case InitKind::PCA:
        return "pca";
    case InitKind::LE:
        return "le";
    case InitKind::CCPCA:
        return "ccpca";
    }
    return "?";
}

inline InitKind init_from_string(const std::string& s) {
    if (s == "random") {
        return InitKind::Random;
    }
    if (s == "pca") {
        return InitKind::PCA;
    }
    if (s == "le") {
        return InitKind::LE;
    }
    if (s == "ccpca") {
        return InitKind::CCPCA;
    }
    throw ParameterError("unknown init '" + s + "' (expected random, pca, le or ccpca)");
}

struct RunSpec {
    MethodKind method = MethodKind::TSNE;
    InitKind init = InitKind::PCA;
    double perplexity = 30.0;
    std::size_t q = 2;
    OptimizerConfig optimizer;
    /// Unset: early exaggeration for tsne only.
    std::optional<bool> exaggerate;
    CcpcaConfig ccpca;
    std::uint64_t seed = 0;
};

struct StageTiming {
    std::string stage;
    double milliseconds = 0;
};

struct InputFingerprint {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::uint64_t hash = 0;
};

struct RunManifest {
    RunSpec spec;
    InputFingerprint input;
    std::vector<StageTiming> timings;
    double initial_loss = 0;
    double final_loss = 0;
    std::size_t best_iteration = 0;
    std::size_t iterations_run = 0;
    bool stopped_early = false;
    std::vector<NeighborhoodScore> scores;
    std::map<std::string, std::string> artifacts;
};

/// FNV-1a over the shape and the raw bytes of every entry.
inline std::uint64_t fingerprint_hash(const DenseMatrix& x) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t word) {
        for (int b = 0; b < 8; ++b) {
            h ^= (word >> (8 * b)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    mix(x.rows());
    mix(x.cols());
    for (double v : x.data()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        mix(bits);
    }
    return h;
}

inline InputFingerprint fingerprint(const DenseMatrix& x) { return {x.rows(), x.cols(), fingerprint_hash(x)}; }

/// The input-side affinity each method couples against.
inline AffinityMatrix input_affinity(MethodKind method, const KernelMatrix& kx) {
    switch (method) {
    case MethodKind::SNE:
        return posterior_expectation(kx, PriorKind::D);
    case MethodKind::TSNE:
    case MethodKind::LARGEVIS:
        return symmetrize_row_affinity(posterior_expectation(kx, PriorKind::D));
    case MethodKind::UMAP:
        return umap_threshold_prob(posterior_expectation(kx, PriorKind::B));
    }
    throw ContractViolation("input_affinity: unknown method");
}

/// Scale so the largest coordinate magnitude is `1e-4 * sqrt(n)`; an all-zero init is left alone.
inline DenseMatrix rescale_init(DenseMatrix z) {
    const double m = z.max_abs();
    if (m > 0) {
        z *= 1e-4 * std::sqrt(static_cast<double>(z.rows())) / m;
    }
    return z;
}

/// Stream reserved for the random initialization, away from ccPCA's per-sample streams.
inline constexpr std::uint64_t init_stream_index = 0xffffffffffffULL;

inline DenseMatrix random_init(std::size_t n, std::size_t q, std::uint64_t seed) {
    Rng rng = derive_stream(seed, init_stream_index);
    DenseMatrix z(n, q);
    for (double& v : z.data()) {
        v = 1e-4 * standard_normal(rng);
    }
    return z;
}

inline void validate(const RunSpec& spec, const DenseMatrix& x) {
    const std::size_t n = x.rows();
    if (n < 4) {
        throw ParameterError("need at least 4 points, got " + std::to_string(n));
    }
    if (!x.all_finite()) {
        throw DataError("input contains non-finite values");
    }
    detail::require_rank(spec.q, n, x.cols());
    if (!(spec.perplexity >= 1.0 && spec.perplexity <= static_cast<double>(n - 1))) {
        throw ParameterError("perplexity must lie in [1, n-1] = [1, " + std::to_string(n - 1) + "]");
    }
    validate(spec.optimizer);
    if (spec.init == InitKind::CCPCA && spec.ccpca.samples == 0) {
        throw ParameterError("ccPCA needs at least one Monte-Carlo sample");
    }
}

namespace detail {

/// Re-raise any library error with the stage name prepended, keeping its category.
template<class Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
    const std::string tag = std::string("[") + stage + "] ";
    try {
        return fn();
    } catch (const DivergenceError& e) {
        throw DivergenceError(e.iteration(), tag + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(tag + e.what());
    } catch (const ParseError& e) {
        throw ParseError(tag + e.what());
    } catch (const DegenerateRowError& e) {
        throw DegenerateRowError(e.row(), tag + e.what());
    } catch (const IsolatedNodeError& e) {
        throw IsolatedNodeError(e.node(), tag + e.what());
    } catch (const DataError& e) {
        throw DataError(tag + e.what());
    } catch (const ParameterError& e) {
        throw ParameterError(tag + e.what());
    } catch (const ContractViolation& e) {
        throw ContractViolation(tag + e.what());
    }
}

class StageClock {
public:
    explicit StageClock(std::vector<StageTiming>& sink, std::string stage)
        : sink_(sink), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
    ~StageClock() {
        const auto dt = std::chrono::steady_clock::now() - start_;
        sink_.push_back({stage_, std::chrono::duration<double, std::milli>(dt).count()});
    }
    StageClock(const StageClock&) = delete;
    StageClock& operator=(const StageClock&) = delete;

private:
    std::vector<StageTiming>& sink_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
};

} // namespace detail

/// Neighborhood sizes `floor(n/4)` and `floor(n/2)`, dropping any outside `[1, n-2]`.
inline std::vector<std::size_t> default_neighborhood_sizes(std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t k : {n / 4, n / 2}) {
        if (k >= 1 && n >= 3 && k <= n - 2) {
            out.push_back(k);
        }
    }
    return out;
}

struct RunResult {
    DenseMatrix Z;
    RunManifest manifest;
};

/**
 * One full run. The optimized loss is the coupling loss divided by its
 * attraction mass, which for t-SNE is the textbook KL objective.
 */
inline RunResult run(const RunSpec& spec, const DenseMatrix& x, const TraceSink& trace = {}) {
    detail::in_stage("setup", [&] { validate(spec, x); });
    RunResult out;
    RunManifest& m = out.manifest;
    m.spec = spec;
    m.input = fingerprint(x);
    const std::size_t n = x.rows();

    KernelMatrix kx;
    std::optional<CouplingProblem> prob;
    {
        detail::StageClock clock(m.timings, "affinity");
        detail::in_stage("affinity", [&] {
            const Bandwidths tau = calibrate_bandwidths(pairwise_sq_dists(x), spec.perplexity);
            kx = kernel_matrix(x, KernelKind::Gaussian, tau);
            prob = make_coupling_problem(spec.method, input_affinity(spec.method, kx));
        });
    }

    DenseMatrix z0;
    {
        detail::StageClock clock(m.timings, "init");
        z0 = detail::in_stage("init", [&]() -> DenseMatrix {
            switch (spec.init) {
            case InitKind::Random:
                return random_init(n, spec.q, spec.seed);
            case InitKind::PCA:
                return rescale_init(pca(x, spec.q));
            case InitKind::LE:
                return rescale_init(laplacian_eigenmaps(prob->P, spec.q).embedding);
            case InitKind::CCPCA: {
                CcpcaConfig cfg = spec.ccpca;
                cfg.q = spec.q;
                cfg.seed = spec.seed;
                return rescale_init(ccpca(x, kx, cfg));
            }
            }
            throw ContractViolation("unknown init");
        });
    }

    {
        detail::StageClock clock(m.timings, "fit");
        detail::in_stage("fit", [&] {
            OptimizerConfig cfg = spec.optimizer;
            cfg.exaggeration.enabled = spec.exaggerate.value_or(spec.method == MethodKind::TSNE);
            const CouplingObjective obj{&*prob, 1.0 / input_mass(*prob)};
            m.initial_loss = obj.value(z0, 1.0);
            auto res = minimize(obj, z0, cfg, trace);
            out.Z = std::move(res.Z);
            m.final_loss = res.best_loss;
            m.best_iteration = res.best_iteration;
            m.iterations_run = res.history.size();
            m.stopped_early = res.stopped_early;
        });
    }

    {
        detail::StageClock clock(m.timings, "eval");
        detail::in_stage("eval", [&] {
            for (std::size_t k : default_neighborhood_sizes(n)) {
                m.scores.push_back(kary_agreement(x, out.Z, k));
            }
        });
    }
    return out;
}

inline nlohmann::ordered_json to_json(const RunSpec& s) {
    nlohmann::ordered_json j;
    j["method"] = to_string(s.method);
    j["init"] = to_string(s.init);
    j["perplexity"] = s.perplexity;
    j["dim"] = s.q;
    j["seed"] = s.seed;
    j["exaggerate"] = s.exaggerate ? nlohmann::ordered_json(*s.exaggerate) : nlohmann::ordered_json(nullptr);
    const auto& o = s.optimizer;
    j["optimizer"] = {{"iterations", o.iterations},
                      {"learning_rate", o.learning_rate},
                      {"initial_momentum", o.initial_momentum},
                      {"final_momentum", o.final_momentum},
                      {"momentum_switch", o.momentum_switch},
                      {"min_gain", o.min_gain},
                      {"gain_increase", o.gain_increase},
                      {"gain_decrease", o.gain_decrease},
                      {"exaggeration_factor", o.exaggeration.factor},
                      {"exaggeration_iterations", o.exaggeration.iterations},
                      {"gradient_tolerance", o.gradient_tolerance},
                      {"max_halvings", o.max_halvings}};
    j["ccpca"] = {{"samples", s.ccpca.samples}, {"prior", to_string(s.ccpca.prior)}};
    return j;
}

inline RunSpec run_spec_from_json(const nlohmann::ordered_json& j) {
    try {
        RunSpec s;
        s.method = method_from_string(j.at("method").get<std::string>());
        s.init = init_from_string(j.at("init").get<std::string>());
        s.perplexity = j.at("perplexity").get<double>();
        s.q = j.at("dim").get<std::size_t>();
        s.seed = j.at("seed").get<std::uint64_t>();
        if (!j.at("exaggerate").is_null()) {
            s.exaggerate = j.at("exaggerate").get<bool>();
        }
        const auto& o = j.at("optimizer");
        s.optimizer.iterations = o.at("iterations").get<std::size_t>();
        s.optimizer.learning_rate = o.at("learning_rate").get<double>();
        s.optimizer.initial_momentum = o.at("initial_momentum").get<double>();
        s.optimizer.final_momentum = o.at("final_momentum").get<double>();
        s.optimizer.momentum_switch = o.at("momentum_switch").get<std::size_t>();
        s.optimizer.min_gain = o.at("min_gain").get<double>();
        s.optimizer.gain_increase = o.at("gain_increase").get<double>();
        s.optimizer.gain_decrease = o.at("gain_decrease").get<double>();
        s.optimizer.exaggeration.factor = o.at("exaggeration_factor").get<double>();
        s.optimizer.exaggeration.iterations = o.at("exaggeration_iterations").get<std::size_t>();
        s.optimizer.gradient_tolerance = o.at("gradient_tolerance").get<double>();
        s.optimizer.max_halvings = o.at("max_halvings").get<int>();
        s.ccpca.samples = j.at("ccpca").at("samples").get<std::size_t>();
        s.ccpca.prior = prior_from_string(j.at("ccpca").at("prior").get<std::string>());
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("manifest spec: ") + e.what());
    }
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) {
        s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    }
    return s;
}

inline nlohmann::ordered_json to_json(const RunManifest& m) {
    nlohmann::ordered_json j;
    j["spec"] = to_json(m.spec);
    j["input"] = {{"rows", m.input.rows}, {"cols", m.input.cols}, {"fnv1a64", hex64(m.input.hash)}};
    nlohmann::ordered_json t = nlohmann::ordered_json::object();
    for (const auto& s : m.timings) {
        t[s.stage] = s.milliseconds;
    }
    j["timings_ms"] = t;
    j["initial_loss"] = m.initial_loss;
    j["final_loss"] = m.final_loss;
    j["best_iteration"] = m.best_iteration;
    j["iterations_run"] = m.iterations_run;
    j["stopped_early"] = m.stopped_early;
    nlohmann::ordered_json scores = nlohmann::ordered_json::array();
    for (const auto& s : m.scores) {
        scores.push_back({{"K", s.K}, {"Q", s.Q}, {"R", s.R}});
    }
    j["scores"] = scores;
    nlohmann::ordered_json a = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m.artifacts) {
        a[k] = v;
    }
    j["artifacts"] = a;
    return j;
}

} // namespace gcdr

#endif
