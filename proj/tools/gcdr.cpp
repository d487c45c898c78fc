// gcdr: graph-coupling dimensionality reduction from the command line.
//
//   gcdr fit data.csv --label digit --method tsne --init ccpca --out-dir run1
//   gcdr init data.csv --method ccpca --samples 100 -o init.csv
//   gcdr eval data.csv run1/embedding.csv --k n/4 --k n/2
//   gcdr plot run1/embedding.csv -o run1/plot.svg
//   gcdr diagnose [data.csv]
//
// Exit codes: 0 success, 2 bad parameters, 3 bad data, 4 numerical failure
// (including failed diagnostics).

#include <gcdr/gcdr.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

enum ExitCode { Ok = 0, ParamFail = 2, DataFail = 3, NumericFail = 4 };

struct InputOptions {
    std::string path;
    std::string delimiter = ",";
    bool no_header = false;
    std::string label;

    gcdr::LabeledDataset load() const {
        if (delimiter.size() != 1) {
            throw gcdr::ParameterError("--delimiter must be a single character");
        }
        gcdr::CsvOptions opt;
        opt.delimiter = delimiter[0];
        opt.header = !no_header;
        if (!label.empty()) {
            opt.label_column = label;
        }
        return gcdr::load_csv(path, opt);
    }
};

void add_input_options(CLI::App* cmd, InputOptions& in) {
    cmd->add_option("input", in.path, "Input CSV (rows are points)")->required();
    cmd->add_option("--delimiter", in.delimiter, "Field separator")->capture_default_str();
    cmd->add_flag("--no-header", in.no_header, "First line is data, not column names");
    cmd->add_option("--label", in.label, "Label column (header name or 0-based index)");
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
    std::ofstream out(path);
    if (!out) {
        throw gcdr::DataError("cannot write '" + path.string() + "'");
    }
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) {
        throw gcdr::DataError("failed writing '" + path.string() + "'");
    }
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw gcdr::DataError("cannot create directory '" + dir.string() + "': " + ec.message());
    }
}

struct FitOptions {
    InputOptions in;
    std::string method = "tsne";
    std::string init = "pca";
    double perplexity = 30;
    std::size_t dim = 2;
    std::size_t iterations = 1000;
    double learning_rate = 200;
    std::uint64_t seed = 0;
    std::size_t repeat = 1;
    std::string out_dir = "gcdr-out";
    std::size_t samples = 100;
    std::string prior = "D";
    std::string exaggerate = "auto";
    bool no_plot = false;
    bool verbose = false;
};

gcdr::RunSpec make_spec(const FitOptions& o, std::uint64_t seed) {
    gcdr::RunSpec spec;
    spec.method = gcdr::method_from_string(o.method);
    spec.init = gcdr::init_from_string(o.init);
    spec.perplexity = o.perplexity;
    spec.q = o.dim;
    spec.optimizer.iterations = o.iterations;
    spec.optimizer.learning_rate = o.learning_rate;
    if (o.exaggerate == "on") {
        spec.exaggerate = true;
    } else if (o.exaggerate == "off") {
        spec.exaggerate = false;
    } else if (o.exaggerate != "auto") {
        throw gcdr::ParameterError("--exaggerate must be auto, on or off");
    }
    spec.ccpca.samples = o.samples;
    spec.ccpca.prior = gcdr::prior_from_string(o.prior);
    spec.seed = seed;
    return spec;
}

gcdr::RunManifest fit_once(const FitOptions& o, const gcdr::LabeledDataset& data, std::uint64_t seed,
                           const fs::path& dir) {
    const gcdr::RunSpec spec = make_spec(o, seed);
    gcdr::TraceSink trace;
    if (o.verbose) {
        trace = [](const gcdr::TraceRecord& r) {
            if (r.iteration % 50 == 0) {
                std::fprintf(stderr, "iter %5zu  loss %.6f  max|grad| %.3e\n", r.iteration, r.loss, r.grad_max);
            }
        };
    }
    auto result = gcdr::run(spec, data.X, trace);
    ensure_dir(dir);
    const fs::path emb = dir / "embedding.csv";
    gcdr::save_embedding(emb.string(), result.Z, data.labels, data.categories);
    result.manifest.artifacts["embedding"] = emb.string();
    if (spec.q == 2 && !o.no_plot) {
        const fs::path svg = dir / "embedding.svg";
        gcdr::render_svg_scatter(svg.string(), result.Z, data.labels, data.categories);
        result.manifest.artifacts["plot"] = svg.string();
    }
    const fs::path manifest = dir / "manifest.json";
    result.manifest.artifacts["manifest"] = manifest.string();
    auto j = gcdr::to_json(result.manifest);
    j["input"]["path"] = o.in.path;
    write_json(manifest, j);
    return result.manifest;
}

int cmd_fit(const FitOptions& o) {
    if (o.repeat == 0) {
        throw gcdr::ParameterError("--repeat must be at least 1");
    }
    make_spec(o, o.seed);
    const auto data = o.in.load();
    const fs::path root(o.out_dir);
    std::vector<gcdr::RunManifest> runs;
    for (std::size_t r = 0; r < o.repeat; ++r) {
        const std::uint64_t seed = o.seed + r;
        const fs::path dir = o.repeat == 1 ? root : root / ("seed-" + std::to_string(seed));
        runs.push_back(fit_once(o, data, seed, dir));
        std::printf("seed %llu  loss %.6f", static_cast<unsigned long long>(seed), runs.back().final_loss);
        for (const auto& s : runs.back().scores) {
            std::printf("  R(%zu) %.4f", s.K, s.R);
        }
        std::printf("\n");
    }
    if (o.repeat > 1) {
        nlohmann::ordered_json summary;
        summary["runs"] = o.repeat;
        summary["seeds"] = {o.seed, o.seed + o.repeat - 1};
        nlohmann::ordered_json scores = nlohmann::ordered_json::array();
        for (std::size_t k = 0; k < runs.front().scores.size(); ++k) {
            double mean = 0;
            for (const auto& m : runs) {
                mean += m.scores[k].R;
            }
            mean /= static_cast<double>(runs.size());
            double var = 0;
            for (const auto& m : runs) {
                var += (m.scores[k].R - mean) * (m.scores[k].R - mean);
            }
            const double sd = runs.size() > 1 ? std::sqrt(var / static_cast<double>(runs.size() - 1)) : 0.0;
            scores.push_back({{"K", runs.front().scores[k].K}, {"R_mean", mean}, {"R_stddev", sd}});
            std::printf("R(%zu) mean %.4f  sd %.4f\n", runs.front().scores[k].K, mean, sd);
        }
        summary["scores"] = scores;
        ensure_dir(root);
        write_json(root / "summary.json", summary);
    }
    return Ok;
}

struct InitOptions {
    InputOptions in;
    std::string method = "pca";
    std::size_t dim = 2;
    double perplexity = 30;
    std::size_t samples = 100;
    std::string prior = "D";
    std::uint64_t seed = 0;
    std::string out = "init.csv";
};

int cmd_init(const InitOptions& o) {
    const auto kind = gcdr::init_from_string(o.method);
    const auto data = o.in.load();
    gcdr::DenseMatrix z;
    if (kind == gcdr::InitKind::PCA) {
        z = gcdr::pca(data.X, o.dim);
    } else if (kind == gcdr::InitKind::Random) {
        throw gcdr::ParameterError("init --method takes pca, le or ccpca");
    } else {
        const auto tau = gcdr::calibrate_bandwidths(gcdr::pairwise_sq_dists(data.X), o.perplexity);
        const auto kx = gcdr::kernel_matrix(data.X, gcdr::KernelKind::Gaussian, tau);
        if (kind == gcdr::InitKind::LE) {
            const auto le = gcdr::laplacian_eigenmaps(gcdr::input_affinity(gcdr::MethodKind::TSNE, kx), o.dim);
            if (le.degenerate) {
                std::fprintf(stderr, "warning: affinity graph has %zu components; between-component placement "
                                     "is arbitrary\n",
                             le.components);
            }
            z = le.embedding;
        } else {
            gcdr::CcpcaConfig cfg;
            cfg.samples = o.samples;
            cfg.prior = gcdr::prior_from_string(o.prior);
            cfg.q = o.dim;
            cfg.seed = o.seed;
            z = gcdr::ccpca(data.X, kx, cfg);
        }
    }
    gcdr::save_embedding(o.out, z, data.labels, data.categories);
    std::printf("wrote %zu x %zu embedding to %s\n", z.rows(), z.cols(), o.out.c_str());
    return Ok;
}

struct EvalOptions {
    InputOptions in;
    std::string embedding;
    std::vector<std::string> ks{"n/4", "n/2"};
    std::string out;
};

int cmd_eval(const EvalOptions& o) {
    const auto data = o.in.load();
    const gcdr::DenseMatrix zx = gcdr::load_embedding(o.embedding).X;
    const std::size_t n = data.X.rows();
    nlohmann::ordered_json scores = nlohmann::ordered_json::array();
    for (const auto& spec : o.ks) {
        const std::size_t k = gcdr::resolve_neighborhood_size(spec, n);
        const auto s = gcdr::kary_agreement(data.X, zx, k);
        std::printf("K %zu  Q %.6f  R %.6f\n", s.K, s.Q, s.R);
        scores.push_back({{"K", s.K}, {"Q", s.Q}, {"R", s.R}});
    }
    if (!o.out.empty()) {
        write_json(o.out, {{"scores", scores}});
    }
    return Ok;
}

struct PlotOptions {
    std::string embedding;
    std::string out = "embedding.svg";
};

int cmd_plot(const PlotOptions& o) {
    const auto z = gcdr::load_embedding(o.embedding);
    gcdr::render_svg_scatter(o.out, z.X, z.labels, z.categories);
    std::printf("wrote %s\n", o.out.c_str());
    return Ok;
}

struct DiagnoseOptions {
    InputOptions in;
    gcdr::DiagnosticOptions diag;
};

int cmd_diagnose(const DiagnoseOptions& o) {
    gcdr::DenseMatrix x;
    if (o.in.path.empty()) {
        x = gcdr::three_clusters(o.diag.seed, 60, 4).X;
        std::printf("using built-in synthetic data (60 x 4, three clusters)\n");
    } else {
        x = o.in.load().X;
    }
    const auto results = gcdr::run_diagnostics(x, o.diag);
    bool ok = true;
    for (const auto& r : results) {
        std::printf("%s  %-34s %s %.3e (tol %.1e)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.metric.c_str(),
                    r.worst, r.tolerance);
        ok = ok && r.passed;
    }
    return ok ? Ok : NumericFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph-coupling dimensionality reduction"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key-value config file; command-line flags take precedence");
    int threads = 1;
    app.add_option("--threads", threads, "Worker threads (results do not depend on this)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    FitOptions fit;
    auto* fit_cmd = app.add_subcommand("fit", "Affinities, initialization, optimization and evaluation");
    add_input_options(fit_cmd, fit.in);
    fit_cmd->add_option("--method", fit.method, "sne, tsne, largevis or umap")->capture_default_str();
    fit_cmd->add_option("--init", fit.init, "random, pca, le or ccpca")->capture_default_str();
    fit_cmd->add_option("--perplexity", fit.perplexity)->capture_default_str();
    fit_cmd->add_option("--dim", fit.dim, "Embedding dimension")->capture_default_str();
    fit_cmd->add_option("--iterations", fit.iterations)->capture_default_str();
    fit_cmd->add_option("--learning-rate", fit.learning_rate)->capture_default_str();
    fit_cmd->add_option("--exaggerate", fit.exaggerate, "Early exaggeration: auto (tsne only), on, off")
        ->capture_default_str();
    fit_cmd->add_option("--seed", fit.seed)->capture_default_str();
    fit_cmd->add_option("--repeat", fit.repeat, "Runs with seeds seed, seed+1, ...")->capture_default_str();
    fit_cmd->add_option("--out-dir", fit.out_dir)->envname("GCDR_OUT_DIR")->capture_default_str();
    fit_cmd->add_option("--samples", fit.samples, "ccPCA Monte-Carlo samples")->capture_default_str();
    fit_cmd->add_option("--prior", fit.prior, "ccPCA graph prior: B, D or E")->capture_default_str();
    fit_cmd->add_flag("--no-plot", fit.no_plot, "Skip the SVG scatter plot");
    fit_cmd->add_flag("-v,--verbose", fit.verbose, "Print optimizer progress");

    InitOptions init;
    auto* init_cmd = app.add_subcommand("init", "Compute an initialization only");
    add_input_options(init_cmd, init.in);
    init_cmd->add_option("--method", init.method, "pca, le or ccpca")->capture_default_str();
    init_cmd->add_option("--dim", init.dim)->capture_default_str();
    init_cmd->add_option("--perplexity", init.perplexity)->capture_default_str();
    init_cmd->add_option("--samples", init.samples)->capture_default_str();
    init_cmd->add_option("--prior", init.prior)->capture_default_str();
    init_cmd->add_option("--seed", init.seed)->capture_default_str();
    init_cmd->add_option("-o,--out", init.out)->capture_default_str();

    EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Neighborhood agreement R(K) of an embedding");
    add_input_options(eval_cmd, eval.in);
    eval_cmd->add_option("embedding", eval.embedding, "Embedding CSV")->required();
    eval_cmd->add_option("--k", eval.ks, "Neighborhood sizes: integers, n/4, or fractions like 0.25")
        ->capture_default_str();
    eval_cmd->add_option("-o,--out", eval.out, "Also write scores as JSON");

    PlotOptions plot;
    auto* plot_cmd = app.add_subcommand("plot", "Render a 2-D embedding CSV as SVG");
    plot_cmd->add_option("embedding", plot.embedding)->required();
    plot_cmd->add_option("-o,--out", plot.out)->capture_default_str();

    DiagnoseOptions diag;
    auto* diag_cmd = app.add_subcommand("diagnose", "Check degeneracy properties on data");
    diag_cmd->add_option("input", diag.in.path, "Input CSV (default: built-in synthetic data)");
    diag_cmd->add_option("--delimiter", diag.in.delimiter)->capture_default_str();
    diag_cmd->add_flag("--no-header", diag.in.no_header);
    diag_cmd->add_option("--label", diag.in.label);
    diag_cmd->add_option("--perplexity", diag.diag.perplexity)->capture_default_str();
    diag_cmd->add_option("--instances", diag.diag.instances, "Sampled graphs for the identity checks")
        ->capture_default_str();
    diag_cmd->add_option("--samples", diag.diag.samples, "Posterior draws per prior")->capture_default_str();
    diag_cmd->add_option("--seed", diag.diag.seed)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ParamFail;
    }

    try {
        gcdr::set_num_threads(threads);
        if (fit_cmd->parsed()) {
            return cmd_fit(fit);
        }
        if (init_cmd->parsed()) {
            return cmd_init(init);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(eval);
        }
        if (plot_cmd->parsed()) {
            return cmd_plot(plot);
        }
        return cmd_diagnose(diag);
    } catch (const gcdr::ParameterError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return ParamFail;
    } catch (const gcdr::ContractViolation& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return ParamFail;
    } catch (const gcdr::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return DataFail;
    } catch (const gcdr::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return NumericFail;
    }
}
