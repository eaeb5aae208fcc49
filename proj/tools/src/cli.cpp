#include "gsd/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gsd/clique_noise.hpp"
#include "gsd/denoise.hpp"
#include "gsd/error.hpp"
#include "gsd/graph.hpp"
#include "gsd/io.hpp"
#include "gsd/metric_graph.hpp"
#include "gsd/mu_select.hpp"
#include "gsd/spectral.hpp"
#include "gsd/synth.hpp"
#include "gsd/version.hpp"

namespace gsd::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Options shared by every subcommand that runs part of the pipeline.
struct PipelineOptions {
    PipelineConfig config;
    std::string energy = "debiased";
    std::string dc = "exact";
    double sigma2 = 0.0;
    CLI::Option* sigma2_opt = nullptr;
    std::uint64_t seed = EigenConfig{}.seed;
    bool seeds_eigen = false;

    void add_noise(CLI::App* sub) {
        sub->add_option("--n-c", config.noise.target_clique_size, "Target clique size for the edge budget")
            ->capture_default_str()
            ->check(CLI::Range(2, 1 << 20));
        sub->add_option("--n-min", config.noise.min_region_size, "Smallest clique kept as a region")
            ->capture_default_str()
            ->check(CLI::Range(1, 1 << 20));
        sub->add_option("--k-max", config.noise.max_hops, "Largest hop count tried")
            ->capture_default_str()
            ->check(CLI::Range(1, 1 << 20));
    }

    void add_spectral(CLI::App* sub) {
        sub->add_option("--eig-tol", config.eigen.tol, "Eigen residual tolerance relative to lambda_N")
            ->capture_default_str();
        sub->add_option("--eig-max-iter", config.eigen.max_iter, "Laplacian products allowed per eigenpair")
            ->capture_default_str();
        sub->add_option("--seed", seed, "Seed of the eigen solver start vectors")->capture_default_str();
        seeds_eigen = true;
        sub->add_option("--energy", energy, "Spectral energy estimator")
            ->capture_default_str()
            ->check(CLI::IsMember({"debiased", "raw"}));
        sigma2_opt = sub->add_option("--sigma2", sigma2, "Use this noise variance instead of estimating it")
                         ->check(CLI::NonNegativeNumber);
    }

    void add_optimizer(CLI::App* sub) {
        auto& o = config.optimizer;
        sub->add_option("--mu0", o.initial_mu, "Initial mu for gradient descent")->capture_default_str();
        sub->add_option("--mu-min", o.mu_min, "Lower clamp on mu")->capture_default_str();
        sub->add_option("--g-tol", o.gradient_rel_tol, "Gradient tolerance relative to MSE at mu0")
            ->capture_default_str();
        sub->add_option("--s-tol", o.step_tol, "Step tolerance")->capture_default_str();
        sub->add_option("--mu-max-iter", o.max_iterations, "Gradient descent iteration cap")->capture_default_str();
        sub->add_option("--dc", dc, "Constant-vector variance term of the approximate MSE")
            ->capture_default_str()
            ->check(CLI::IsMember({"exact", "fitted"}));
    }

    void add_cg(CLI::App* sub) {
        sub->add_option("--cg-tol", config.cg.tol, "CG residual tolerance relative to ||y||")
            ->capture_default_str();
        sub->add_option("--cg-max-iter", config.cg.max_iter, "CG iteration cap (0 means 10 N)")
            ->capture_default_str();
    }

    PipelineConfig resolve() const {
        PipelineConfig c = config;
        if (seeds_eigen) c.eigen.seed = seed;
        c.energies = energy == "raw" ? EnergyEstimator::Raw : EnergyEstimator::Debiased;
        c.optimizer.dc = dc == "fitted" ? DcTerm::Fitted : DcTerm::Exact;
        if (sigma2_opt != nullptr && sigma2_opt->count() > 0) c.sigma2_override = sigma2;
        return c;
    }
};

struct Context {
    std::ostream& out;
    std::ostream& err;
    std::string out_dir;
    CLI::App* sub = nullptr;
    std::string config_file;
    std::vector<std::string> written;

    std::string path(const std::string& name) const { return (fs::path(out_dir) / name).string(); }

    void write_text(const std::string& name, const std::string& text) {
        auto f = open_output(path(name));
        f << text;
        if (!text.empty() && text.back() != '\n') f << '\n';
        written.push_back(name);
    }

    template <typename Fn>
    void write_with(const std::string& name, Fn&& fn) {
        auto f = open_output(path(name));
        fn(f);
        written.push_back(name);
    }
};

// Effective value of every option of the subcommand, in declaration order.
json option_snapshot(const CLI::App* sub) {
    json j = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
        const std::string& key = opt->get_lnames().front();
        if (opt->count() > 0) {
            const auto& res = opt->results();
            if (opt->get_items_expected_max() > 1) {
                j[key] = res;
            } else {
                j[key] = res.empty() ? std::string("true") : res.back();
            }
        } else {
            const std::string def = opt->get_default_str();
            if (def.empty()) {
                j[key] = nullptr;
            } else {
                j[key] = def;
            }
        }
    }
    return j;
}

void write_manifest(Context& ctx, const std::string& command, std::optional<std::uint64_t> seed) {
    json j;
    j["tool"] = "gsd";
    j["version"] = GSD_VERSION;
    j["command"] = command;
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["config_file"] = ctx.config_file.empty() ? json(nullptr) : json(ctx.config_file);
    j["options"] = option_snapshot(ctx.sub);
    j["outputs"] = ctx.written;
    auto f = open_output(ctx.path("manifest.json"));
    f << j.dump(2) << '\n';
}

std::string fmt(double v) { return format_double(v); }

// (mu, MSE^a) over 201 log-spaced points spanning four decades each side of
// mu*.
void write_mse_curve(std::ostream& f, const ExpFitParams& fit, double sigma2, double mu_star, DcTerm dc) {
    f << "mu,mse_approx\n";
    const double centre = std::log10(std::max(mu_star, 1e-300));
    constexpr int kPoints = 201;
    for (int p = 0; p < kPoints; ++p) {
        const double mu = std::pow(10.0, centre - 4.0 + 8.0 * p / (kPoints - 1));
        f << fmt(mu) << ',' << fmt(mse_approx(mu, fit, sigma2, dc)) << '\n';
    }
}

Graph load_graph(const std::string& path, Index nodes) { return read_graph_csv(path, nodes); }

void print_graph_stats(std::ostream& out, const Graph& g) {
    const DegreeStats d = degree_stats(g);
    out << "nodes " << g.node_count() << '\n'
        << "edges " << g.edge_count() << '\n'
        << "mean_degree " << fmt(d.mean_degree) << '\n'
        << "components " << g.component_count() << '\n';
}

// ----------------------------------------------------------------- commands

struct BuildGraphArgs {
    std::string features;
    std::string metric = "scaled-identity";
    double threshold = 0.0;
    CLI::Option* threshold_opt = nullptr;
    bool zscore = false;
    std::vector<std::string> training;
    MetricLearningConfig learning;
};

int cmd_build_graph(Context& ctx, const BuildGraphArgs& a) {
    FeatureTable features = read_feature_csv(a.features);
    if (a.zscore) features = features.zscored();

    std::optional<MetricMatrix> metric;
    double threshold = 0.0;
    json learn_info = nullptr;
    if (!a.training.empty()) {
        if (a.metric != "scaled-identity") {
            throw Error(ErrorKind::Usage, "--training learns the metric from the scaled identity; drop --metric");
        }
        std::vector<Vector> training;
        for (const auto& p : a.training) training.push_back(read_signal_csv(p).values);
        threshold = a.threshold_opt->count() > 0 ? a.threshold : 1.0;
        const MetricLearningResult learned = learn_metric(features, training, threshold, a.learning);
        metric = learned.metric;
        learn_info = {{"initial_objective", learned.initial_objective},
                      {"objective", learned.objective},
                      {"iterations", learned.iterations}};
        ctx.out << "metric_objective " << fmt(learned.initial_objective) << " -> " << fmt(learned.objective)
                << '\n';
    } else {
        if (a.metric == "scaled-identity") {
            metric = initial_metric(features);
        } else if (a.metric == "identity") {
            metric = MetricMatrix::identity(features.dimension());
        } else {
            auto in = open_input(a.metric);
            std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            metric = metric_from_json(text);
        }
        if (metric->dimension() != features.dimension()) {
            throw DimensionError("metric dimension does not match feature columns", features.dimension(),
                                 metric->dimension());
        }
        threshold = a.threshold_opt->count() > 0 ? a.threshold : median_pairwise_distance(features, *metric);
    }
    if (!(threshold >= 0.0)) throw Error(ErrorKind::Domain, "distance threshold must be nonnegative");

    const Graph g = build_similarity_graph(features, *metric, threshold);
    write_graph_csv(ctx.path("graph.csv"), g);
    ctx.written.push_back("graph.csv");
    ctx.write_text("metric.json", metric_to_json(*metric));
    print_graph_stats(ctx.out, g);
    ctx.out << "threshold " << fmt(threshold) << '\n';
    if (!g.is_connected()) {
        ctx.err << "gsd: warning: graph is disconnected; the denoising pipeline needs a larger --threshold\n";
    }
    return 0;
}

struct SignalArgs {
    std::string graph;
    std::string signal;
    Index nodes = 0;

    void add(CLI::App* sub) {
        sub->add_option("--graph", graph, "Graph CSV (i,j,w; 1-based)")->required();
        sub->add_option("--signal", signal, "Signal CSV (node_id,value)")->required();
        sub->add_option("--nodes", nodes, "Node count N (0 infers it from the graph)")->capture_default_str();
    }
};

int cmd_estimate_noise(Context& ctx, const SignalArgs& s, const PipelineOptions& p) {
    const GraphSignal y = read_signal_csv(s.signal);
    const Graph g = load_graph(s.graph, s.nodes);
    const NoiseEstimate est = [&] {
        try {
            return estimate_noise(g, y.values, p.config.noise);
        } catch (Error& e) {
            e.set_stage("estimate-noise");
            throw;
        }
    }();
    ctx.write_text("noise.json", noise_to_json(est));
    ctx.out << "sigma2 " << fmt(est.sigma2) << '\n'
            << "k " << est.k << '\n'
            << "w_hat " << fmt(est.w_hat) << '\n'
            << "regions " << est.regions.size() << '\n';
    return 0;
}

int cmd_optimize_mu(Context& ctx, const SignalArgs& s, const PipelineOptions& p) {
    const GraphSignal y = read_signal_csv(s.signal);
    const Graph g = load_graph(s.graph, s.nodes);
    const PipelineConfig cfg = p.resolve();
    const PipelineResult r = select_weight(g, y.values, cfg);
    if (!p.config.sigma2_override) ctx.write_text("noise.json", noise_to_json(r.noise));
    ctx.write_text("spectral.json", spectral_to_json(r.spectral));
    ctx.write_text("mu.json", mu_result_to_json(r.mu, r.fit, r.noise.sigma2));
    ctx.write_with("mse_curve.csv",
                   [&](std::ostream& f) { write_mse_curve(f, r.fit, r.noise.sigma2, r.mu.mu_star, cfg.optimizer.dc); });
    ctx.out << "sigma2 " << fmt(r.noise.sigma2) << '\n'
            << "mu_star " << fmt(r.mu.mu_star) << '\n'
            << "converged " << (r.mu.converged ? "true" : "false") << '\n';
    if (!r.mu.converged) {
        ctx.err << "gsd: mu optimizer did not converge; best iterate written\n";
        return exit_code_for(ErrorKind::Convergence);
    }
    return 0;
}

int cmd_denoise(Context& ctx, const SignalArgs& s, const PipelineOptions& p, CLI::Option* mu_opt, double mu) {
    const GraphSignal y = read_signal_csv(s.signal);
    const Graph g = load_graph(s.graph, s.nodes);
    PipelineConfig cfg = p.resolve();
    if (mu_opt->count() > 0) cfg.mu_override = mu;
    const PipelineResult r = denoise_pipeline(g, y.values, cfg);

    write_signal_csv(ctx.path("denoised.csv"), r.denoised.x_star);
    ctx.written.push_back("denoised.csv");
    json audit = json::parse(pipeline_audit_json(r));
    audit["mu_override"] = cfg.mu_override ? json(*cfg.mu_override) : json(nullptr);
    ctx.write_text("audit.json", audit.dump(2));
    if (!cfg.mu_override) {
        ctx.write_with("mse_curve.csv", [&](std::ostream& f) {
            write_mse_curve(f, r.fit, r.noise.sigma2, r.mu.mu_star, cfg.optimizer.dc);
        });
    }
    ctx.out << "mu " << fmt(r.denoised.mu_used) << '\n'
            << "cg_iterations " << r.denoised.cg_iterations << '\n'
            << "cg_residual " << fmt(r.denoised.residual_norm) << '\n';
    if (!cfg.mu_override) ctx.out << "sigma2 " << fmt(r.noise.sigma2) << '\n';
    if (!r.denoised.converged) {
        ctx.err << "gsd: CG did not reach the residual tolerance; best iterate written\n";
        return exit_code_for(ErrorKind::Convergence);
    }
    if (!cfg.mu_override && !r.mu.converged) {
        ctx.err << "gsd: mu optimizer did not converge; result used the best iterate\n";
        return exit_code_for(ErrorKind::Convergence);
    }
    return 0;
}

struct BenchArgs {
    std::string family = "two-cluster";
    std::string signal = "piecewise-constant";
    SynthSpec spec;
    std::size_t trials = 1;
    std::size_t threads = 1;
};

int cmd_bench(Context& ctx, const BenchArgs& b, const PipelineOptions& p) {
    BenchConfig cfg;
    cfg.spec = b.spec;
    cfg.spec.family = parse_graph_family(b.family);
    cfg.spec.signal = parse_signal_model(b.signal);
    cfg.trials = b.trials;
    cfg.threads = b.threads;
    cfg.pipeline = p.resolve();
    const auto rows = run_bench(cfg);
    ctx.write_with("trials.csv", [&](std::ostream& f) { write_trials_csv(f, rows); });
    const BenchSummary summary = summarize_bench(rows);
    ctx.write_text("summary.json", bench_summary_json(summary, cfg));
    ctx.out << "trials " << summary.trials << '\n'
            << "mean_sigma2_hat " << fmt(summary.mean_sigma2_hat) << '\n'
            << "mean_mse_noisy " << fmt(summary.mean_mse_noisy) << '\n'
            << "mean_mse " << fmt(summary.mean_mse) << '\n'
            << "improved_fraction " << fmt(summary.improved_fraction) << '\n';
    return 0;
}

struct InspectArgs {
    std::string graph;
    std::string signal;
    Index nodes = 0;
    bool vectors = false;
};

int cmd_inspect(Context& ctx, const InspectArgs& a, const PipelineOptions& p) {
    const Graph g = load_graph(a.graph, a.nodes);
    const DegreeStats d = degree_stats(g);
    json j;
    j["nodes"] = g.node_count();
    j["edges"] = g.edge_count();
    j["mean_degree"] = d.mean_degree;
    j["max_weighted_degree"] = d.max_weighted_degree;
    j["components"] = g.component_count();
    j["min_weight"] = g.edge_count() ? json(g.min_weight()) : json(nullptr);
    j["max_weight"] = g.edge_count() ? json(g.max_weight()) : json(nullptr);
    const PipelineConfig cfg = p.resolve();
    if (g.is_connected() && g.node_count() >= 2) {
        const ExtremePairs pairs = extreme_eigenpairs(g, cfg.eigen);
        SpectralEnergies energies;
        if (!a.signal.empty()) {
            const GraphSignal y = read_signal_csv(a.signal);
            if (static_cast<Index>(y.values.size()) != g.node_count()) {
                throw DimensionError("signal length does not match node count", g.node_count(),
                                     static_cast<std::size_t>(y.values.size()));
            }
            const double sigma2 =
                cfg.sigma2_override ? *cfg.sigma2_override : estimate_noise(g, y.values, cfg.noise).sigma2;
            energies = spectral_energies(y.values, pairs.second.vector, pairs.largest.vector, sigma2, cfg.energies);
            j["sigma2"] = sigma2;
        }
        j["spectral"] = json::parse(spectral_to_json(summarize(pairs, energies), a.vectors));
    } else {
        j["spectral"] = nullptr;
    }
    const std::string text = j.dump(2);
    ctx.write_text("inspect.json", text);
    ctx.out << text << '\n';
    return 0;
}

void report(std::ostream& err, const Error& e) {
    err << "gsd: " << to_string(e.kind()) << " error";
    if (!e.stage().empty()) err << " in stage '" << e.stage() << "'";
    err << ": " << e.what() << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Unsupervised graph signal denoising", "gsd"};
    app.set_version_flag("--version", GSD_VERSION);
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<CLI::ConfigINI>());
    auto* config_opt = app.set_config("--config", "", "INI file with one [subcommand] section per command");

    std::string out_dir;
    auto add_out = [&](CLI::App* sub) {
        sub->add_option("-o,--out", out_dir,
                        std::string("Output directory (default: $") + kOutputDirEnv + " or " + kDefaultOutputDir +
                            ")");
    };

    BuildGraphArgs bg;
    auto* build = app.add_subcommand("build-graph", "Build a similarity graph from node features");
    build->add_option("--features", bg.features, "Feature CSV (node_id,f1,...,fK)")->required();
    build->add_option("--metric", bg.metric, "scaled-identity, identity, or a metric JSON file")
        ->capture_default_str();
    bg.threshold_opt = build->add_option("--threshold", bg.threshold,
                                         "Distance threshold (default: median pairwise distance)");
    build->add_flag("--zscore", bg.zscore, "Z-score feature columns first");
    build->add_option("--training", bg.training, "Training signal CSVs; enables diagonal metric learning");
    build->add_option("--learn-max-iter", bg.learning.max_iterations, "Metric learning iteration cap")
        ->capture_default_str();
    add_out(build);

    SignalArgs noise_sig;
    PipelineOptions noise_pipe;
    auto* noise = app.add_subcommand("estimate-noise", "Estimate the noise variance by clique detection");
    noise_sig.add(noise);
    noise_pipe.add_noise(noise);
    add_out(noise);

    SignalArgs opt_sig;
    PipelineOptions opt_pipe;
    auto* opt = app.add_subcommand("optimize-mu", "Compute the MSE-optimal regularization weight");
    opt_sig.add(opt);
    opt_pipe.add_noise(opt);
    opt_pipe.add_spectral(opt);
    opt_pipe.add_optimizer(opt);
    add_out(opt);

    SignalArgs den_sig;
    PipelineOptions den_pipe;
    double mu = 0.0;
    auto* den = app.add_subcommand("denoise", "Run the full denoising pipeline");
    den_sig.add(den);
    den_pipe.add_noise(den);
    den_pipe.add_spectral(den);
    den_pipe.add_optimizer(den);
    den_pipe.add_cg(den);
    auto* mu_opt = den->add_option("--mu", mu, "Skip mu selection and use this weight")->check(CLI::NonNegativeNumber);
    add_out(den);

    BenchArgs ba;
    PipelineOptions bench_pipe;
    auto* bench = app.add_subcommand("bench", "Monte-Carlo benchmark on synthetic graphs");
    bench->add_option("--family", ba.family, "two-cluster, random-geometric or county-grid")->capture_default_str();
    bench->add_option("--signal-model", ba.signal, "piecewise-constant or low-pass")->capture_default_str();
    bench->add_option("--nodes", ba.spec.n, "Nodes per instance")->capture_default_str()->check(CLI::Range(4, 1 << 24));
    bench->add_option("--sigma", ba.spec.sigma, "Noise standard deviation")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    bench->add_option("--trials", ba.trials, "Number of trials")->capture_default_str()->check(CLI::PositiveNumber);
    bench->add_option("--threads", ba.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    bench->add_option("--neighbors", ba.spec.neighbors, "k of the kNN families")->capture_default_str();
    bench->add_option("--level-gap", ba.spec.level_gap, "Piecewise-constant level step")->capture_default_str();
    bench->add_option("--decay", ba.spec.decay, "Low-pass spectral energy decay")->capture_default_str();
    bench->add_option("--signal-rms", ba.spec.signal_rms, "Low-pass signal RMS")->capture_default_str();
    bench->add_option("--seed", ba.spec.seed, "Seed of trial 0; trial t uses seed + t")->capture_default_str();
    bench_pipe.add_noise(bench);
    bench_pipe.add_optimizer(bench);
    bench_pipe.add_cg(bench);
    add_out(bench);

    InspectArgs ia;
    PipelineOptions ipipe;
    auto* inspect = app.add_subcommand("inspect", "Summarize a graph and its extreme spectrum");
    inspect->add_option("--graph", ia.graph, "Graph CSV")->required();
    inspect->add_option("--signal", ia.signal, "Optional signal CSV for spectral energies");
    inspect->add_option("--nodes", ia.nodes, "Node count N (0 infers it from the graph)")->capture_default_str();
    inspect->add_flag("--vectors", ia.vectors, "Include eigenvectors in the output");
    ipipe.add_noise(inspect);
    ipipe.add_spectral(inspect);
    add_out(inspect);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    Context ctx{out, err, out_dir, nullptr, {}, {}};
    if (ctx.out_dir.empty()) {
        const char* env = std::getenv(kOutputDirEnv);
        ctx.out_dir = (env != nullptr && *env != '\0') ? env : kDefaultOutputDir;
    }
    if (config_opt->count() > 0) ctx.config_file = config_opt->as<std::string>();

    try {
        int code = 0;
        std::optional<std::uint64_t> seed;
        if (build->parsed()) {
            ctx.sub = build;
            code = cmd_build_graph(ctx, bg);
        } else if (noise->parsed()) {
            ctx.sub = noise;
            code = cmd_estimate_noise(ctx, noise_sig, noise_pipe);
        } else if (opt->parsed()) {
            ctx.sub = opt;
            seed = opt_pipe.seed;
            code = cmd_optimize_mu(ctx, opt_sig, opt_pipe);
        } else if (den->parsed()) {
            ctx.sub = den;
            seed = den_pipe.seed;
            code = cmd_denoise(ctx, den_sig, den_pipe, mu_opt, mu);
        } else if (bench->parsed()) {
            ctx.sub = bench;
            seed = ba.spec.seed;
            code = cmd_bench(ctx, ba, bench_pipe);
        } else {
            ctx.sub = inspect;
            seed = ipipe.seed;
            code = cmd_inspect(ctx, ia, ipipe);
        }
        write_manifest(ctx, ctx.sub->get_name(), seed);
        return code;
    } catch (const Error& e) {
        report(err, e);
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "gsd: error: " << e.what() << '\n';
        return exit_code_for(ErrorKind::Parse);
    }
}

}  // namespace gsd::cli
