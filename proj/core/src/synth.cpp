#include "gsd/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <thread>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "gsd/error.hpp"
#include "gsd/io.hpp"
#include "gsd/random.hpp"

namespace gsd {

GraphFamily parse_graph_family(const std::string& name) {
    if (name == "two-cluster") return GraphFamily::TwoCluster;
    if (name == "random-geometric") return GraphFamily::RandomGeometric;
    if (name == "county-grid") return GraphFamily::CountyGrid;
    throw Error(ErrorKind::Usage,
                "unknown graph family '" + name + "' (expected two-cluster, random-geometric or county-grid)");
}

SignalModel parse_signal_model(const std::string& name) {
    if (name == "piecewise-constant") return SignalModel::PiecewiseConstant;
    if (name == "low-pass") return SignalModel::LowPass;
    throw Error(ErrorKind::Usage, "unknown signal model '" + name + "' (expected piecewise-constant or low-pass)");
}

std::string to_string(GraphFamily family) {
    switch (family) {
        case GraphFamily::TwoCluster: return "two-cluster";
        case GraphFamily::RandomGeometric: return "random-geometric";
        case GraphFamily::CountyGrid: return "county-grid";
    }
    return "unknown";
}

std::string to_string(SignalModel model) {
    return model == SignalModel::LowPass ? "low-pass" : "piecewise-constant";
}

namespace {

using EdgeMap = std::map<std::pair<Index, Index>, double>;

double squared_distance(const Matrix& pos, Index a, Index b) {
    return (pos.row(static_cast<Eigen::Index>(a)) - pos.row(static_cast<Eigen::Index>(b))).squaredNorm();
}

Index find_root(std::vector<Index>& parent, Index v) {
    while (parent[v] != v) {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    return v;
}

// Symmetric kNN among `members`, then the nearest cross pair between
// components is linked until the member set is connected. Weights are
// exp(-d^2 / (2 h^2)) with h the median kNN distance.
void knn_edges(const Matrix& pos, const std::vector<Index>& members, int k, EdgeMap& edges) {
    std::set<std::pair<Index, Index>> pairs;
    for (Index a : members) {
        std::vector<std::pair<double, Index>> dist;
        for (Index b : members) {
            if (b != a) dist.emplace_back(squared_distance(pos, a, b), b);
        }
        const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), dist.size());
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
        for (std::size_t t = 0; t < take; ++t) pairs.emplace(std::min(a, dist[t].second), std::max(a, dist[t].second));
    }

    std::vector<Index> parent(pos.rows());
    std::iota(parent.begin(), parent.end(), Index{0});
    for (const auto& [a, b] : pairs) parent[find_root(parent, a)] = find_root(parent, b);
    while (true) {
        std::set<Index> roots;
        for (Index a : members) roots.insert(find_root(parent, a));
        if (roots.size() <= 1) break;
        const Index root = *roots.begin();
        double best = std::numeric_limits<double>::infinity();
        std::pair<Index, Index> link{0, 0};
        for (Index a : members) {
            if (find_root(parent, a) != root) continue;
            for (Index b : members) {
                if (find_root(parent, b) == root) continue;
                const double d = squared_distance(pos, a, b);
                if (d < best) {
                    best = d;
                    link = {std::min(a, b), std::max(a, b)};
                }
            }
        }
        pairs.insert(link);
        parent[find_root(parent, link.first)] = find_root(parent, link.second);
    }

    std::vector<double> d;
    d.reserve(pairs.size());
    for (const auto& [a, b] : pairs) d.push_back(std::sqrt(squared_distance(pos, a, b)));
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
    const double h = std::max(d[d.size() / 2], 1e-12);
    for (const auto& [a, b] : pairs) edges[{a, b}] = std::exp(-squared_distance(pos, a, b) / (2.0 * h * h));
}

Graph to_graph(Index n, const EdgeMap& edges) {
    std::vector<Edge> list;
    list.reserve(edges.size());
    for (const auto& [key, w] : edges) list.push_back({key.first, key.second, w});
    return Graph(n, std::move(list));
}

struct Layout {
    Matrix features;
    EdgeMap edges;
    std::vector<int> region;
};

Layout two_cluster(const SynthSpec& spec, Rng& rng) {
    const Index n = spec.n;
    Layout out;
    out.features.resize(static_cast<Eigen::Index>(n), 2);
    out.region.resize(n);
    std::vector<Index> members[2];
    for (Index i = 0; i < n; ++i) {
        const int c = i < n / 2 ? 0 : 1;
        out.region[i] = c;
        members[c].push_back(i);
        out.features(static_cast<Eigen::Index>(i), 0) = rng.uniform() + 3.0 * c;
        out.features(static_cast<Eigen::Index>(i), 1) = rng.uniform();
    }
    for (const auto& m : members) knn_edges(out.features, m, spec.neighbors, out.edges);
    double weakest = 1.0;
    for (const auto& [key, w] : out.edges) weakest = std::min(weakest, w);
    const Index bridges = std::max<Index>(1, n / 50);
    for (Index b = 0; b < bridges; ++b) {
        const Index a = members[0][rng.below(members[0].size())];
        const Index c = members[1][rng.below(members[1].size())];
        out.edges[{a, c}] = 0.5 * weakest;
    }
    return out;
}

Layout random_geometric(const SynthSpec& spec, Rng& rng) {
    const Index n = spec.n;
    Layout out;
    out.features.resize(static_cast<Eigen::Index>(n), 2);
    out.region.resize(n);
    std::vector<Index> all(n);
    std::iota(all.begin(), all.end(), Index{0});
    for (Index i = 0; i < n; ++i) {
        out.features(static_cast<Eigen::Index>(i), 0) = rng.uniform();
        out.features(static_cast<Eigen::Index>(i), 1) = rng.uniform();
        out.region[i] = out.features(static_cast<Eigen::Index>(i), 0) < 0.5 ? 0 : 1;
    }
    knn_edges(out.features, all, spec.neighbors, out.edges);
    return out;
}

// Perturbed lattice with 8-neighbour adjacency; features are the jittered
// position plus a smooth "soil" field, weights exp(-d) under a scaled
// identity metric.
Layout county_grid(const SynthSpec& spec, Rng& rng) {
    const Index n = spec.n;
    const auto rows = static_cast<Index>(std::max(1.0, std::round(std::sqrt(static_cast<double>(n)))));
    const Index cols = (n + rows - 1) / rows;
    Layout out;
    out.features.resize(static_cast<Eigen::Index>(n), 3);
    out.region.resize(n);
    for (Index i = 0; i < n; ++i) {
        const double r = static_cast<double>(i / cols);
        const double c = static_cast<double>(i % cols);
        const double x = c + rng.uniform(-0.25, 0.25);
        const double y = r + rng.uniform(-0.25, 0.25);
        out.features(static_cast<Eigen::Index>(i), 0) = x;
        out.features(static_cast<Eigen::Index>(i), 1) = y;
        out.features(static_cast<Eigen::Index>(i), 2) = std::sin(0.3 * x) + std::cos(0.2 * y) + 0.05 * rng.normal();
        out.region[i] = c < static_cast<double>(cols) / 2.0 ? 0 : 1;
    }
    std::vector<std::pair<Index, Index>> pairs;
    for (Index i = 0; i < n; ++i) {
        const Index r = i / cols;
        const Index c = i % cols;
        for (int dr = 0; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc <= 0) continue;
                const auto rr = static_cast<long long>(r) + dr;
                const auto cc = static_cast<long long>(c) + dc;
                if (cc < 0 || cc >= static_cast<long long>(cols)) continue;
                const auto j = static_cast<Index>(rr * static_cast<long long>(cols) + cc);
                if (j < n) pairs.emplace_back(i, j);
            }
        }
    }
    std::vector<double> d;
    for (const auto& [a, b] : pairs) d.push_back(squared_distance(out.features, a, b));
    std::vector<double> sorted = d;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    const double scale = sorted.empty() ? 1.0 : 1.0 / std::max(sorted[sorted.size() / 2], 1e-12);
    const MetricMatrix metric = MetricMatrix::identity(3, scale);
    for (const auto& [a, b] : pairs) {
        out.edges[{a, b}] = std::exp(-mahalanobis_distance(out.features.row(static_cast<Eigen::Index>(a)).transpose(),
                                                           out.features.row(static_cast<Eigen::Index>(b)).transpose(),
                                                           metric));
    }
    return out;
}

// x = V alpha with alpha_1 = 0 and |alpha_i| = exp(-decay (i - 2) / 2) for
// i >= 2 with random signs, rescaled to the requested RMS.
Vector low_pass_signal(const Graph& graph, const SynthSpec& spec, Rng& rng) {
    const auto n = static_cast<Eigen::Index>(graph.node_count());
    Matrix l = Matrix::Zero(n, n);
    for (const auto& e : graph.edges()) {
        const auto i = static_cast<Eigen::Index>(e.i);
        const auto j = static_cast<Eigen::Index>(e.j);
        l(i, i) += e.w;
        l(j, j) += e.w;
        l(i, j) -= e.w;
        l(j, i) -= e.w;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(l);
    Vector alpha = Vector::Zero(n);
    for (Eigen::Index k = 1; k < n; ++k) {
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        alpha[k] = sign * std::exp(-0.5 * spec.decay * static_cast<double>(k - 1));
    }
    Vector x = eig.eigenvectors() * alpha;
    const double rms = std::sqrt(x.squaredNorm() / static_cast<double>(n));
    if (rms > 0.0) x *= spec.signal_rms / rms;
    return x;
}

}  // namespace

SynthInstance generate(const SynthSpec& spec) {
    if (spec.n < 4) throw Error(ErrorKind::Domain, "synthetic graphs need at least 4 nodes");
    if (!(spec.sigma >= 0.0)) throw Error(ErrorKind::Domain, "noise sigma must be nonnegative");
    Rng rng(spec.seed);
    Layout layout;
    switch (spec.family) {
        case GraphFamily::TwoCluster: layout = two_cluster(spec, rng); break;
        case GraphFamily::RandomGeometric: layout = random_geometric(spec, rng); break;
        case GraphFamily::CountyGrid: layout = county_grid(spec, rng); break;
    }
    Graph graph = to_graph(spec.n, layout.edges);

    Vector truth;
    if (spec.signal == SignalModel::PiecewiseConstant) {
        truth.resize(static_cast<Eigen::Index>(spec.n));
        for (Index i = 0; i < spec.n; ++i) truth[static_cast<Eigen::Index>(i)] = spec.level_gap * layout.region[i];
    } else {
        truth = low_pass_signal(graph, spec, rng);
    }
    Vector noisy = truth;
    if (spec.sigma > 0.0) {
        for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy[i] += spec.sigma * rng.normal();
    }
    return SynthInstance{std::move(graph), FeatureTable(std::move(layout.features)), std::move(truth),
                         std::move(noisy), std::move(layout.region)};
}

Metrics evaluate(const Vector& truth, const Vector& estimate) {
    if (truth.size() != estimate.size()) {
        throw DimensionError("truth and estimate lengths differ", static_cast<std::size_t>(truth.size()),
                             static_cast<std::size_t>(estimate.size()));
    }
    if (truth.size() == 0) throw Error(ErrorKind::Domain, "cannot evaluate empty signals");
    const double n = static_cast<double>(truth.size());
    const Vector diff = estimate - truth;
    Metrics m;
    const double sse = diff.squaredNorm();
    m.mse = sse / n;
    m.rmse = std::sqrt(m.mse);
    m.mae = diff.cwiseAbs().sum() / n;
    const double sst = (truth.array() - truth.mean()).square().sum();
    if (sst > 0.0) m.r2 = 1.0 - sse / sst;
    return m;
}

std::vector<TrialRow> run_bench(const BenchConfig& config) {
    std::vector<TrialRow> rows(config.trials);
    std::vector<std::exception_ptr> failures(config.trials);
    auto run_trial = [&](std::size_t t) {
        try {
            SynthSpec spec = config.spec;
            spec.seed = config.spec.seed + t;
            const SynthInstance inst = generate(spec);
            const PipelineResult res = denoise_pipeline(inst.graph, inst.noisy, config.pipeline);
            TrialRow& row = rows[t];
            row.seed = spec.seed;
            row.sigma2_true = spec.sigma * spec.sigma;
            row.sigma2_hat = res.noise.sigma2;
            row.mu_star = res.mu.mu_star;
            row.mse_noisy = evaluate(inst.truth, inst.noisy).mse;
            row.denoised = evaluate(inst.truth, res.denoised.x_star);
        } catch (...) {
            failures[t] = std::current_exception();
        }
    };

    const std::size_t workers = std::min<std::size_t>(std::max<std::size_t>(config.threads, 1), config.trials);
    if (workers <= 1) {
        for (std::size_t t = 0; t < config.trials; ++t) run_trial(t);
    } else {
        // Each trial owns its row slot, so the output order does not depend
        // on scheduling.
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < config.trials; t = next++) run_trial(t);
            });
        }
        for (auto& th : pool) th.join();
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    return rows;
}

BenchSummary summarize_bench(const std::vector<TrialRow>& rows) {
    BenchSummary s;
    s.trials = rows.size();
    if (rows.empty()) return s;
    std::size_t improved = 0;
    for (const auto& r : rows) {
        s.mean_sigma2_hat += r.sigma2_hat;
        s.mean_mu_star += r.mu_star;
        s.mean_mse_noisy += r.mse_noisy;
        s.mean_mse += r.denoised.mse;
        s.mean_rmse += r.denoised.rmse;
        s.mean_mae += r.denoised.mae;
        if (r.denoised.mse < r.mse_noisy) ++improved;
    }
    const double n = static_cast<double>(rows.size());
    s.mean_sigma2_hat /= n;
    s.mean_mu_star /= n;
    s.mean_mse_noisy /= n;
    s.mean_mse /= n;
    s.mean_rmse /= n;
    s.mean_mae /= n;
    s.improved_fraction = static_cast<double>(improved) / n;
    return s;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
    out << "seed,sigma2_true,sigma2_hat,mu_star,mse_noisy,mse,rmse,mae,r2\n";
    for (const auto& r : rows) {
        out << r.seed << ',' << format_double(r.sigma2_true) << ',' << format_double(r.sigma2_hat) << ','
            << format_double(r.mu_star) << ',' << format_double(r.mse_noisy) << ',' << format_double(r.denoised.mse)
            << ',' << format_double(r.denoised.rmse) << ',' << format_double(r.denoised.mae) << ','
            << (r.denoised.r2 ? format_double(*r.denoised.r2) : std::string()) << '\n';
    }
}

std::string bench_summary_json(const BenchSummary& s, const BenchConfig& config) {
    nlohmann::json j;
    j["family"] = to_string(config.spec.family);
    j["signal"] = to_string(config.spec.signal);
    j["n"] = config.spec.n;
    j["sigma"] = config.spec.sigma;
    j["seed"] = config.spec.seed;
    j["trials"] = s.trials;
    j["mean_sigma2_hat"] = s.mean_sigma2_hat;
    j["mean_mu_star"] = s.mean_mu_star;
    j["mean_mse_noisy"] = s.mean_mse_noisy;
    j["mean_mse"] = s.mean_mse;
    j["mean_rmse"] = s.mean_rmse;
    j["mean_mae"] = s.mean_mae;
    j["improved_fraction"] = s.improved_fraction;
    return j.dump(2);
}

}  // namespace gsd
