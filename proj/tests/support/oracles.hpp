#pragma once

// Dense and brute-force reference implementations used only by the tests.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gsd/clique_noise.hpp"
#include "gsd/graph.hpp"
#include "gsd/mu_select.hpp"
#include "gsd/random.hpp"

namespace gsd::testing {

inline Eigen::MatrixXd dense_adjacency(const Graph& g) {
    const auto n = static_cast<Eigen::Index>(g.node_count());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (const Edge& e : g.edges()) {
        w(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = e.w;
        w(static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(e.i)) = e.w;
    }
    return w;
}

inline Eigen::MatrixXd dense_laplacian(const Graph& g) {
    const Eigen::MatrixXd w = dense_adjacency(g);
    Eigen::MatrixXd l = -w;
    l.diagonal() = w.rowwise().sum();
    return l;
}

struct DenseSpectrum {
    Eigen::VectorXd values;   // ascending, values[0] forced to the exact 0
    Eigen::MatrixXd vectors;  // columns
};

inline DenseSpectrum dense_spectrum(const Graph& g) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense_laplacian(g));
    DenseSpectrum s{eig.eigenvalues(), eig.eigenvectors()};
    s.values[0] = 0.0;
    return s;
}

/// Random graph on n nodes: a random spanning tree (when `connected`) plus
/// each remaining pair with probability p. Weights uniform on (w_lo, w_hi].
inline Graph random_graph(Rng& rng, Index n, double p, bool connected = true, double w_lo = 0.05,
                          double w_hi = 1.0) {
    std::set<std::pair<Index, Index>> pairs;
    std::vector<Edge> edges;
    auto add = [&](Index a, Index b) {
        if (a == b) return;
        const auto key = std::minmax(a, b);
        if (!pairs.insert({key.first, key.second}).second) return;
        edges.push_back({key.first, key.second, w_hi - (w_hi - w_lo) * rng.uniform()});
    };
    if (connected) {
        for (Index v = 1; v < n; ++v) add(v, rng.below(v));
    }
    for (Index a = 0; a < n; ++a) {
        for (Index b = a + 1; b < n; ++b) {
            if (rng.uniform() < p) add(a, b);
        }
    }
    return Graph(n, std::move(edges));
}

inline Eigen::VectorXd random_vector(Rng& rng, Index n, double scale = 1.0) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = scale * rng.normal();
    return v;
}

inline Topology random_topology(Rng& rng, Index n, double p) {
    Topology t;
    t.node_count = n;
    for (Index a = 0; a < n; ++a) {
        for (Index b = a + 1; b < n; ++b) {
            if (rng.uniform() < p) t.edges.emplace_back(a, b);
        }
    }
    return t;
}

/// Every maximal clique with at least `min_size` nodes, by checking all 2^N
/// node subsets.
inline std::vector<std::vector<Index>> brute_force_cliques(const Topology& t, int min_size) {
    const Index n = t.node_count;
    std::vector<std::uint32_t> adj(n, 0);
    for (const auto& [a, b] : t.edges) {
        adj[a] |= 1u << b;
        adj[b] |= 1u << a;
    }
    std::vector<std::uint32_t> cliques;
    const std::uint32_t limit = n == 0 ? 1u : (1u << n);
    for (std::uint32_t s = 1; s < limit; ++s) {
        bool clique = true;
        for (Index v = 0; v < n && clique; ++v) {
            if ((s >> v) & 1u) clique = (s & ~(1u << v) & ~adj[v]) == 0;
        }
        if (!clique) continue;
        bool maximal = true;
        for (Index v = 0; v < n && maximal; ++v) {
            if (!((s >> v) & 1u) && (s & ~adj[v]) == 0) maximal = false;
        }
        if (maximal && std::popcount(s) >= min_size) cliques.push_back(s);
    }
    std::vector<std::vector<Index>> out;
    for (const std::uint32_t s : cliques) {
        std::vector<Index> nodes;
        for (Index v = 0; v < n; ++v) {
            if ((s >> v) & 1u) nodes.push_back(v);
        }
        out.push_back(std::move(nodes));
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Number of pairs within k hops after dropping edges lighter than w_hat,
/// from powers of the dense adjacency pattern.
inline Index dense_kcg_edge_count(const Graph& g, double w_hat, int k) {
    const auto n = static_cast<Eigen::Index>(g.node_count());
    Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n, n);
    for (const Edge& e : g.edges()) {
        if (e.w >= w_hat) {
            a(static_cast<Eigen::Index>(e.i), static_cast<Eigen::Index>(e.j)) = 1;
            a(static_cast<Eigen::Index>(e.j), static_cast<Eigen::Index>(e.i)) = 1;
        }
    }
    Eigen::MatrixXi reach = Eigen::MatrixXi::Identity(n, n);
    Eigen::MatrixXi step = Eigen::MatrixXi::Identity(n, n) + a;
    for (int h = 0; h < k; ++h) reach = ((reach * step).array() > 0).cast<int>();
    Index count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) count += reach(i, j) > 0 ? 1 : 0;
    }
    return count;
}

/// Largest distinct weight meeting the edge target by scanning every
/// candidate, or a negative value when none does.
inline double scan_threshold(const Graph& g, int k, Index target) {
    std::vector<double> weights;
    for (const Edge& e : g.edges()) weights.push_back(e.w);
    std::sort(weights.begin(), weights.end());
    weights.erase(std::unique(weights.begin(), weights.end()), weights.end());
    double best = -1.0;
    for (const double w : weights) {
        if (dense_kcg_edge_count(g, w, k) >= target) best = w;
    }
    return best;
}

inline double relative_error(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

struct FitInstance {
    ExpFitParams params;
    double sigma2;
};

// Endpoints spanning the ranges seen on real graphs: lambda_N / lambda_2 up
// to 1e3, energies decaying by up to six decades, N from 3 to 502.
inline FitInstance random_fit_instance(Rng& rng) {
    const double l2 = std::pow(10.0, rng.uniform(-3, 0));
    const double ln = l2 * std::pow(10.0, rng.uniform(0.3, 3));
    const double a2 = std::pow(10.0, rng.uniform(-1, 3));
    const double an = a2 * std::pow(10.0, -rng.uniform(0, 6));
    const Index n = 3 + rng.below(500);
    return {fit_exponential_models(l2, ln, a2, an, n), std::pow(10.0, rng.uniform(-2, 1))};
}

// MSE^a re-derived term by term in long double: bias terms g (mu f)^2 /
// (1 + mu f)^2 for i >= 2, variance terms 1 / (1 + mu f)^2.
inline long double mse_approx_long(double mu, const ExpFitParams& p, double sigma2, DcTerm dc = DcTerm::Fitted) {
    const long double q = std::exp(static_cast<long double>(p.log_q));
    const long double r = std::exp(static_cast<long double>(p.log_r));
    long double bias = 0.0L;
    long double variance = 0.0L;
    for (Index i = 1; i <= p.n; ++i) {
        const long double f = q * std::exp(static_cast<long double>(p.gamma) * static_cast<long double>(i));
        const long double mf = static_cast<long double>(mu) * f;
        if (i == 1) {
            variance += dc == DcTerm::Exact ? 1.0L : 1.0L / ((1.0L + mf) * (1.0L + mf));
            continue;
        }
        const long double g = r * std::exp(-static_cast<long double>(p.theta) * static_cast<long double>(i));
        variance += 1.0L / ((1.0L + mf) * (1.0L + mf));
        bias += g * mf * mf / ((1.0L + mf) * (1.0L + mf));
    }
    return bias + static_cast<long double>(sigma2) * variance;
}

// Five-point central difference of the long double MSE^a.
inline double mse_approx_fd(double mu, const ExpFitParams& p, double sigma2, DcTerm dc) {
    const long double h = 1e-3L * mu;
    auto m = [&](long double x) { return mse_approx_long(static_cast<double>(x), p, sigma2, dc); };
    const long double x = mu;
    return static_cast<double>((m(x - 2 * h) - 8 * m(x - h) + 8 * m(x + h) - m(x + 2 * h)) / (12 * h));
}

}  // namespace gsd::testing
