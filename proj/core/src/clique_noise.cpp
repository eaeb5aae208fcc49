#include "gsd/clique_noise.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "gsd/error.hpp"

namespace gsd {

namespace {

using AdjacencyList = std::vector<std::vector<Index>>;

AdjacencyList thresholded_adjacency(const Graph& graph, double w_hat) {
    AdjacencyList adj(graph.node_count());
    for (Index u = 0; u < graph.node_count(); ++u) {
        const auto nbrs = graph.neighbors(u);
        const auto wts = graph.neighbor_weights(u);
        for (std::size_t k = 0; k < nbrs.size(); ++k) {
            if (wts[k] >= w_hat) adj[u].push_back(nbrs[k]);
        }
    }
    return adj;
}

// Depth-limited BFS from every node; visits are stamped per source to avoid
// clearing the marker array.
Topology hop_closure(const AdjacencyList& adj, int k) {
    const Index n = adj.size();
    Topology out{n, {}};
    std::vector<Index> stamp(n, static_cast<Index>(-1));
    std::vector<Index> frontier;
    std::vector<Index> next;
    std::vector<Index> reached;
    for (Index s = 0; s < n; ++s) {
        stamp[s] = s;
        frontier.assign(1, s);
        reached.clear();
        for (int depth = 0; depth < k && !frontier.empty(); ++depth) {
            next.clear();
            for (Index u : frontier) {
                for (Index v : adj[u]) {
                    if (stamp[v] != s) {
                        stamp[v] = s;
                        next.push_back(v);
                        if (v > s) reached.push_back(v);
                    }
                }
            }
            frontier.swap(next);
        }
        std::sort(reached.begin(), reached.end());
        for (Index t : reached) out.edges.emplace_back(s, t);
    }
    return out;
}

std::vector<double> distinct_weights(const Graph& graph) {
    std::vector<double> ws;
    ws.reserve(graph.edge_count());
    for (const auto& e : graph.edges()) ws.push_back(e.w);
    std::sort(ws.begin(), ws.end());
    ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
    return ws;
}

// Bron-Kerbosch with Tomita pivoting on sorted-vector sets.
class CliqueEnumerator {
public:
    explicit CliqueEnumerator(const AdjacencyList& adj) : adj_(adj) {}

    void run(std::vector<Index>& r, std::vector<Index> p, std::vector<Index> x) {
        if (p.empty()) {
            if (x.empty()) cliques.push_back(r);
            return;
        }
        Index pivot = p.front();
        std::size_t best = 0;
        bool first = true;
        for (const auto* set : {&p, &x}) {
            for (Index u : *set) {
                const std::size_t c = intersection_size(p, adj_[u]);
                if (first || c > best) {
                    best = c;
                    pivot = u;
                    first = false;
                }
            }
        }
        std::vector<Index> candidates;
        std::set_difference(p.begin(), p.end(), adj_[pivot].begin(), adj_[pivot].end(),
                            std::back_inserter(candidates));
        for (Index v : candidates) {
            std::vector<Index> p_next;
            std::vector<Index> x_next;
            std::set_intersection(p.begin(), p.end(), adj_[v].begin(), adj_[v].end(), std::back_inserter(p_next));
            std::set_intersection(x.begin(), x.end(), adj_[v].begin(), adj_[v].end(), std::back_inserter(x_next));
            r.push_back(v);
            run(r, std::move(p_next), std::move(x_next));
            r.pop_back();
            p.erase(std::lower_bound(p.begin(), p.end(), v));
            x.insert(std::lower_bound(x.begin(), x.end(), v), v);
        }
    }

    std::vector<std::vector<Index>> cliques;

private:
    static std::size_t intersection_size(const std::vector<Index>& a, const std::vector<Index>& b) {
        std::size_t count = 0;
        auto ia = a.begin();
        auto ib = b.begin();
        while (ia != a.end() && ib != b.end()) {
            if (*ia < *ib) {
                ++ia;
            } else if (*ib < *ia) {
                ++ib;
            } else {
                ++count;
                ++ia;
                ++ib;
            }
        }
        return count;
    }

    const AdjacencyList& adj_;
};

std::vector<Index> degeneracy_order(const AdjacencyList& adj) {
    const Index n = adj.size();
    std::vector<Index> degree(n);
    Index max_degree = 0;
    for (Index v = 0; v < n; ++v) {
        degree[v] = adj[v].size();
        max_degree = std::max(max_degree, degree[v]);
    }
    std::vector<std::vector<Index>> buckets(max_degree + 1);
    for (Index v = 0; v < n; ++v) buckets[degree[v]].push_back(v);
    std::vector<char> removed(n, 0);
    std::vector<Index> order;
    order.reserve(n);
    Index lowest = 0;
    while (order.size() < n) {
        lowest = std::min(lowest, max_degree);
        while (lowest <= max_degree && buckets[lowest].empty()) ++lowest;
        const Index v = buckets[lowest].back();
        buckets[lowest].pop_back();
        // Stale bucket entries are skipped.
        if (removed[v] || degree[v] != lowest) continue;
        removed[v] = 1;
        order.push_back(v);
        for (Index u : adj[v]) {
            if (!removed[u]) {
                --degree[u];
                buckets[degree[u]].push_back(u);
                if (degree[u] < lowest) lowest = degree[u];
            }
        }
    }
    return order;
}

}  // namespace

Index target_edge_count(const Graph& graph, int target_clique_size) {
    if (target_clique_size < 2) throw Error(ErrorKind::Domain, "target clique size must be at least 2");
    const double n = static_cast<double>(graph.node_count());
    const double mean_degree = 2.0 * static_cast<double>(graph.edge_count()) / n;
    return static_cast<Index>(std::llround(n * (mean_degree + target_clique_size - 1) / 2.0));
}

Topology build_kcg(const Graph& graph, double w_hat, int k) {
    if (k < 1) throw Error(ErrorKind::Domain, "hop count must be at least 1");
    return hop_closure(thresholded_adjacency(graph, w_hat), k);
}

std::optional<ThresholdSearch> search_threshold(const Graph& graph, int k, Index target_edges) {
    if (k < 1) throw Error(ErrorKind::Domain, "hop count must be at least 1");
    const auto ws = distinct_weights(graph);
    if (ws.empty()) {
        if (target_edges == 0) return ThresholdSearch{1.0, Topology{graph.node_count(), {}}};
        return std::nullopt;
    }
    auto feasible = [&](std::size_t idx) { return build_kcg(graph, ws[idx], k).edges.size() >= target_edges; };
    if (!feasible(0)) return std::nullopt;
    std::size_t lo = 0;
    std::size_t hi = ws.size() - 1;
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo + 1) / 2;
        if (feasible(mid)) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    return ThresholdSearch{ws[lo], build_kcg(graph, ws[lo], k)};
}

KcgResult select_kcg(const Graph& graph, Index target_edges, int max_hops) {
    if (max_hops < 1) throw Error(ErrorKind::Domain, "max hops must be at least 1");
    std::optional<KcgResult> best;
    double previous = -1.0;
    for (int k = 1; k <= max_hops; ++k) {
        auto found = search_threshold(graph, k, target_edges);
        if (!found) continue;
        const double c = std::pow(found->w_hat, k);
        if (best && c < previous) break;
        if (!best || c > best->connectivity) {
            best = KcgResult{k, found->w_hat, c, std::move(found->kcg)};
        }
        previous = c;
    }
    if (!best) {
        throw Error(ErrorKind::InfeasibleNoiseGraph,
                    "no k-hop graph up to k = " + std::to_string(max_hops) + " reaches " +
                        std::to_string(target_edges) + " edges");
    }
    return std::move(*best);
}

KcgResult select_kcg(const Graph& graph, int target_clique_size, int max_hops) {
    return select_kcg(graph, target_edge_count(graph, target_clique_size), max_hops);
}

std::vector<std::vector<Index>> maximal_cliques(const Topology& topology, int min_size) {
    AdjacencyList adj(topology.node_count);
    for (const auto& [i, j] : topology.edges) {
        if (i == j || i >= topology.node_count || j >= topology.node_count) {
            throw Error(ErrorKind::InvalidGraph, "topology edge out of range or self-loop");
        }
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    for (auto& list : adj) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }

    const auto order = degeneracy_order(adj);
    std::vector<Index> position(adj.size());
    for (std::size_t k = 0; k < order.size(); ++k) position[order[k]] = k;

    CliqueEnumerator bk(adj);
    std::vector<Index> r;
    for (Index v : order) {
        std::vector<Index> p;
        std::vector<Index> x;
        for (Index u : adj[v]) (position[u] > position[v] ? p : x).push_back(u);
        r.assign(1, v);
        bk.run(r, std::move(p), std::move(x));
    }

    std::vector<std::vector<Index>> out;
    for (auto& c : bk.cliques) {
        if (static_cast<int>(c.size()) < min_size) continue;
        std::sort(c.begin(), c.end());
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end());
    return out;
}

NoiseEstimate noise_from_regions(const Vector& y, std::vector<std::vector<Index>> regions) {
    NoiseEstimate est;
    double weighted = 0.0;
    for (auto& nodes : regions) {
        Region r;
        r.nodes = std::move(nodes);
        if (r.nodes.empty()) continue;
        const double size = static_cast<double>(r.nodes.size());
        // Offsets from the first member, so a constant region gives exactly 0.
        const double origin = y[static_cast<Eigen::Index>(r.nodes.front())];
        double sum = 0.0;
        for (Index i : r.nodes) sum += y[static_cast<Eigen::Index>(i)] - origin;
        const double offset = sum / size;
        r.mean = origin + offset;
        double ss = 0.0;
        for (Index i : r.nodes) {
            const double d = y[static_cast<Eigen::Index>(i)] - origin - offset;
            ss += d * d;
        }
        r.variance = ss / size;
        weighted += size * r.variance;
        est.total_region_mass += r.nodes.size();
        est.regions.push_back(std::move(r));
    }
    if (est.total_region_mass == 0) throw Error(ErrorKind::NoRegion, "no locally constant region found");
    est.sigma2 = weighted / static_cast<double>(est.total_region_mass);
    return est;
}

NoiseEstimate estimate_noise(const Graph& graph, const Vector& y, const NoiseConfig& config) {
    if (static_cast<Index>(y.size()) != graph.node_count()) {
        throw DimensionError("signal length does not match node count", graph.node_count(),
                             static_cast<std::size_t>(y.size()));
    }
    if (graph.edge_count() == 0) throw Error(ErrorKind::Domain, "noise estimation needs a graph with edges");
    if (config.min_region_size < 1) throw Error(ErrorKind::Domain, "minimum region size must be positive");
    const KcgResult kcg = select_kcg(graph, config.target_clique_size, config.max_hops);
    auto cliques = maximal_cliques(kcg.kcg, config.min_region_size);
    if (cliques.empty()) {
        throw Error(ErrorKind::NoRegion, "no maximal clique with at least " + std::to_string(config.min_region_size) +
                                             " nodes in the " + std::to_string(kcg.k) + "-hop graph");
    }
    NoiseEstimate est = noise_from_regions(y, std::move(cliques));
    est.k = kcg.k;
    est.w_hat = kcg.w_hat;
    return est;
}

std::string noise_to_json(const NoiseEstimate& estimate) {
    nlohmann::json j;
    j["sigma2"] = estimate.sigma2;
    j["k"] = estimate.k;
    j["w_hat"] = estimate.w_hat;
    j["total_region_mass"] = estimate.total_region_mass;
    auto regions = nlohmann::json::array();
    for (const auto& r : estimate.regions) {
        std::vector<Index> nodes;
        for (Index i : r.nodes) nodes.push_back(i + 1);
        regions.push_back({{"nodes", nodes}, {"mean", r.mean}, {"variance", r.variance}});
    }
    j["regions"] = std::move(regions);
    return j.dump(2);
}

}  // namespace gsd
