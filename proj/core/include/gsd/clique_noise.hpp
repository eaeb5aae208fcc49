#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gsd/graph.hpp"

namespace gsd {

/// Unit-weight topology: node count plus sorted (i < j) pairs.
struct Topology {
    Index node_count = 0;
    std::vector<std::pair<Index, Index>> edges;
};

struct KcgResult {
    int k = 0;
    double w_hat = 0.0;
    double connectivity = 0.0;  // w_hat^k
    Topology kcg;
};

struct Region {
    std::vector<Index> nodes;  // 0-based, ascending
    double mean = 0.0;
    double variance = 0.0;     // population form, 1/|R|
};

struct NoiseEstimate {
    double sigma2 = 0.0;
    int k = 0;
    double w_hat = 0.0;
    std::vector<Region> regions;
    Index total_region_mass = 0;
};

struct NoiseConfig {
    int target_clique_size = 5;  // n_c
    int min_region_size = 3;     // n_min
    int max_hops = 6;            // k_max
};

/// round(N (d_bar + n_c - 1) / 2), d_bar the unweighted mean degree.
Index target_edge_count(const Graph& graph, int target_clique_size);

/// Drops edges with w < w_hat, then links every pair within k hops of the
/// remaining subgraph.
Topology build_kcg(const Graph& graph, double w_hat, int k);

struct ThresholdSearch {
    double w_hat = 0.0;
    Topology kcg;
};

/// Largest distinct edge weight whose k-hop graph still has at least
/// `target_edges` edges; nullopt when even the smallest weight falls short.
std::optional<ThresholdSearch> search_threshold(const Graph& graph, int k, Index target_edges);

/// Walks k = 1..max_hops and keeps the k-hop graph with the largest
/// w_hat^k, stopping at the first decrease. Throws InfeasibleNoiseGraph when
/// no k reaches the target.
KcgResult select_kcg(const Graph& graph, Index target_edges, int max_hops);
KcgResult select_kcg(const Graph& graph, int target_clique_size, int max_hops);

/// All maximal cliques with at least `min_size` nodes (Bron-Kerbosch with
/// pivoting over a degeneracy ordering), each sorted, the list sorted
/// lexicographically.
std::vector<std::vector<Index>> maximal_cliques(const Topology& topology, int min_size);

/// Region-size-weighted average of per-region population variances.
NoiseEstimate noise_from_regions(const Vector& y, std::vector<std::vector<Index>> regions);

/// Graph clique detection: k-hop graph selection, maximal cliques as locally
/// constant regions, weighted variance average.
NoiseEstimate estimate_noise(const Graph& graph, const Vector& y, const NoiseConfig& config = {});

std::string noise_to_json(const NoiseEstimate& estimate);

}  // namespace gsd
