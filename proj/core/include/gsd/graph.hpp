#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace gsd {

using Index = std::size_t;
using Vector = Eigen::VectorXd;

/// One undirected edge, stored with i < j (0-based).
struct Edge {
    Index i;
    Index j;
    double w;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Sparse undirected positively weighted graph without self-loops.
///
/// Edges are kept sorted by (i, j) with i < j, plus a CSR adjacency for
/// neighbourhood traversal. The object is immutable after construction and
/// can be shared across threads.
class Graph {
public:
    /// Validates and sorts the edge list. Endpoints may be given in either
    /// order; self-loops, nonpositive or non-finite weights, out-of-range
    /// indices and repeated pairs are rejected with ErrorKind::InvalidGraph.
    Graph(Index node_count, std::vector<Edge> edges);

    Index node_count() const noexcept { return node_count_; }
    Index edge_count() const noexcept { return edges_.size(); }
    std::span<const Edge> edges() const noexcept { return edges_; }

    /// Neighbour ids of `node`, ascending, and the matching weights.
    std::span<const Index> neighbors(Index node) const noexcept;
    std::span<const double> neighbor_weights(Index node) const noexcept;

    double min_weight() const noexcept;
    double max_weight() const noexcept;

    /// Number of connected components (isolated nodes count as components).
    Index component_count() const;
    bool is_connected() const { return component_count() == 1; }

private:
    Index node_count_;
    std::vector<Edge> edges_;
    std::vector<Index> row_ptr_;
    std::vector<Index> col_;
    std::vector<double> val_;
};

/// Node-indexed real signal. `units` is carried through I/O untouched.
struct GraphSignal {
    Vector values;
    std::string units;
};

/// y = (D - W) v, accumulated edge by edge in sorted (i, j) order so the
/// result is bit-reproducible.
Vector laplacian_matvec(const Graph& graph, const Vector& v);

/// Writes (D - W) v into `out`, which must already have the right size.
void laplacian_matvec(const Graph& graph, const Vector& v, Vector& out);

/// Graph Laplacian regularizer: sum over edges of w_ij (x_i - x_j)^2.
double glr(const Graph& graph, const Vector& x);

struct DegreeStats {
    Vector weighted_degree;      // D_ii = sum_j W_ij
    std::vector<Index> edge_degree;  // unweighted neighbour count
    double mean_degree = 0.0;    // 2|E| / N, unweighted
    double max_weighted_degree = 0.0;
};

DegreeStats degree_stats(const Graph& graph);

/// Graph CSV: header `i,j,w`, 1-based indices, one row per undirected edge.
/// `node_count` of 0 infers N from the largest index.
Graph read_graph_csv(std::istream& in, Index node_count = 0);
Graph read_graph_csv(const std::string& path, Index node_count = 0);
void write_graph_csv(std::ostream& out, const Graph& graph);
void write_graph_csv(const std::string& path, const Graph& graph);

}  // namespace gsd
