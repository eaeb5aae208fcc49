#include "gsd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "gsd/error.hpp"
#include "gsd/io.hpp"

namespace gsd {

namespace {

void check_length(const Graph& graph, const Vector& v, const char* what) {
    if (static_cast<Index>(v.size()) != graph.node_count()) {
        throw DimensionError(std::string(what) + ": vector length does not match node count",
                             graph.node_count(), static_cast<Index>(v.size()));
    }
}

}  // namespace

Graph::Graph(Index node_count, std::vector<Edge> edges)
    : node_count_(node_count), edges_(std::move(edges)) {
    if (node_count_ == 0) {
        throw Error(ErrorKind::InvalidGraph, "graph must have at least one node");
    }
    for (auto& e : edges_) {
        if (e.i == e.j) {
            throw Error(ErrorKind::InvalidGraph,
                        "self-loop at node " + std::to_string(e.i + 1));
        }
        if (e.i >= node_count_ || e.j >= node_count_) {
            throw Error(ErrorKind::InvalidGraph,
                        "edge (" + std::to_string(e.i + 1) + "," + std::to_string(e.j + 1) +
                            ") out of range for " + std::to_string(node_count_) + " nodes");
        }
        if (!(e.w > 0.0) || !std::isfinite(e.w)) {
            throw Error(ErrorKind::InvalidGraph,
                        "edge (" + std::to_string(e.i + 1) + "," + std::to_string(e.j + 1) +
                            ") has nonpositive or non-finite weight");
        }
        if (e.i > e.j) std::swap(e.i, e.j);
    }
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    for (std::size_t k = 1; k < edges_.size(); ++k) {
        if (edges_[k].i == edges_[k - 1].i && edges_[k].j == edges_[k - 1].j) {
            throw Error(ErrorKind::InvalidGraph,
                        "duplicate edge (" + std::to_string(edges_[k].i + 1) + "," +
                            std::to_string(edges_[k].j + 1) + ")");
        }
    }

    std::vector<Index> count(node_count_, 0);
    for (const auto& e : edges_) {
        ++count[e.i];
        ++count[e.j];
    }
    row_ptr_.assign(node_count_ + 1, 0);
    for (Index n = 0; n < node_count_; ++n) row_ptr_[n + 1] = row_ptr_[n] + count[n];
    col_.resize(row_ptr_.back());
    val_.resize(row_ptr_.back());
    std::vector<Index> fill(row_ptr_.begin(), row_ptr_.end() - 1);
    // Lower neighbours first, then upper ones; sorted (i, j) order keeps
    // each row ascending.
    for (const auto& e : edges_) {
        col_[fill[e.j]] = e.i;
        val_[fill[e.j]++] = e.w;
    }
    for (const auto& e : edges_) {
        col_[fill[e.i]] = e.j;
        val_[fill[e.i]++] = e.w;
    }
}

std::span<const Index> Graph::neighbors(Index node) const noexcept {
    return {col_.data() + row_ptr_[node], row_ptr_[node + 1] - row_ptr_[node]};
}

std::span<const double> Graph::neighbor_weights(Index node) const noexcept {
    return {val_.data() + row_ptr_[node], row_ptr_[node + 1] - row_ptr_[node]};
}

double Graph::min_weight() const noexcept {
    double m = 0.0;
    for (std::size_t k = 0; k < edges_.size(); ++k) m = k == 0 ? edges_[k].w : std::min(m, edges_[k].w);
    return m;
}

double Graph::max_weight() const noexcept {
    double m = 0.0;
    for (const auto& e : edges_) m = std::max(m, e.w);
    return m;
}

Index Graph::component_count() const {
    std::vector<char> seen(node_count_, 0);
    std::vector<Index> stack;
    Index components = 0;
    for (Index s = 0; s < node_count_; ++s) {
        if (seen[s]) continue;
        ++components;
        seen[s] = 1;
        stack.push_back(s);
        while (!stack.empty()) {
            const Index u = stack.back();
            stack.pop_back();
            for (Index v : neighbors(u)) {
                if (!seen[v]) {
                    seen[v] = 1;
                    stack.push_back(v);
                }
            }
        }
    }
    return components;
}

void laplacian_matvec(const Graph& graph, const Vector& v, Vector& out) {
    check_length(graph, v, "laplacian_matvec");
    out.setZero(static_cast<Eigen::Index>(graph.node_count()));
    for (const auto& e : graph.edges()) {
        const double d = e.w * (v[static_cast<Eigen::Index>(e.i)] - v[static_cast<Eigen::Index>(e.j)]);
        out[static_cast<Eigen::Index>(e.i)] += d;
        out[static_cast<Eigen::Index>(e.j)] -= d;
    }
}

Vector laplacian_matvec(const Graph& graph, const Vector& v) {
    Vector out;
    laplacian_matvec(graph, v, out);
    return out;
}

double glr(const Graph& graph, const Vector& x) {
    check_length(graph, x, "glr");
    double sum = 0.0;
    for (const auto& e : graph.edges()) {
        const double d = x[static_cast<Eigen::Index>(e.i)] - x[static_cast<Eigen::Index>(e.j)];
        sum += e.w * d * d;
    }
    return sum;
}

DegreeStats degree_stats(const Graph& graph) {
    DegreeStats s;
    const Index n = graph.node_count();
    s.weighted_degree = Vector::Zero(static_cast<Eigen::Index>(n));
    s.edge_degree.assign(n, 0);
    for (const auto& e : graph.edges()) {
        s.weighted_degree[static_cast<Eigen::Index>(e.i)] += e.w;
        s.weighted_degree[static_cast<Eigen::Index>(e.j)] += e.w;
        ++s.edge_degree[e.i];
        ++s.edge_degree[e.j];
    }
    s.mean_degree = 2.0 * static_cast<double>(graph.edge_count()) / static_cast<double>(n);
    s.max_weighted_degree = s.weighted_degree.maxCoeff();
    return s;
}

Graph read_graph_csv(std::istream& in, Index node_count) {
    const CsvTable table = read_csv(in);
    if (table.header != std::vector<std::string>{"i", "j", "w"}) {
        throw ParseError("graph CSV header must be `i,j,w`", 1, 1);
    }
    std::vector<Edge> edges;
    edges.reserve(table.rows.size());
    Index max_index = 0;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = r + 2;
        if (row.size() != 3) throw ParseError("expected 3 columns", line, row.size());
        const double fi = parse_double(row[0], line, 1);
        const double fj = parse_double(row[1], line, 2);
        const double w = parse_double(row[2], line, 3);
        if (fi < 1 || fj < 1 || fi != std::floor(fi) || fj != std::floor(fj)) {
            throw ParseError("node index must be a positive integer", line, fi < 1 ? 1 : 2);
        }
        if (fi == fj) throw ParseError("self-loop", line, 2);
        if (!(w > 0.0)) throw ParseError("nonpositive weight", line, 3);
        const auto i = static_cast<Index>(fi) - 1;
        const auto j = static_cast<Index>(fj) - 1;
        max_index = std::max({max_index, i + 1, j + 1});
        edges.push_back({i, j, w});
    }
    if (node_count == 0) node_count = max_index;
    if (node_count == 0) throw ParseError("graph CSV has no edges and no node count", 2, 1);
    return Graph(node_count, std::move(edges));
}

Graph read_graph_csv(const std::string& path, Index node_count) {
    auto in = open_input(path);
    return read_graph_csv(in, node_count);
}

void write_graph_csv(std::ostream& out, const Graph& graph) {
    out << "i,j,w\n";
    for (const auto& e : graph.edges()) {
        out << (e.i + 1) << ',' << (e.j + 1) << ',' << format_double(e.w) << '\n';
    }
}

void write_graph_csv(const std::string& path, const Graph& graph) {
    auto out = open_output(path);
    write_graph_csv(out, graph);
}

}  // namespace gsd
