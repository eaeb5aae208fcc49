#include "gsd/metric_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "gsd/io.hpp"

namespace gsd {

namespace {

constexpr double kPsdTolerance = 1e-10;
constexpr double kSymmetryTolerance = 1e-12;

void check_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw Error(ErrorKind::Domain, std::string(what) + " has non-finite entries");
}

double median_of(std::vector<double> values) {
    if (values.empty()) return 0.0;
    const auto mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    double m = values[mid];
    if (values.size() % 2 == 0) {
        m = 0.5 * (m + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid)));
    }
    return m;
}

}  // namespace

FeatureTable::FeatureTable(Matrix values) : values_(std::move(values)) {
    check_finite(values_, "feature table");
    if (values_.rows() == 0 || values_.cols() == 0) {
        throw Error(ErrorKind::Domain, "feature table must have at least one row and column");
    }
}

FeatureTable FeatureTable::zscored() const {
    Matrix z = values_;
    const auto n = static_cast<double>(z.rows());
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
        const double mean = z.col(c).mean();
        z.col(c).array() -= mean;
        const double sd = std::sqrt(z.col(c).squaredNorm() / n);
        if (sd > 0.0) z.col(c) /= sd;
    }
    return FeatureTable(std::move(z));
}

MetricMatrix::MetricMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) {
        throw DimensionError("metric matrix must be square and nonempty",
                             static_cast<std::size_t>(m_.rows()), static_cast<std::size_t>(m_.cols()));
    }
    check_finite(m_, "metric matrix");
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
        throw Error(ErrorKind::MetricNotPsd, "metric matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -kPsdTolerance * scale) {
        throw Error(ErrorKind::MetricNotPsd, "metric matrix has a negative eigenvalue");
    }
}

MetricMatrix MetricMatrix::identity(Index k, double scale) {
    return MetricMatrix(Matrix::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) * scale);
}

MetricMatrix MetricMatrix::diagonal(const Eigen::VectorXd& d) {
    return MetricMatrix(Matrix(d.asDiagonal()));
}

double mahalanobis_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const MetricMatrix& m) {
    if (a.size() != b.size() || static_cast<Index>(a.size()) != m.dimension()) {
        throw DimensionError("feature dimension mismatch", m.dimension(),
                             static_cast<std::size_t>(a.size() != b.size() ? b.size() : a.size()));
    }
    const Eigen::VectorXd diff = a - b;
    const double d = diff.dot(m.matrix() * diff);
    if (d < 0.0) {
        if (d < -kPsdTolerance) throw Error(ErrorKind::MetricNotPsd, "negative squared distance");
        return 0.0;
    }
    return d;
}

std::vector<double> pairwise_distances(const FeatureTable& features, const MetricMatrix& m) {
    const Index n = features.node_count();
    std::vector<double> out;
    out.reserve(n * (n - 1) / 2);
    for (Index i = 0; i < n; ++i) {
        const Eigen::VectorXd fi = features.row(i);
        for (Index j = i + 1; j < n; ++j) out.push_back(mahalanobis_distance(fi, features.row(j), m));
    }
    return out;
}

double median_pairwise_distance(const FeatureTable& features, const MetricMatrix& m) {
    return median_of(pairwise_distances(features, m));
}

Graph build_similarity_graph(const FeatureTable& features, const MetricMatrix& m,
                             double distance_threshold) {
    const Index n = features.node_count();
    if (n < 2) throw Error(ErrorKind::Domain, "need at least two nodes to build a graph");
    if (!(distance_threshold >= 0.0) || !std::isfinite(distance_threshold)) {
        throw Error(ErrorKind::Domain, "distance threshold must be nonnegative and finite");
    }
    if (features.dimension() != m.dimension()) {
        throw DimensionError("metric dimension does not match features", features.dimension(), m.dimension());
    }
    std::vector<Edge> edges;
    double smallest = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
        const Eigen::VectorXd fi = features.row(i);
        for (Index j = i + 1; j < n; ++j) {
            const double d = mahalanobis_distance(fi, features.row(j), m);
            smallest = std::min(smallest, d);
            if (d <= distance_threshold) edges.push_back({i, j, std::exp(-d)});
        }
    }
    if (edges.empty()) {
        throw EmptyGraphError("no node pair within distance threshold " + format_double(distance_threshold) +
                                  "; smallest distance is " + format_double(smallest),
                              smallest);
    }
    return Graph(n, std::move(edges));
}

std::vector<std::pair<Index, Index>> pairs_within(const FeatureTable& features, const MetricMatrix& m,
                                                  double distance_threshold) {
    std::vector<std::pair<Index, Index>> pairs;
    const Index n = features.node_count();
    const auto dist = pairwise_distances(features, m);
    std::size_t k = 0;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j, ++k) {
            if (dist[k] <= distance_threshold) pairs.emplace_back(i, j);
        }
    }
    return pairs;
}

MetricMatrix initial_metric(const FeatureTable& features) {
    const auto k = features.dimension();
    const double med = median_pairwise_distance(features, MetricMatrix::identity(k));
    return MetricMatrix::identity(k, med > 0.0 ? 1.0 / med : 1.0);
}

namespace {

// Per-pair squared feature differences and summed training variation.
struct PairData {
    std::vector<std::pair<Index, Index>> pairs;
    Matrix diff_sq;               // pairs x K
    Eigen::VectorXd variation;    // sum_t (x_ti - x_tj)^2
};

PairData make_pair_data(const FeatureTable& features, const std::vector<Eigen::VectorXd>& training,
                        const std::vector<std::pair<Index, Index>>& pairs) {
    PairData p;
    p.pairs = pairs;
    const auto rows = static_cast<Eigen::Index>(pairs.size());
    p.diff_sq.resize(rows, static_cast<Eigen::Index>(features.dimension()));
    p.variation = Eigen::VectorXd::Zero(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto [i, j] = pairs[static_cast<std::size_t>(r)];
        p.diff_sq.row(r) = (features.values().row(static_cast<Eigen::Index>(i)) -
                            features.values().row(static_cast<Eigen::Index>(j)))
                               .array()
                               .square()
                               .matrix();
        for (const auto& x : training) {
            const double d = x[static_cast<Eigen::Index>(i)] - x[static_cast<Eigen::Index>(j)];
            p.variation[r] += d * d;
        }
    }
    return p;
}

double objective_of(const PairData& p, const Eigen::VectorXd& diag) {
    const Eigen::VectorXd w = (-(p.diff_sq * diag)).array().exp().matrix();
    return w.dot(p.variation);
}

Eigen::VectorXd gradient_of(const PairData& p, const Eigen::VectorXd& diag) {
    const Eigen::VectorXd w = (-(p.diff_sq * diag)).array().exp().matrix();
    return -(p.diff_sq.transpose() * w.cwiseProduct(p.variation));
}

}  // namespace

double metric_objective(const FeatureTable& features, const std::vector<Eigen::VectorXd>& training,
                        const std::vector<std::pair<Index, Index>>& pairs, const Eigen::VectorXd& diagonal) {
    return objective_of(make_pair_data(features, training, pairs), diagonal);
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v, double budget) {
    std::vector<double> u(v.data(), v.data() + v.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0;
    double tau = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cumulative += u[k];
        const double t = (cumulative - budget) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) tau = t;
    }
    return (v.array() - tau).cwiseMax(0.0).matrix();
}

MetricLearningResult learn_metric(const FeatureTable& features, const std::vector<Eigen::VectorXd>& training,
                                  double distance_threshold, const MetricLearningConfig& config) {
    if (training.empty()) throw Error(ErrorKind::Domain, "metric learning needs at least one training signal");
    for (const auto& x : training) {
        if (static_cast<Index>(x.size()) != features.node_count()) {
            throw DimensionError("training signal length does not match feature rows", features.node_count(),
                                 static_cast<std::size_t>(x.size()));
        }
    }
    if (!(distance_threshold >= 0.0) || !std::isfinite(distance_threshold)) {
        throw Error(ErrorKind::Domain, "distance threshold must be nonnegative and finite");
    }

    const MetricMatrix start = initial_metric(features);
    const auto pairs = pairs_within(features, start, distance_threshold);
    const PairData data = make_pair_data(features, training, pairs);

    Eigen::VectorXd diag = start.matrix().diagonal();
    const double budget = diag.sum();
    double value = objective_of(data, diag);

    MetricLearningResult result{start, start, value, value, 0, pairs};
    bool accepted_any = false;
    double step = 0.0;
    for (int it = 0; it < config.max_iterations; ++it) {
        const Eigen::VectorXd grad = gradient_of(data, diag);
        const double gnorm = grad.norm();
        if (gnorm == 0.0) break;
        if (step == 0.0) step = config.initial_step * budget / gnorm;

        bool improved = false;
        bool converged = false;
        Eigen::VectorXd candidate;
        for (int h = 0; h <= config.max_halvings; ++h) {
            candidate = project_to_simplex(diag - step * grad, budget);
            const double cv = objective_of(data, candidate);
            if (cv < value) {
                const double decrease = value - cv;
                diag = candidate;
                value = cv;
                improved = true;
                result.iterations = it + 1;
                step *= 2.0;
                converged = decrease <= config.relative_tolerance * std::abs(result.initial_objective);
                break;
            }
            step *= 0.5;
        }
        if (improved) {
            accepted_any = true;
            if (converged) break;
            continue;
        }
        // No step helped: either stationary on the simplex or stalled.
        const Eigen::VectorXd probe = project_to_simplex(diag - (config.initial_step * budget / gnorm) * grad, budget);
        const bool stationary = (probe - diag).norm() <= 1e-9 * budget;
        if (!stationary && !accepted_any) {
            throw OptimizerStalledError("metric learning made no progress from its initial metric", start, value);
        }
        break;
    }
    result.metric = MetricMatrix::diagonal(diag);
    result.objective = value;
    return result;
}

FeatureTable read_feature_csv(std::istream& in) {
    const CsvTable table = read_csv(in);
    if (table.header.size() < 2 || table.header[0] != "node_id") {
        throw ParseError("feature CSV header must be `node_id,f1,...,fK`", 1, 1);
    }
    const std::size_t k = table.header.size() - 1;
    const std::size_t n = table.rows.size();
    if (n == 0) throw ParseError("feature CSV has no rows", 2, 1);
    Matrix values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    std::vector<char> seen(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = r + 2;
        if (row.size() != k + 1) throw ParseError("expected " + std::to_string(k + 1) + " columns", line, row.size());
        const double id = parse_double(row[0], line, 1);
        if (id < 1 || id > static_cast<double>(n) || id != std::floor(id)) {
            throw ParseError("node_id must be an integer in [1, " + std::to_string(n) + "]", line, 1);
        }
        const auto node = static_cast<std::size_t>(id) - 1;
        if (seen[node]) throw ParseError("duplicate node_id", line, 1);
        seen[node] = 1;
        for (std::size_t c = 0; c < k; ++c) {
            values(static_cast<Eigen::Index>(node), static_cast<Eigen::Index>(c)) = parse_double(row[c + 1], line, c + 2);
        }
    }
    return FeatureTable(std::move(values));
}

FeatureTable read_feature_csv(const std::string& path) {
    auto in = open_input(path);
    return read_feature_csv(in);
}

void write_feature_csv(std::ostream& out, const FeatureTable& features) {
    out << "node_id";
    for (Index c = 0; c < features.dimension(); ++c) out << ",f" << (c + 1);
    out << '\n';
    for (Index r = 0; r < features.node_count(); ++r) {
        out << (r + 1);
        for (Index c = 0; c < features.dimension(); ++c) {
            out << ',' << format_double(features.values()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        }
        out << '\n';
    }
}

std::string metric_to_json(const MetricMatrix& m) {
    nlohmann::json j;
    j["dimension"] = m.dimension();
    std::vector<double> flat;
    for (Eigen::Index r = 0; r < m.matrix().rows(); ++r) {
        for (Eigen::Index c = 0; c < m.matrix().cols(); ++c) flat.push_back(m.matrix()(r, c));
    }
    j["matrix"] = flat;
    return j.dump(2);
}

MetricMatrix metric_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("metric JSON: ") + e.what(), 1, 1);
    }
    if (!j.contains("dimension") || !j.contains("matrix")) {
        throw ParseError("metric JSON needs `dimension` and `matrix`", 1, 1);
    }
    const auto k = j["dimension"].get<std::size_t>();
    const auto flat = j["matrix"].get<std::vector<double>>();
    if (flat.size() != k * k) throw DimensionError("metric JSON matrix size", k * k, flat.size());
    Matrix m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[r * k + c];
    }
    return MetricMatrix(std::move(m));
}

}  // namespace gsd
