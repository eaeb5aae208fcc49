#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gsd/error.hpp"
#include "gsd/graph.hpp"

namespace gsd {

using Matrix = Eigen::MatrixXd;

/// N x K table of per-node features, row i belongs to node i.
class FeatureTable {
public:
    explicit FeatureTable(Matrix values);

    Index node_count() const noexcept { return static_cast<Index>(values_.rows()); }
    Index dimension() const noexcept { return static_cast<Index>(values_.cols()); }
    const Matrix& values() const noexcept { return values_; }
    Eigen::VectorXd row(Index i) const { return values_.row(static_cast<Eigen::Index>(i)).transpose(); }

    /// Per-column z-score; constant columns are centred only.
    FeatureTable zscored() const;

private:
    Matrix values_;
};

/// Symmetric PSD K x K metric.
class MetricMatrix {
public:
    /// Throws MetricNotPsd if asymmetric beyond 1e-12 or with an eigenvalue
    /// below -1e-10.
    explicit MetricMatrix(Matrix m);

    static MetricMatrix identity(Index k, double scale = 1.0);
    static MetricMatrix diagonal(const Eigen::VectorXd& d);

    Index dimension() const noexcept { return static_cast<Index>(m_.rows()); }
    const Matrix& matrix() const noexcept { return m_; }

private:
    Matrix m_;
};

/// (a - b)^T M (a - b), with round-off negatives down to -1e-10 clamped to 0.
double mahalanobis_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                            const MetricMatrix& m);

/// All pairwise distances d_ij for i < j in row-major (i, j) order.
std::vector<double> pairwise_distances(const FeatureTable& features, const MetricMatrix& m);

/// Median of all pairwise distances; the default edge threshold.
double median_pairwise_distance(const FeatureTable& features, const MetricMatrix& m);

/// Connects every pair with d_ij <= threshold using w_ij = exp(-d_ij).
/// Throws EmptyGraphError (carrying the smallest distance) when no pair
/// qualifies. The result may be disconnected.
Graph build_similarity_graph(const FeatureTable& features, const MetricMatrix& m,
                             double distance_threshold);

struct MetricLearningConfig {
    int max_iterations = 200;
    /// Initial step, as a fraction of the trace budget per unit gradient norm.
    double initial_step = 0.5;
    double relative_tolerance = 1e-10;
    int max_halvings = 40;
};

struct MetricLearningResult {
    MetricMatrix metric;
    MetricMatrix initial_metric;
    double initial_objective = 0.0;
    double objective = 0.0;
    int iterations = 0;
    /// Frozen topology the objective was evaluated on.
    std::vector<std::pair<Index, Index>> pairs;
};

/// Thrown when no trial step ever lowers the objective from a non-stationary
/// start; carries the best iterate seen.
class OptimizerStalledError : public Error {
public:
    OptimizerStalledError(const std::string& what, MetricMatrix best, double objective)
        : Error(ErrorKind::OptimizerStalled, what), best_(std::move(best)), objective_(objective) {}

    const MetricMatrix& best() const noexcept { return best_; }
    double objective() const noexcept { return objective_; }

private:
    MetricMatrix best_;
    double objective_;
};

/// Pairs i < j with d_ij <= threshold under `m`.
std::vector<std::pair<Index, Index>> pairs_within(const FeatureTable& features, const MetricMatrix& m,
                                                  double distance_threshold);

/// Identity scaled so the median pairwise distance equals 1.
MetricMatrix initial_metric(const FeatureTable& features);

/// sum_t x_t^T L(M) x_t over a fixed edge set (pairs i < j).
double metric_objective(const FeatureTable& features, const std::vector<Eigen::VectorXd>& training,
                        const std::vector<std::pair<Index, Index>>& pairs,
                        const Eigen::VectorXd& diagonal);

/// Diagonal metric learning by projected gradient descent.
///
/// The topology is the set of pairs within `distance_threshold` under the
/// initial metric and stays fixed while the weights move. The diagonal is
/// kept nonnegative with a constant trace equal to that of the initial
/// metric; without a budget the objective is driven to zero by inflating M.
MetricLearningResult learn_metric(const FeatureTable& features,
                                  const std::vector<Eigen::VectorXd>& training,
                                  double distance_threshold,
                                  const MetricLearningConfig& config = {});

/// Euclidean projection onto {d >= 0, sum d = budget}.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v, double budget);

/// Feature CSV: header `node_id,f1,...,fK`.
FeatureTable read_feature_csv(std::istream& in);
FeatureTable read_feature_csv(const std::string& path);
void write_feature_csv(std::ostream& out, const FeatureTable& features);

/// JSON `{"dimension": K, "matrix": [row-major K*K values]}`.
std::string metric_to_json(const MetricMatrix& m);
MetricMatrix metric_from_json(const std::string& text);

}  // namespace gsd
