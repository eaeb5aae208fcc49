#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gsd/denoise.hpp"
#include "gsd/graph.hpp"
#include "gsd/metric_graph.hpp"

namespace gsd {

enum class GraphFamily { TwoCluster, RandomGeometric, CountyGrid };
enum class SignalModel { PiecewiseConstant, LowPass };

GraphFamily parse_graph_family(const std::string& name);
SignalModel parse_signal_model(const std::string& name);
std::string to_string(GraphFamily family);
std::string to_string(SignalModel model);

struct SynthSpec {
    GraphFamily family = GraphFamily::TwoCluster;
    SignalModel signal = SignalModel::PiecewiseConstant;
    Index n = 200;
    double sigma = 1.0;
    std::uint64_t seed = 1;

    int neighbors = 6;          // k of the kNN families
    double level_gap = 5.0;     // piecewise-constant step between regions
    double decay = 0.1;         // low-pass energy decay per graph frequency
    double signal_rms = 1.0;    // low-pass root-mean-square amplitude
};

struct SynthInstance {
    Graph graph;
    FeatureTable features;
    Vector truth;   // noiseless signal x^o
    Vector noisy;   // y = x^o + n
    std::vector<int> region;  // piecewise-constant region label per node
};

/// Deterministic for a fixed spec. Draw order: node positions, family
/// specific draws (bridges, jitter), signal draws, then one normal per node
/// for the noise.
SynthInstance generate(const SynthSpec& spec);

struct Metrics {
    double mse = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
    std::optional<double> r2;  // undefined for constant truth
};

Metrics evaluate(const Vector& truth, const Vector& estimate);

struct TrialRow {
    std::uint64_t seed = 0;
    double sigma2_true = 0.0;
    double sigma2_hat = 0.0;
    double mu_star = 0.0;
    double mse_noisy = 0.0;
    Metrics denoised;
};

struct BenchSummary {
    std::size_t trials = 0;
    double mean_sigma2_hat = 0.0;
    double mean_mu_star = 0.0;
    double mean_mse_noisy = 0.0;
    double mean_mse = 0.0;
    double mean_rmse = 0.0;
    double mean_mae = 0.0;
    double improved_fraction = 0.0;  // share of trials with denoised MSE < noisy MSE
};

struct BenchConfig {
    SynthSpec spec;
    std::size_t trials = 1;
    std::size_t threads = 1;
    PipelineConfig pipeline;
};

/// Trial t uses seed spec.seed + t. Rows come back in trial order whatever
/// the thread count; the first failing trial (by index) is rethrown.
std::vector<TrialRow> run_bench(const BenchConfig& config);
BenchSummary summarize_bench(const std::vector<TrialRow>& rows);

void write_trials_csv(std::ostream& out, const std::vector<TrialRow>& rows);
std::string bench_summary_json(const BenchSummary& summary, const BenchConfig& config);

}  // namespace gsd
