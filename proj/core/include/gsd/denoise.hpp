#pragma once

#include <optional>
#include <string>

#include "gsd/clique_noise.hpp"
#include "gsd/graph.hpp"
#include "gsd/mu_select.hpp"
#include "gsd/spectral.hpp"

namespace gsd {

struct CgConfig {
    double tol = 1e-9;  // relative to ||y||
    int max_iter = 0;   // 0 means 10 N
};

struct DenoiseResult {
    Vector x_star;
    double residual_norm = 0.0;  // ||(I + mu L) x - y||_2
    int cg_iterations = 0;
    double mu_used = 0.0;
    bool converged = true;
};

/// Solves (I + mu L) x = y by unpreconditioned conjugate gradient, starting
/// from x = y. On non-convergence the best iterate is returned with
/// converged = false.
DenoiseResult denoise(const Graph& graph, const Vector& y, double mu, const CgConfig& config = {});

struct PipelineConfig {
    NoiseConfig noise;
    EigenConfig eigen;
    EnergyEstimator energies = EnergyEstimator::Debiased;
    MuOptimizerConfig optimizer;
    CgConfig cg;
    std::optional<double> sigma2_override;
    std::optional<double> mu_override;
};

struct PipelineResult {
    NoiseEstimate noise;
    SpectralSummary spectral;
    ExpFitParams fit;
    MuResult mu;
    DenoiseResult denoised;
};

/// Every stage up to and including optimize_mu; `denoised` is left empty.
/// Ignores mu_override.
PipelineResult select_weight(const Graph& graph, const Vector& y, const PipelineConfig& config = {});

/// estimate_noise -> extreme_eigenpairs -> spectral_energies ->
/// fit_exponential_models -> optimize_mu -> denoise. Errors carry the name
/// of the stage that raised them. With mu_override set only the final solve
/// runs.
PipelineResult denoise_pipeline(const Graph& graph, const Vector& y, const PipelineConfig& config = {});

/// Flat audit record of a pipeline run.
std::string pipeline_audit_json(const PipelineResult& result);

}  // namespace gsd
