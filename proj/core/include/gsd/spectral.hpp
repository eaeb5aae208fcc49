#pragma once

#include <cstdint>
#include <string>

#include "gsd/graph.hpp"

namespace gsd {

struct EigenPair {
    double value = 0.0;
    Vector vector;
    double residual = 0.0;  // ||L v - lambda v||_2
};

struct ExtremePairs {
    EigenPair second;   // (lambda_2, v_2)
    EigenPair largest;  // (lambda_N, v_N)
    int matvecs = 0;
};

struct EigenConfig {
    double tol = 1e-8;      // residual bound, relative to lambda_N
    int max_iter = 5000;    // Laplacian products across all restarts
    int basis_size = 120;   // Krylov dimension per restart
    std::uint64_t seed = 0x5eed;
};

/// Smallest nonzero and largest Laplacian eigenpairs via restarted Lanczos
/// with full reorthogonalization, working in the complement of the constant
/// vector. Each eigenvector has unit norm and its first entry above 1e-12 in
/// magnitude is positive.
///
/// Throws DisconnectedGraph when lambda_2 <= tol * lambda_N and Convergence
/// when the residual bound is not met within max_iter products.
ExtremePairs extreme_eigenpairs(const Graph& graph, const EigenConfig& config = {});

struct SpectralSummary {
    double lambda2 = 0.0;
    Vector v2;
    double lambdaN = 0.0;
    Vector vN;
    double alpha2_sq = 0.0;
    double alphaN_sq = 0.0;
};

enum class EnergyEstimator {
    Debiased,  // max((v^T y)^2 - sigma^2, floor)
    Raw,       // max((v^T y)^2, floor)
};

struct SpectralEnergies {
    double alpha2_sq = 0.0;
    double alphaN_sq = 0.0;
    double floor = 0.0;
};

/// Plug-in estimates of (v_i^T x)^2 for i in {2, N} from the noisy signal.
/// The floor is 1e-12 ||y||^2 (never below the smallest normal double).
SpectralEnergies spectral_energies(const Vector& y, const Vector& v2, const Vector& vN, double sigma2,
                                   EnergyEstimator estimator = EnergyEstimator::Debiased);

SpectralSummary summarize(const ExtremePairs& pairs, const SpectralEnergies& energies);

std::string spectral_to_json(const SpectralSummary& summary, bool include_vectors = false);

}  // namespace gsd
