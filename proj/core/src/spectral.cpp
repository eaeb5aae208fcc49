#include "gsd/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "gsd/error.hpp"
#include "gsd/random.hpp"

namespace gsd {

namespace {

enum class Which { Smallest, Largest };

void deflate_constant(Vector& v) { v.array() -= v.mean(); }

void fix_sign(Vector& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (std::abs(v[k]) > 1e-12) {
            if (v[k] < 0.0) v = -v;
            return;
        }
    }
}

Vector random_start(Index n, Rng& rng) {
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = rng.uniform(-1.0, 1.0);
    return v;
}

// One target Ritz pair of L restricted to the complement of 1. Restarts
// from the current Ritz vector until the true residual meets `abs_tol`.
EigenPair lanczos(const Graph& graph, Which which, double abs_tol, const EigenConfig& config,
                  Rng& rng, int& matvecs) {
    const Index n = graph.node_count();
    const auto dim = static_cast<Eigen::Index>(n);
    const Eigen::Index max_basis = std::min<Eigen::Index>(std::max(config.basis_size, 2), dim - 1);

    Vector start = random_start(n, rng);
    EigenPair best;
    best.residual = std::numeric_limits<double>::infinity();
    Vector w(dim);

    while (true) {
        deflate_constant(start);
        double norm = start.norm();
        if (norm == 0.0) {
            start = random_start(n, rng);
            continue;
        }
        Eigen::MatrixXd q(dim, max_basis);
        std::vector<double> alpha;
        std::vector<double> beta;
        q.col(0) = start / norm;
        Eigen::Index m = 0;
        for (Eigen::Index j = 0; j < max_basis; ++j) {
            if (matvecs >= config.max_iter) break;
            laplacian_matvec(graph, q.col(j), w);
            ++matvecs;
            alpha.push_back(q.col(j).dot(w));
            m = j + 1;
            // Two passes of classical Gram-Schmidt against the whole basis.
            for (int pass = 0; pass < 2; ++pass) {
                w -= q.leftCols(m) * (q.leftCols(m).transpose() * w);
                deflate_constant(w);
            }
            const double b = w.norm();
            const double scale = std::max(std::abs(alpha.back()), 1.0);
            if (j + 1 == max_basis || b <= 1e-13 * scale) break;
            beta.push_back(b);
            q.col(j + 1) = w / b;
        }
        if (m == 0) break;

        Vector diag = Eigen::Map<const Vector>(alpha.data(), m);
        Vector sub = beta.empty() ? Vector() : Vector(Eigen::Map<const Vector>(beta.data(), m - 1));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
        if (m == 1) {
            tri.compute(Eigen::MatrixXd::Constant(1, 1, diag[0]));
        } else {
            tri.computeFromTridiagonal(diag, sub);
        }
        const Eigen::Index pick = which == Which::Smallest ? 0 : m - 1;
        Vector ritz = q.leftCols(m) * tri.eigenvectors().col(pick);
        deflate_constant(ritz);
        ritz.normalize();

        laplacian_matvec(graph, ritz, w);
        ++matvecs;
        const double rayleigh = ritz.dot(w);
        const double residual = (w - rayleigh * ritz).norm();
        if (residual < best.residual) {
            best.value = rayleigh;
            best.vector = ritz;
            best.residual = residual;
        }
        if (residual <= abs_tol) break;
        if (matvecs >= config.max_iter) break;
        start = ritz;
        // A breakdown means the Krylov space was invariant; mix in a fresh
        // direction so the restart can leave it.
        if (m < max_basis) start += 1e-3 * random_start(n, rng);
    }
    fix_sign(best.vector);
    return best;
}

}  // namespace

ExtremePairs extreme_eigenpairs(const Graph& graph, const EigenConfig& config) {
    const Index n = graph.node_count();
    if (n < 2) throw Error(ErrorKind::Domain, "eigenpairs need at least two nodes");
    if (graph.edge_count() == 0) {
        throw Error(ErrorKind::DisconnectedGraph, "graph has no edges");
    }
    Rng rng(config.seed);
    ExtremePairs out;

    // lambda_N >= max_i D_ii (Rayleigh quotient of a unit basis vector).
    const double lower = degree_stats(graph).max_weighted_degree;
    out.largest = lanczos(graph, Which::Largest, config.tol * lower, config, rng, out.matvecs);
    if (!(out.largest.residual <= config.tol * out.largest.value)) {
        throw ConvergenceError("lambda_N did not converge in " + std::to_string(config.max_iter) + " products",
                               out.largest.residual);
    }
    const double lambda_n = out.largest.value;
    out.second = lanczos(graph, Which::Smallest, config.tol * lambda_n, config, rng, out.matvecs);
    if (out.second.value <= config.tol * lambda_n) {
        throw Error(ErrorKind::DisconnectedGraph,
                    "graph is disconnected (" + std::to_string(graph.component_count()) + " components)");
    }
    if (!(out.second.residual <= config.tol * lambda_n)) {
        throw ConvergenceError("lambda_2 did not converge in " + std::to_string(config.max_iter) + " products",
                               out.second.residual);
    }
    return out;
}

SpectralEnergies spectral_energies(const Vector& y, const Vector& v2, const Vector& vN, double sigma2,
                                   EnergyEstimator estimator) {
    if (v2.size() != y.size() || vN.size() != y.size()) {
        throw DimensionError("eigenvector length does not match signal", static_cast<std::size_t>(y.size()),
                             static_cast<std::size_t>(v2.size() != y.size() ? v2.size() : vN.size()));
    }
    SpectralEnergies e;
    e.floor = std::max(1e-12 * y.squaredNorm(), std::numeric_limits<double>::min());
    const double shift = estimator == EnergyEstimator::Debiased ? sigma2 : 0.0;
    const double p2 = v2.dot(y);
    const double pn = vN.dot(y);
    e.alpha2_sq = std::max(p2 * p2 - shift, e.floor);
    e.alphaN_sq = std::max(pn * pn - shift, e.floor);
    return e;
}

SpectralSummary summarize(const ExtremePairs& pairs, const SpectralEnergies& energies) {
    return SpectralSummary{pairs.second.value, pairs.second.vector, pairs.largest.value,
                           pairs.largest.vector, energies.alpha2_sq, energies.alphaN_sq};
}

std::string spectral_to_json(const SpectralSummary& s, bool include_vectors) {
    nlohmann::json j;
    j["lambda2"] = s.lambda2;
    j["lambdaN"] = s.lambdaN;
    j["alpha2_sq"] = s.alpha2_sq;
    j["alphaN_sq"] = s.alphaN_sq;
    if (include_vectors) {
        j["v2"] = std::vector<double>(s.v2.data(), s.v2.data() + s.v2.size());
        j["vN"] = std::vector<double>(s.vN.data(), s.vN.data() + s.vN.size());
    }
    return j.dump(2);
}

}  // namespace gsd
