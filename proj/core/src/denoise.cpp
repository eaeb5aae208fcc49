#include "gsd/denoise.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "gsd/error.hpp"

namespace gsd {

namespace {

// (I + mu L) v
void apply_system(const Graph& graph, double mu, const Vector& v, Vector& out) {
    laplacian_matvec(graph, v, out);
    out *= mu;
    out += v;
}

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (Error& e) {
        if (e.stage().empty()) e.set_stage(stage);
        throw;
    }
}

}  // namespace

DenoiseResult denoise(const Graph& graph, const Vector& y, double mu, const CgConfig& config) {
    const Index n = graph.node_count();
    if (static_cast<Index>(y.size()) != n) {
        throw DimensionError("signal length does not match node count", n, static_cast<std::size_t>(y.size()));
    }
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw Error(ErrorKind::Domain, "mu must be nonnegative and finite");

    DenoiseResult out;
    out.mu_used = mu;
    out.x_star = y;
    if (mu == 0.0) return out;

    const int max_iter = config.max_iter > 0 ? config.max_iter : static_cast<int>(10 * n);
    const double target = config.tol * y.norm();

    Vector ax(y.size());
    apply_system(graph, mu, out.x_star, ax);
    Vector r = y - ax;
    double rr = r.squaredNorm();
    out.residual_norm = std::sqrt(rr);
    if (out.residual_norm <= target) return out;

    Vector x = out.x_star;
    Vector p = r;
    Vector ap(y.size());
    double best = out.residual_norm;
    for (int it = 1; it <= max_iter; ++it) {
        apply_system(graph, mu, p, ap);
        const double pap = p.dot(ap);
        if (!(pap > 0.0)) break;
        const double step = rr / pap;
        x += step * p;
        r -= step * ap;
        const double rr_next = r.squaredNorm();
        out.cg_iterations = it;
        const double res = std::sqrt(rr_next);
        if (res < best) {
            best = res;
            out.x_star = x;
        }
        if (res <= target) break;
        p = r + (rr_next / rr) * p;
        rr = rr_next;
    }
    // Report the true residual of the returned iterate rather than the
    // recursively updated one.
    apply_system(graph, mu, out.x_star, ax);
    out.residual_norm = (y - ax).norm();
    out.converged = best <= target;
    return out;
}

PipelineResult select_weight(const Graph& graph, const Vector& y, const PipelineConfig& config) {
    if (static_cast<Index>(y.size()) != graph.node_count()) {
        throw DimensionError("signal length does not match node count", graph.node_count(),
                             static_cast<std::size_t>(y.size()));
    }
    PipelineResult out;
    run_stage("graph", [&] {
        const Index components = graph.component_count();
        if (components != 1) {
            throw Error(ErrorKind::DisconnectedGraph,
                        "graph has " + std::to_string(components) +
                            " connected components; increase the distance threshold so every node is reachable");
        }
        return 0;
    });

    if (config.sigma2_override) {
        out.noise.sigma2 = *config.sigma2_override;
    } else {
        out.noise = run_stage("estimate-noise", [&] { return estimate_noise(graph, y, config.noise); });
    }
    const double sigma2 = out.noise.sigma2;

    const ExtremePairs pairs = run_stage("eigenpairs", [&] { return extreme_eigenpairs(graph, config.eigen); });
    const SpectralEnergies energies = run_stage("spectral-energies", [&] {
        return spectral_energies(y, pairs.second.vector, pairs.largest.vector, sigma2, config.energies);
    });
    out.spectral = summarize(pairs, energies);
    out.fit = run_stage("fit-models", [&] {
        return fit_exponential_models(out.spectral.lambda2, out.spectral.lambdaN, out.spectral.alpha2_sq,
                                      out.spectral.alphaN_sq, graph.node_count());
    });
    out.mu = run_stage("optimize-mu", [&] { return optimize_mu(out.fit, sigma2, config.optimizer); });
    return out;
}

PipelineResult denoise_pipeline(const Graph& graph, const Vector& y, const PipelineConfig& config) {
    PipelineResult out;
    if (config.mu_override) {
        if (static_cast<Index>(y.size()) != graph.node_count()) {
            throw DimensionError("signal length does not match node count", graph.node_count(),
                                 static_cast<std::size_t>(y.size()));
        }
        out.mu.mu_star = *config.mu_override;
        out.mu.converged = true;
    } else {
        out = select_weight(graph, y, config);
    }
    out.denoised = run_stage("denoise", [&] { return denoise(graph, y, out.mu.mu_star, config.cg); });
    return out;
}

std::string pipeline_audit_json(const PipelineResult& r) {
    nlohmann::json j;
    j["sigma2"] = r.noise.sigma2;
    j["k"] = r.noise.k;
    j["w_hat"] = r.noise.w_hat;
    j["region_count"] = r.noise.regions.size();
    j["lambda2"] = r.spectral.lambda2;
    j["lambdaN"] = r.spectral.lambdaN;
    j["alpha2_sq"] = r.spectral.alpha2_sq;
    j["alphaN_sq"] = r.spectral.alphaN_sq;
    j["q"] = r.fit.n ? r.fit.q() : 0.0;
    j["gamma"] = r.fit.gamma;
    j["r"] = r.fit.n ? r.fit.r() : 0.0;
    j["theta"] = r.fit.theta;
    j["mu_star"] = r.mu.mu_star;
    j["mu_converged"] = r.mu.converged;
    j["mu_iterations"] = r.mu.iterations;
    j["mse_approx_at_star"] = r.mu.mse_at_star;
    j["cg_residual"] = r.denoised.residual_norm;
    j["cg_iterations"] = r.denoised.cg_iterations;
    j["cg_converged"] = r.denoised.converged;
    return j.dump(2);
}

}  // namespace gsd
