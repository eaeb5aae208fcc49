#include "gsd/mu_select.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "gsd/error.hpp"

namespace gsd {

double ExpFitParams::q() const { return std::exp(log_q); }
double ExpFitParams::r() const { return std::exp(log_r); }
double ExpFitParams::f(double i) const { return std::exp(log_q + gamma * i); }
double ExpFitParams::g(double i) const { return std::exp(log_r - theta * i); }

ExpFitParams fit_exponential_models(double lambda2, double lambdaN, double alpha2_sq, double alphaN_sq, Index n) {
    if (n < 3) throw Error(ErrorKind::Domain, "exponential fit needs a spectrum of length at least 3");
    if (!(lambda2 > 0.0) || !(lambdaN > 0.0) || !(alpha2_sq > 0.0) || !(alphaN_sq > 0.0)) {
        throw Error(ErrorKind::Domain, "exponential fit needs positive eigenvalues and energies");
    }
    const double span = static_cast<double>(n) - 2.0;
    ExpFitParams p;
    p.n = n;
    p.gamma = (std::log(lambdaN) - std::log(lambda2)) / span;
    p.log_q = std::log(lambda2) - 2.0 * p.gamma;
    p.theta = (std::log(alpha2_sq) - std::log(alphaN_sq)) / span;
    p.log_r = std::log(alpha2_sq) + 2.0 * p.theta;
    return p;
}

namespace {

void check_mu(double mu) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(ErrorKind::Domain, "mu must be positive and finite");
}

// Shrinkage factors of one frequency: psi = mf / (1 + mf), phi = 1 / (1 + mf).
// Written so that mf = inf gives (1, 0) instead of NaN.
struct Shrink {
    double psi;
    double phi;
};

Shrink shrink(double mf) { return {1.0 / (1.0 + 1.0 / mf), 1.0 / (1.0 + mf)}; }

// d/dmu of g psi^2 + sigma2 phi^2, using f phi^2 = psi phi / mu.
double term_derivative(double mu, double mf, double g, double sigma2) {
    if (mf == 0.0) return 0.0;
    const Shrink s = shrink(mf);
    return 2.0 * (s.psi / mu) * s.phi * (g * s.psi - sigma2 * s.phi);
}

}  // namespace

double mse_approx(double mu, const ExpFitParams& params, double sigma2, DcTerm dc) {
    check_mu(mu);
    double bias = 0.0;
    double variance = 0.0;
    for (Index i = 2; i <= params.n; ++i) {
        const Shrink s = shrink(mu * params.f(static_cast<double>(i)));
        bias += params.g(static_cast<double>(i)) * s.psi * s.psi;
        variance += s.phi * s.phi;
    }
    if (dc == DcTerm::Fitted) {
        const double phi1 = 1.0 / (1.0 + mu * params.f(1.0));
        variance += phi1 * phi1;
    } else {
        variance += 1.0;
    }
    return bias + sigma2 * variance;
}

double mse_approx_gradient(double mu, const ExpFitParams& params, double sigma2) {
    check_mu(mu);
    double grad = 0.0;
    for (Index i = 2; i <= params.n; ++i) {
        const double i_d = static_cast<double>(i);
        grad += term_derivative(mu, mu * params.f(i_d), params.g(i_d), sigma2);
    }
    return grad;
}

double mse_approx_derivative(double mu, const ExpFitParams& params, double sigma2, DcTerm dc) {
    double grad = mse_approx_gradient(mu, params, sigma2);
    if (dc == DcTerm::Fitted) {
        grad += term_derivative(mu, mu * params.f(1.0), 0.0, sigma2);
    }
    return grad;
}

MseParts mse_exact_parts(double mu, const std::vector<double>& eigenvalues, const std::vector<double>& energies,
                         double sigma2) {
    check_mu(mu);
    if (eigenvalues.size() != energies.size()) {
        throw DimensionError("eigenvalue and energy counts differ", eigenvalues.size(), energies.size());
    }
    MseParts parts;
    for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
        const Shrink s = shrink(mu * eigenvalues[k]);
        if (k > 0) parts.bias += s.psi * s.psi * energies[k];
        parts.variance += sigma2 * s.phi * s.phi;
    }
    return parts;
}

double mse_exact(double mu, const std::vector<double>& eigenvalues, const std::vector<double>& energies,
                 double sigma2) {
    return mse_exact_parts(mu, eigenvalues, energies, sigma2).total();
}

double mse_exact_derivative(double mu, const std::vector<double>& eigenvalues, const std::vector<double>& energies,
                            double sigma2) {
    check_mu(mu);
    double grad = 0.0;
    for (std::size_t k = 0; k < eigenvalues.size(); ++k) {
        grad += term_derivative(mu, mu * eigenvalues[k], k > 0 ? energies[k] : 0.0, sigma2);
    }
    return grad;
}

double minimize_mse_exact(const std::vector<double>& eigenvalues, const std::vector<double>& energies,
                          double sigma2, double lo, double hi) {
    if (mse_exact_derivative(lo, eigenvalues, energies, sigma2) >= 0.0) return lo;
    if (mse_exact_derivative(hi, eigenvalues, energies, sigma2) <= 0.0) return hi;
    double a = std::log(lo);
    double b = std::log(hi);
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        const double mid = 0.5 * (a + b);
        if (mse_exact_derivative(std::exp(mid), eigenvalues, energies, sigma2) < 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    return std::exp(0.5 * (a + b));
}

MuResult optimize_mu(const ExpFitParams& params, double sigma2, const MuOptimizerConfig& config) {
    if (!(sigma2 >= 0.0)) throw Error(ErrorKind::Domain, "noise variance must be nonnegative");
    if (!(config.mu_min > 0.0)) throw Error(ErrorKind::Domain, "mu_min must be positive");
    auto value = [&](double mu) { return mse_approx(mu, params, sigma2, config.dc); };
    auto grad = [&](double mu) { return mse_approx_derivative(mu, params, sigma2, config.dc); };

    MuResult out;
    double mu = std::max(config.initial_mu, config.mu_min);
    double f = value(mu);
    double g = grad(mu);
    // The gradient test is taken on max(1, mu) |grad|, which is never looser
    // than |grad| and keeps plateaus at large mu from stopping early.
    const double g_tol = config.gradient_rel_tol * f;
    auto flat = [&](double at, double gradient) { return std::abs(gradient) * std::max(1.0, at) <= g_tol; };
    out.trace.push_back({mu, f, g});

    double step = 0.5 * mu / std::max(std::abs(g), 1e-300);
    for (int it = 0; it < config.max_iterations; ++it) {
        if (flat(mu, g) || (mu <= config.mu_min && g >= 0.0)) {
            out.converged = true;
            break;
        }
        double candidate = std::max(mu - step * g, config.mu_min);
        double fc = value(candidate);
        bool tiny = false;
        while (fc > f - config.armijo * g * (mu - candidate)) {
            step *= config.backtrack;
            candidate = std::max(mu - step * g, config.mu_min);
            if (std::abs(candidate - mu) <= config.step_tol * std::max(1.0, mu)) {
                tiny = true;
                break;
            }
            fc = value(candidate);
        }
        if (tiny) {
            out.converged = true;
            break;
        }

        const double gc = grad(candidate);
        const double dmu = candidate - mu;
        const double dg = gc - g;
        mu = candidate;
        f = fc;
        g = gc;
        out.iterations = it + 1;
        out.trace.push_back({mu, f, g});
        if (std::abs(dmu) <= config.step_tol * std::max(1.0, mu)) {
            out.converged = true;
            break;
        }
        // Secant curvature for the next trial step; fall back to growth.
        step = (dg != 0.0 && dmu / dg > 0.0) ? dmu / dg : 2.0 * step;
    }
    if (!out.converged) out.converged = flat(mu, g) || (mu <= config.mu_min && g >= 0.0);
    out.mu_star = mu;
    out.mse_at_star = f;
    return out;
}

std::string mu_result_to_json(const MuResult& result, const ExpFitParams& params, double sigma2) {
    nlohmann::json j;
    j["mu_star"] = result.mu_star;
    j["mse_at_star"] = result.mse_at_star;
    j["iterations"] = result.iterations;
    j["converged"] = result.converged;
    j["sigma2"] = sigma2;
    j["params"] = {{"q", params.q()}, {"gamma", params.gamma}, {"r", params.r()},
                   {"theta", params.theta}, {"n", params.n}};
    auto trace = nlohmann::json::array();
    for (const auto& e : result.trace) trace.push_back({{"mu", e.mu}, {"mse", e.mse}, {"gradient", e.gradient}});
    j["trace"] = std::move(trace);
    return j.dump(2);
}

}  // namespace gsd
