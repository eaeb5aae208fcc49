#pragma once

#include <string>
#include <vector>

#include "gsd/graph.hpp"

namespace gsd {

/// Exponential spectral models through the two computed endpoints:
///   eigenvalues  f(i) = q exp(gamma i),   f(2) = lambda_2,  f(N) = lambda_N
///   energies     g(i) = r exp(-theta i),  g(2) = alpha_2^2, g(N) = alpha_N^2
/// q and r are kept in log form so large gamma * N cannot overflow.
struct ExpFitParams {
    double log_q = 0.0;
    double gamma = 0.0;
    double log_r = 0.0;
    double theta = 0.0;
    Index n = 0;

    double q() const;
    double r() const;
    double f(double i) const;
    double g(double i) const;
};

/// Endpoint interpolation. Throws Domain for any nonpositive input or n < 3.
ExpFitParams fit_exponential_models(double lambda2, double lambdaN, double alpha2_sq, double alphaN_sq,
                                    Index n);

/// How the i = 1 variance term of the approximate MSE is formed.
enum class DcTerm {
    Fitted,  // sigma^2 / (1 + mu f(1))^2, as the approximation is written
    Exact,   // sigma^2, since lambda_1 = 0 gives phi_1 = 1
};

/// sum_{i=2..N} g(i) / (1 + 1/(mu f(i)))^2 + sigma^2 sum_{i=1..N} 1/(1 + mu f(i))^2
double mse_approx(double mu, const ExpFitParams& params, double sigma2, DcTerm dc = DcTerm::Fitted);

/// sum_{i=2..N} (2 mu g f^2 - 2 f sigma^2) / (1 + mu f)^3. This is the exact
/// derivative of mse_approx with DcTerm::Exact; the Fitted form differs by
/// the derivative of its i = 1 term.
double mse_approx_gradient(double mu, const ExpFitParams& params, double sigma2);

/// d/dmu of mse_approx for either DC form.
double mse_approx_derivative(double mu, const ExpFitParams& params, double sigma2, DcTerm dc);

struct MseParts {
    double bias = 0.0;
    double variance = 0.0;
    double total() const { return bias + variance; }
};

/// Bias/variance split of the MAP estimate's MSE given the full spectrum.
/// `eigenvalues` holds lambda_1..lambda_N ascending and `energies`
/// (v_i^T x)^2 for the same indices; the i = 1 energy is ignored.
MseParts mse_exact_parts(double mu, const std::vector<double>& eigenvalues, const std::vector<double>& energies,
                         double sigma2);
double mse_exact(double mu, const std::vector<double>& eigenvalues, const std::vector<double>& energies,
                 double sigma2);
double mse_exact_derivative(double mu, const std::vector<double>& eigenvalues, const std::vector<double>& energies,
                            double sigma2);

/// Root of mse_exact_derivative by bisection in log(mu) over [lo, hi]; the
/// pseudo-convexity of the exact MSE makes the sign change unique.
double minimize_mse_exact(const std::vector<double>& eigenvalues, const std::vector<double>& energies,
                          double sigma2, double lo = 1e-12, double hi = 1e12);

struct MuOptimizerConfig {
    double initial_mu = 1.0;
    double backtrack = 0.5;
    double armijo = 1e-4;
    double gradient_rel_tol = 1e-9;  // times MSE^a(initial_mu)
    double step_tol = 1e-12;
    double mu_min = 1e-9;
    int max_iterations = 10000;
    DcTerm dc = DcTerm::Exact;
};

struct MuTraceEntry {
    double mu = 0.0;
    double mse = 0.0;
    double gradient = 0.0;
};

struct MuResult {
    double mu_star = 0.0;
    double mse_at_star = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<MuTraceEntry> trace;
};

/// Projected gradient descent on mu with a secant trial step and Armijo
/// backtracking. Stops once max(1, mu) |grad| meets the gradient tolerance,
/// on a step below the step tolerance, or at mu_min with a nonnegative
/// gradient; converged is false only when the iteration cap runs out first.
MuResult optimize_mu(const ExpFitParams& params, double sigma2, const MuOptimizerConfig& config = {});

std::string mu_result_to_json(const MuResult& result, const ExpFitParams& params, double sigma2);

}  // namespace gsd
