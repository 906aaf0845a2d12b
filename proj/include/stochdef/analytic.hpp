#pragma once

#include <cstdint>
#include <vector>

// Closed-form robustness/invariance model for the 1-D binary task
//   y ~ uniform{-1, +1},  x | y ~ N(y, 1),
// defended by the additive pre-processor t(x) = x + theta, theta ~ N(1, sigma^2),
// and classified by F_theta(x) = sgn(x + theta - k) for decision boundary k.
// The undefended classifier is F(x) = sgn(x); the adversary may move x
// anywhere inside [x - epsilon, x + epsilon].

namespace stochdef::analytic {

/// Standard normal helpers.
namespace gaussian {
double pdf(double x);
double cdf(double x);
/// CDF of N(0, variance) at x, i.e. cdf(x / sqrt(variance)).
double cdf_scaled(double x, double variance);
double erf(double x);
} // namespace gaussian

struct AnalyticParams {
    double sigma = 1.0;
    double epsilon = 1.0;
    double boundary_k = 1.0;
    int votes_n = 1;

    /// Throws std::invalid_argument on negative sigma/epsilon or an even or
    /// non-positive vote count.
    void validate() const;
};

struct MonteCarloConfig {
    std::int64_t samples = 1'000'000;
    std::uint64_t seed = 0;
    /// Sample budget is split across this many workers, each on its own
    /// derived stream; the result depends on (seed, workers) only.
    int workers = 1;
};

struct MonteCarloEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::int64_t hits = 0;
    std::int64_t trials = 0;
};

double undefended_accuracy();
double undefended_robust_accuracy(double epsilon);
double defended_robust_accuracy(double sigma, double epsilon);
double defended_benign_accuracy(double sigma);
double trained_robust_accuracy(double sigma, double epsilon);
double trained_benign_accuracy(double sigma);

/// R(k) = Pr[F_theta(x) = F(x)] by adaptive Simpson quadrature of the
/// one-dimensional reduction (inner theta-integral in closed form).
/// Uses params.sigma and params.boundary_k. With votes_n > 1 this forwards to
/// vote_invariance_rate with a default Monte Carlo budget.
double invariance_rate(const AnalyticParams& params);

/// Quantity proportional to dR/dk at sigma = 1:
///   exp(-k^2/4) erf(1 - k/2) - exp(-(k-2)^2/4) erf(k/2).
/// The exact derivative is this value divided by 4 sqrt(pi).
double invariance_gradient(double boundary_k);

/// Rob(k) at the given budget; the one-argument-budget form uses epsilon = 1.
double boundary_robust_accuracy(double boundary_k, double sigma, double epsilon = 1.0);
double boundary_benign_accuracy(double boundary_k, double sigma);

/// Monte Carlo estimate of Pr[majority vote over votes_n draws of
/// sgn(x + theta_i - k) equals sgn(x)], counting only samples with
/// |x| > min_abs_x.
MonteCarloEstimate vote_invariance_rate(const AnalyticParams& params, const MonteCarloConfig& mc,
                                        double min_abs_x = 0.0);

/// Variance-reduction surrogate for majority vote: sigma / sqrt(votes_n).
double effective_sigma_under_vote(double sigma, int votes_n);

/// Simulated robust accuracy of the vote classifier at boundary k: the
/// fraction of correctly voted samples whose vote survives the worst-case
/// shift of epsilon toward the boundary (same theta draws).
MonteCarloEstimate simulate_robust_accuracy(const AnalyticParams& params, const MonteCarloConfig& mc);

struct SweepRow {
    double k = 0.0;
    double sigma = 0.0;
    double epsilon = 0.0;
    int n = 1;
    double acc = 0.0;
    double rob = 0.0;
    double invariance = 0.0;
    double rob_mc = 0.0;
    double rob_mc_stderr = 0.0;
};

/// Cartesian sweep. acc and rob use the effective sigma for n > 1;
/// invariance is the quadrature value for n = 1 and the vote Monte Carlo
/// estimate otherwise.
std::vector<SweepRow> sweep(const std::vector<double>& ks, const std::vector<double>& sigmas,
                            const std::vector<double>& epsilons, const std::vector<int>& ns,
                            const MonteCarloConfig& mc);

} // namespace stochdef::analytic
