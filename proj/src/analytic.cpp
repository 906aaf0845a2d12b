#include "stochdef/analytic.hpp"

#include "stochdef/parallel.hpp"
#include "stochdef/rng.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>

namespace stochdef::analytic {

namespace gaussian {

double pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double cdf(double x) {
    // erfc keeps full relative precision in the lower tail.
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double cdf_scaled(double x, double variance) {
    return cdf(x / std::sqrt(variance));
}

double erf(double x) {
    return std::erf(x);
}

} // namespace gaussian

namespace {

using gaussian::cdf;

double defended_variance(double sigma) {
    return 1.0 + sigma * sigma;
}

void require_nonnegative(double v, const char* name) {
    if (!(v >= 0.0)) {
        throw std::invalid_argument(std::string(name) + " must be non-negative");
    }
}

struct SimpsonResult {
    double value;
    bool converged;
};

SimpsonResult simpson_recurse(const std::function<double(double)>& f, double a, double b, double fa,
                              double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // Below a few ulps of the panel value the difference is roundoff.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right));
    if (std::abs(delta) <= std::max(15.0 * tol, noise)) {
        return {left + right + delta / 15.0, true};
    }
    if (depth <= 0) {
        return {left + right + delta / 15.0, false};
    }
    const auto l = simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
    const auto r = simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    return {l.value + r.value, l.converged && r.converged};
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    constexpr int kMaxDepth = 48;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const auto r = simpson_recurse(f, a, b, fa, fm, fb, whole, tol, kMaxDepth);
    if (!r.converged) {
        throw std::runtime_error("invariance_rate: adaptive Simpson did not converge on [" + std::to_string(a) +
                                 ", " + std::to_string(b) + "] within depth " + std::to_string(kMaxDepth));
    }
    return r.value;
}

// Pr[theta < t] for theta ~ N(1, sigma^2); a step at t = 1 when sigma = 0.
double theta_cdf(double t, double sigma) {
    if (sigma == 0.0) {
        return t > 1.0 ? 1.0 : 0.0;
    }
    return cdf((t - 1.0) / sigma);
}

double theta_sf(double t, double sigma) {
    if (sigma == 0.0) {
        return t < 1.0 ? 1.0 : 0.0;
    }
    return cdf((1.0 - t) / sigma);
}

double mixture_pdf(double x) {
    return 0.5 * (gaussian::pdf(x + 1.0) + gaussian::pdf(x - 1.0));
}

// Splits [lo, hi] at every break point strictly inside it.
double integrate_piecewise(const std::function<double(double)>& f, double lo, double hi,
                           std::vector<double> breaks, double tol) {
    std::sort(breaks.begin(), breaks.end());
    double total = 0.0;
    double a = lo;
    for (double b : breaks) {
        if (b > a && b < hi) {
            total += adaptive_simpson(f, a, b, tol);
            a = b;
        }
    }
    return total + adaptive_simpson(f, a, hi, tol);
}

template <typename Trial>
MonteCarloEstimate run_monte_carlo(const MonteCarloConfig& mc, Trial&& trial) {
    if (mc.samples <= 0) {
        throw std::invalid_argument("Monte Carlo: samples must be positive");
    }
    const int workers = mc.workers <= 0 ? 1 : mc.workers;
    std::vector<std::int64_t> hits(static_cast<std::size_t>(workers), 0);
    std::vector<std::int64_t> trials(static_cast<std::size_t>(workers), 0);
    parallel_for(static_cast<std::size_t>(workers), workers, [&](std::size_t w) {
        const std::int64_t base = mc.samples / workers;
        const std::int64_t count = base + (static_cast<std::int64_t>(w) < mc.samples % workers ? 1 : 0);
        SeededRng rng(mc.seed, w);
        std::int64_t h = 0;
        std::int64_t t = 0;
        for (std::int64_t i = 0; i < count; ++i) {
            trial(rng, h, t);
        }
        hits[w] = h;
        trials[w] = t;
    });
    MonteCarloEstimate est;
    for (int w = 0; w < workers; ++w) {
        est.hits += hits[static_cast<std::size_t>(w)];
        est.trials += trials[static_cast<std::size_t>(w)];
    }
    if (est.trials == 0) {
        throw std::runtime_error("Monte Carlo: no sample met the conditioning event");
    }
    est.estimate = static_cast<double>(est.hits) / static_cast<double>(est.trials);
    est.standard_error = std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(est.trials));
    return est;
}

// Majority vote of sgn(x + theta_i - k) over n draws; n is odd.
int vote_sign(SeededRng& rng, double x, double sigma, double k, int n, std::vector<double>& thetas) {
    thetas.resize(static_cast<std::size_t>(n));
    for (double& t : thetas) {
        t = 1.0 + sigma * rng.normal();
    }
    int positive = 0;
    for (double t : thetas) {
        positive += (x + t - k > 0.0) ? 1 : 0;
    }
    return 2 * positive > n ? 1 : -1;
}

int vote_sign_fixed(double x, double k, const std::vector<double>& thetas) {
    int positive = 0;
    for (double t : thetas) {
        positive += (x + t - k > 0.0) ? 1 : 0;
    }
    return 2 * positive > static_cast<int>(thetas.size()) ? 1 : -1;
}

} // namespace

void AnalyticParams::validate() const {
    require_nonnegative(sigma, "sigma");
    require_nonnegative(epsilon, "epsilon");
    if (votes_n < 1) {
        throw std::invalid_argument("votes_n must be at least 1");
    }
    if (votes_n % 2 == 0) {
        throw std::invalid_argument("votes_n must be odd so sign votes cannot tie");
    }
}

double undefended_accuracy() {
    return cdf(1.0);
}

double undefended_robust_accuracy(double epsilon) {
    require_nonnegative(epsilon, "epsilon");
    return cdf(1.0 - epsilon) / cdf(1.0);
}

double defended_robust_accuracy(double sigma, double epsilon) {
    require_nonnegative(sigma, "sigma");
    require_nonnegative(epsilon, "epsilon");
    const double v = defended_variance(sigma);
    return (gaussian::cdf_scaled(-epsilon, v) + gaussian::cdf_scaled(2.0 - epsilon, v)) /
           (gaussian::cdf_scaled(0.0, v) + gaussian::cdf_scaled(2.0, v));
}

double defended_benign_accuracy(double sigma) {
    require_nonnegative(sigma, "sigma");
    const double v = defended_variance(sigma);
    return 0.5 * (gaussian::cdf_scaled(0.0, v) + gaussian::cdf_scaled(2.0, v));
}

double trained_robust_accuracy(double sigma, double epsilon) {
    require_nonnegative(sigma, "sigma");
    require_nonnegative(epsilon, "epsilon");
    const double v = defended_variance(sigma);
    return gaussian::cdf_scaled(1.0 - epsilon, v) / gaussian::cdf_scaled(1.0, v);
}

double trained_benign_accuracy(double sigma) {
    require_nonnegative(sigma, "sigma");
    return gaussian::cdf_scaled(1.0, defended_variance(sigma));
}

double invariance_rate(const AnalyticParams& params) {
    params.validate();
    if (params.votes_n > 1) {
        return vote_invariance_rate(params, MonteCarloConfig{200'000, 0, 1}).estimate;
    }
    const double k = params.boundary_k;
    const double sigma = params.sigma;
    if (sigma == 0.0) {
        // theta = 1: the classifiers disagree exactly when x lies between 0
        // and k - 1.
        auto mixture_cdf = [](double x) { return 0.5 * (gaussian::cdf(x + 1.0) + gaussian::cdf(x - 1.0)); };
        return 1.0 - std::abs(mixture_cdf(k - 1.0) - mixture_cdf(0.0));
    }
    // Agreement needs theta < k - x when x < 0 and theta > k - x when x > 0.
    // Each side is integrated on its own so no panel straddles the jump at 0.
    auto left = [k, sigma](double x) { return mixture_pdf(x) * theta_cdf(k - x, sigma); };
    auto right = [k, sigma](double x) { return mixture_pdf(x) * theta_sf(k - x, sigma); };
    constexpr double kLimit = 8.0;
    constexpr double kTol = 1e-11;
    return integrate_piecewise(left, -kLimit, 0.0, {k - 1.0}, kTol) +
           integrate_piecewise(right, 0.0, kLimit, {k - 1.0}, kTol);
}

double invariance_gradient(double boundary_k) {
    const double k = boundary_k;
    return std::exp(-k * k / 4.0) * std::erf(1.0 - k / 2.0) -
           std::exp(-(k - 2.0) * (k - 2.0) / 4.0) * std::erf(k / 2.0);
}

double boundary_robust_accuracy(double boundary_k, double sigma, double epsilon) {
    require_nonnegative(sigma, "sigma");
    require_nonnegative(epsilon, "epsilon");
    const double v = defended_variance(sigma);
    const double k = boundary_k;
    return (gaussian::cdf_scaled(k - epsilon, v) + gaussian::cdf_scaled(2.0 - k - epsilon, v)) /
           (gaussian::cdf_scaled(k, v) + gaussian::cdf_scaled(2.0 - k, v));
}

double boundary_benign_accuracy(double boundary_k, double sigma) {
    require_nonnegative(sigma, "sigma");
    const double v = defended_variance(sigma);
    return 0.5 * (gaussian::cdf_scaled(boundary_k, v) + gaussian::cdf_scaled(2.0 - boundary_k, v));
}

MonteCarloEstimate vote_invariance_rate(const AnalyticParams& params, const MonteCarloConfig& mc,
                                        double min_abs_x) {
    params.validate();
    const double sigma = params.sigma;
    const double k = params.boundary_k;
    const int n = params.votes_n;
    return run_monte_carlo(mc, [=](SeededRng& rng, std::int64_t& hits, std::int64_t& trials) {
        thread_local std::vector<double> thetas;
        const double y = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double x = y + rng.normal();
        const int vote = vote_sign(rng, x, sigma, k, n, thetas);
        if (std::abs(x) <= min_abs_x) {
            return;
        }
        ++trials;
        hits += (vote == (x > 0.0 ? 1 : -1)) ? 1 : 0;
    });
}

double effective_sigma_under_vote(double sigma, int votes_n) {
    require_nonnegative(sigma, "sigma");
    if (votes_n < 1) {
        throw std::invalid_argument("votes_n must be at least 1");
    }
    return sigma / std::sqrt(static_cast<double>(votes_n));
}

MonteCarloEstimate simulate_robust_accuracy(const AnalyticParams& params, const MonteCarloConfig& mc) {
    params.validate();
    const double sigma = params.sigma;
    const double eps = params.epsilon;
    const double k = params.boundary_k;
    const int n = params.votes_n;
    return run_monte_carlo(mc, [=](SeededRng& rng, std::int64_t& hits, std::int64_t& trials) {
        thread_local std::vector<double> thetas;
        const int y = rng.uniform() < 0.5 ? -1 : 1;
        const double x = y + rng.normal();
        if (vote_sign(rng, x, sigma, k, n, thetas) != y) {
            return;
        }
        ++trials;
        // Each vote is monotone in x, so the worst case moves the full budget
        // toward the boundary.
        hits += (vote_sign_fixed(x - y * eps, k, thetas) == y) ? 1 : 0;
    });
}

std::vector<SweepRow> sweep(const std::vector<double>& ks, const std::vector<double>& sigmas,
                            const std::vector<double>& epsilons, const std::vector<int>& ns,
                            const MonteCarloConfig& mc) {
    std::vector<SweepRow> rows;
    std::uint64_t cell = 0;
    for (double sigma : sigmas) {
        for (double eps : epsilons) {
            for (int n : ns) {
                for (double k : ks) {
                    AnalyticParams p{sigma, eps, k, n};
                    p.validate();
                    SweepRow row{k, sigma, eps, n};
                    const double s_eff = effective_sigma_under_vote(sigma, n);
                    row.acc = boundary_benign_accuracy(k, s_eff);
                    row.rob = boundary_robust_accuracy(k, s_eff, eps);
                    MonteCarloConfig cell_mc = mc;
                    cell_mc.seed = mix64(mc.seed ^ mix64(++cell));
                    row.invariance = n == 1 ? invariance_rate(p) : vote_invariance_rate(p, cell_mc).estimate;
                    const auto rob_mc = simulate_robust_accuracy(p, cell_mc);
                    row.rob_mc = rob_mc.estimate;
                    row.rob_mc_stderr = rob_mc.standard_error;
                    rows.push_back(row);
                }
            }
        }
    }
    return rows;
}

} // namespace stochdef::analytic
