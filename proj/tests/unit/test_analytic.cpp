#include "stochdef/analytic.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace an = stochdef::analytic;

namespace {

an::AnalyticParams at(double k, double sigma = 1.0) {
    an::AnalyticParams p;
    p.boundary_k = k;
    p.sigma = sigma;
    return p;
}

} // namespace

TEST(Gaussian, CdfReferenceValues) {
    EXPECT_NEAR(an::gaussian::cdf(0.0), 0.5, 1e-15);
    EXPECT_NEAR(an::gaussian::cdf(1.0), 0.8413447460685429, 1e-14);
    EXPECT_NEAR(an::gaussian::cdf(-1.96), 0.024997895148220435, 1e-14);
    EXPECT_NEAR(an::gaussian::cdf_scaled(2.0, 4.0), an::gaussian::cdf(1.0), 1e-15);
    EXPECT_NEAR(an::gaussian::pdf(0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
}

TEST(ClosedForms, UnitSigmaUnitBudget) {
    EXPECT_NEAR(an::undefended_accuracy(), 0.841, 0.0005);
    EXPECT_NEAR(an::undefended_robust_accuracy(1.0), 0.594, 0.0005);
    EXPECT_NEAR(an::defended_robust_accuracy(1.0, 1.0), 0.704, 0.0005);
    EXPECT_NEAR(an::defended_benign_accuracy(1.0), 0.711, 0.0005);
    EXPECT_NEAR(an::trained_robust_accuracy(1.0, 1.0), 0.658, 0.0005);
    EXPECT_NEAR(an::trained_benign_accuracy(1.0), 0.760, 0.0005);
}

TEST(ClosedForms, DefendedAndTrainedAreBoundaryCases) {
    for (double s : {0.3, 1.0, 2.0}) {
        for (double e : {0.2, 1.0}) {
            EXPECT_NEAR(an::defended_robust_accuracy(s, e), an::boundary_robust_accuracy(0.0, s, e), 1e-15);
            EXPECT_NEAR(an::trained_robust_accuracy(s, e), an::boundary_robust_accuracy(1.0, s, e), 1e-15);
        }
        EXPECT_NEAR(an::defended_benign_accuracy(s), an::boundary_benign_accuracy(0.0, s), 1e-15);
        EXPECT_NEAR(an::trained_benign_accuracy(s), an::boundary_benign_accuracy(1.0, s), 1e-15);
    }
}

TEST(ClosedForms, RobustnessIsReciprocalOfTwiceAccuracyAtUnitBudget) {
    // With epsilon = 1 and sigma = 1 the numerator of Rob(k) collapses to
    // one half, so Rob(k) = 1 / (2 Acc(k)).
    for (double k = -1.0; k <= 3.0; k += 0.25) {
        EXPECT_NEAR(an::boundary_robust_accuracy(k, 1.0, 1.0), 1.0 / (2.0 * an::boundary_benign_accuracy(k, 1.0)),
                    1e-12);
    }
}

TEST(MonteCarlo, ClosedFormsMatchIndependentSimulation) {
    oracle::GaussianModel mc(2024);
    const std::int64_t n = 200000;
    auto within = [](double value, oracle::Estimate e) { return std::abs(value - e.value) <= 4.0 * e.se; };
    EXPECT_TRUE(within(an::undefended_accuracy(), mc.plain_accuracy(0.0, n)));
    for (double eps : {0.5, 1.0}) {
        const auto after = mc.plain_accuracy(eps, n);
        const auto before = mc.plain_accuracy(0.0, n);
        EXPECT_TRUE(within(an::undefended_robust_accuracy(eps), oracle::ratio(after, before)));
    }
    for (double s : {0.5, 1.5}) {
        EXPECT_TRUE(within(an::defended_benign_accuracy(s), mc.accuracy(0.0, s, 0.0, n)));
        EXPECT_TRUE(within(an::trained_benign_accuracy(s), mc.accuracy(1.0, s, 0.0, n)));
        EXPECT_TRUE(within(an::defended_robust_accuracy(s, 0.7), mc.robust(0.0, s, 0.7, n)));
        EXPECT_TRUE(within(an::trained_robust_accuracy(s, 0.7), mc.robust(1.0, s, 0.7, n)));
    }
}

TEST(Invariance, QuadratureMatchesSimulation) {
    oracle::GaussianModel mc(7);
    for (double k : {-0.5, 0.5, 1.0, 2.2}) {
        for (double s : {0.0, 0.4, 1.0, 2.0}) {
            const auto e = mc.invariance(k, s, 200000);
            EXPECT_NEAR(an::invariance_rate(at(k, s)), e.value, 4.0 * e.se) << "k=" << k << " sigma=" << s;
        }
    }
}

TEST(Invariance, SymmetricAboutUnitBoundary) {
    for (double d = 0.0; d <= 2.0; d += 0.1) {
        EXPECT_NEAR(an::invariance_rate(at(1.0 + d)), an::invariance_rate(at(1.0 - d)), 1e-9);
    }
}

TEST(Invariance, GradientMatchesDerivativeOfQuadrature) {
    const double h = 1e-4;
    for (double k : {-1.0, 0.0, 0.4, 1.0, 1.7, 3.0}) {
        const double fd = (an::invariance_rate(at(k + h)) - an::invariance_rate(at(k - h))) / (2 * h);
        EXPECT_NEAR(an::invariance_gradient(k) / (4.0 * std::sqrt(std::numbers::pi)), fd, 1e-6) << k;
    }
    EXPECT_NEAR(an::invariance_gradient(1.0), 0.0, 1e-15);
    EXPECT_GT(an::invariance_gradient(0.5), 0.0);
    EXPECT_LT(an::invariance_gradient(1.5), 0.0);
}

TEST(Invariance, GradientMatchesSimulatedSlope) {
    oracle::GaussianModel mc(99);
    for (double k : {0.0, 1.8}) {
        const auto e = mc.invariance_slope(k, 0.05, 400000);
        EXPECT_NEAR(an::invariance_gradient(k) / (4.0 * std::sqrt(std::numbers::pi)), e.value, 4.0 * e.se);
    }
}

TEST(Invariance, UnitBoundaryMaximizesAndRobustnessMinimizes) {
    const double r1 = an::invariance_rate(at(1.0));
    const double rob1 = an::boundary_robust_accuracy(1.0, 1.0);
    const double acc1 = an::boundary_benign_accuracy(1.0, 1.0);
    for (double k = -1.0; k <= 3.0 + 1e-9; k += 0.05) {
        if (std::abs(k - 1.0) < 1e-9) {
            continue;
        }
        EXPECT_LT(an::invariance_rate(at(k)), r1) << k;
        EXPECT_GT(an::boundary_robust_accuracy(k, 1.0), rob1) << k;
        EXPECT_LT(an::boundary_benign_accuracy(k, 1.0), acc1) << k;
    }
}

TEST(Vote, PerfectInvarianceWithManyVotes) {
    an::AnalyticParams p = at(1.0);
    p.votes_n = 10001;
    const auto e = an::vote_invariance_rate(p, {2000, 5, 1}, 0.1);
    EXPECT_GE(e.estimate, 0.999);
    EXPECT_LT(e.trials, 2000);
}

TEST(Vote, SingleVoteMatchesQuadrature) {
    an::AnalyticParams p = at(0.5);
    const auto e = an::vote_invariance_rate(p, {200000, 3, 1});
    EXPECT_NEAR(e.estimate, an::invariance_rate(p), 4.0 * e.standard_error);
}

TEST(Vote, EffectiveSigmaDirections) {
    EXPECT_DOUBLE_EQ(an::effective_sigma_under_vote(2.0, 4), 1.0);
    double prev_rob = 2.0;
    double prev_acc = 0.0;
    for (int n : {1, 4, 16, 64}) {
        const double s = an::effective_sigma_under_vote(1.0, n);
        const double rob = an::defended_robust_accuracy(s, 1.0);
        const double acc = an::defended_benign_accuracy(s);
        EXPECT_LT(rob, prev_rob);
        EXPECT_GT(acc, prev_acc);
        prev_rob = rob;
        prev_acc = acc;
    }
}

TEST(MonteCarlo, ResultDependsOnlyOnSeedAndWorkers) {
    an::AnalyticParams p = at(0.5);
    p.votes_n = 3;
    const auto a = an::vote_invariance_rate(p, {20000, 1, 2});
    const auto b = an::vote_invariance_rate(p, {20000, 1, 2});
    EXPECT_EQ(a.hits, b.hits);
    EXPECT_EQ(a.trials, 20000);
    const auto r1 = an::simulate_robust_accuracy(at(1.0), {50000, 4, 1});
    const auto r2 = an::simulate_robust_accuracy(at(1.0), {50000, 4, 1});
    EXPECT_EQ(r1.hits, r2.hits);
}

TEST(MonteCarlo, SimulatedRobustnessMatchesClosedFormForSingleDraw) {
    for (double k : {0.0, 1.0}) {
        const auto e = an::simulate_robust_accuracy(at(k), {400000, 8, 1});
        EXPECT_NEAR(e.estimate, an::boundary_robust_accuracy(k, 1.0), 4.0 * e.standard_error) << k;
    }
}

TEST(Sweep, RowsFollowTheGrid) {
    const auto rows = an::sweep({0.0, 1.0}, {1.0}, {1.0}, {1, 3}, {20000, 2, 1});
    ASSERT_EQ(rows.size(), 4u);
    for (const auto& r : rows) {
        const double s = an::effective_sigma_under_vote(r.sigma, r.n);
        EXPECT_DOUBLE_EQ(r.acc, an::boundary_benign_accuracy(r.k, s));
        EXPECT_DOUBLE_EQ(r.rob, an::boundary_robust_accuracy(r.k, s, r.epsilon));
        EXPECT_GE(r.invariance, 0.0);
        EXPECT_LE(r.invariance, 1.0);
    }
}

TEST(Params, Validation) {
    an::AnalyticParams p;
    p.votes_n = 2;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.votes_n = 1;
    p.sigma = -1.0;
    EXPECT_THROW(an::invariance_rate(p), std::invalid_argument);
    EXPECT_THROW(an::defended_benign_accuracy(-0.1), std::invalid_argument);
    EXPECT_THROW(an::effective_sigma_under_vote(1.0, 0), std::invalid_argument);
}
