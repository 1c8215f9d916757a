#include "fixtures.hpp"

#include "vineport/marginals.hpp"
#include "vineport/skewt.hpp"
#include "vineport/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace vineport;

using fixtures::garch_truth;

TEST(Skewt, StandardizedMoments) {
    for (SkewtParams p : {SkewtParams{1.0, 8.0}, SkewtParams{0.8, 5.0}, SkewtParams{1.3, 12.0}}) {
        double m0 = 0, m1 = 0, m2 = 0;
        const double h = 2e-4;
        for (double z = -60; z <= 60; z += h) {
            const double f = skewt_pdf(z, p) * h;
            m0 += f;
            m1 += f * z;
            m2 += f * z * z;
        }
        EXPECT_NEAR(m0, 1.0, 1e-5);
        EXPECT_NEAR(m1, 0.0, 1e-5);
        // heavy tails beyond the grid cost a little second moment at shape 5
        EXPECT_NEAR(m2, 1.0, 2e-3);
    }
}

TEST(Skewt, QuantileInvertsCdf) {
    for (SkewtParams p : {SkewtParams{1.0, 8.0}, SkewtParams{0.7, 4.0}, SkewtParams{1.5, 30.0}}) {
        for (double u = 1e-6; u < 1.0; u += 0.0371) EXPECT_NEAR(skewt_cdf(skewt_quantile(u, p), p), u, 1e-8);
        EXPECT_NEAR(skewt_cdf(skewt_quantile(0.999999, p), p), 0.999999, 1e-8);
    }
}

TEST(Skewt, SkewLengthensRightTail) {
    const SkewtParams right{1.4, 8.0};
    EXPECT_GT(1.0 - skewt_cdf(2.0, right), skewt_cdf(-2.0, right));
    EXPECT_GT(skewt_cdf(0.0, right), 0.5);
    EXPECT_LT(skewt_cdf(0.0, {0.7, 8.0}), 0.5);
    EXPECT_NEAR(skewt_cdf(0.0, {1.0, 8.0}), 0.5, 1e-12);
}

TEST(Garch, ValidateRejectsNonStationary) {
    auto p = garch_truth();
    p.alpha = 0.2;
    p.beta = 0.8;
    EXPECT_THROW(validate(p), std::invalid_argument);
    p = garch_truth();
    p.omega = 0;
    EXPECT_THROW(validate(p), std::invalid_argument);
}

TEST(Garch, ShortSeriesIsRejected) {
    auto r = simulate_ar_garch(garch_truth(), 249, 1);
    EXPECT_THROW(fit_ar_garch(r), std::invalid_argument);
}

TEST(Garch, FitReplaysRecursionAndLikelihood) {
    auto r = simulate_ar_garch(garch_truth(), 1500, 42);
    auto fit = fit_ar_garch(r);
    const auto& p = fit.params;
    ASSERT_NO_THROW(validate(p));
    ASSERT_EQ(fit.variances.size(), r.size() - 1);
    ASSERT_EQ(fit.residuals.size(), r.size() - 1);

    double mu = 0;
    for (double x : r) mu += x;
    mu /= static_cast<double>(r.size());
    double h = 0;
    for (double x : r) h += (x - mu) * (x - mu);
    h /= static_cast<double>(r.size() - 1);

    double ll = 0, e_prev = 0;
    for (std::size_t t = 1; t < r.size(); ++t) {
        if (t > 1) h = p.omega + p.alpha * e_prev * e_prev + p.beta * h;
        const double e = r[t] - p.mu - p.phi * r[t - 1];
        EXPECT_NEAR(fit.variances[t - 1], h, 1e-10 * h);
        EXPECT_GT(fit.variances[t - 1], 0.0);
        ll += std::log(skewt_pdf(e / std::sqrt(h), p.skewt) / std::sqrt(h));
        e_prev = e;
    }
    EXPECT_NEAR(fit.log_likelihood, ll, 1e-8 * std::abs(ll));

    ArGarchParams start;
    start.mu = mu;
    start.phi = 0;
    start.omega = 0.05 * h;
    start.alpha = 0.05;
    start.beta = 0.90;
    start.skewt = {1.0, 8.0};
    EXPECT_GE(fit.log_likelihood, ar_garch_loglik(r, start));
}

TEST(Garch, PitIsUniformUnderTruth) {
    auto r = simulate_ar_garch(garch_truth(), 3000, 9);
    auto fit = filter_ar_garch(r, garch_truth());
    auto u = pit_residuals(fit);
    ASSERT_EQ(u.size(), r.size() - 1);
    double m = 0;
    for (double x : u) {
        ASSERT_GT(x, 0.0);
        ASSERT_LT(x, 1.0);
        m += x;
    }
    EXPECT_NEAR(m / static_cast<double>(u.size()), 0.5, 0.02);
    for (std::size_t t = 0; t < u.size(); t += 97)
        EXPECT_NEAR(skewt_quantile(u[t], garch_truth().skewt), fit.residuals[t], 1e-8 * std::max(1.0, std::abs(fit.residuals[t])));
}

TEST(Garch, OneStepForecastUsesFilteredState) {
    auto r = simulate_ar_garch(garch_truth(), 600, 3);
    auto fit = filter_ar_garch(r, garch_truth());
    auto f = forecast_one_step(fit);
    const auto p = garch_truth();
    EXPECT_NEAR(f.mean, p.mu + p.phi * r.back(), 1e-12);
    EXPECT_NEAR(f.variance, p.omega + p.alpha * fit.last_innovation * fit.last_innovation + p.beta * fit.last_variance, 1e-12);

    Eigen::MatrixXd u(1, 1);
    u(0, 0) = 0.5;
    std::vector<MarginalFit> fits{fit};
    auto x = reconstruct_returns(u, fits);
    EXPECT_NEAR(x(0, 0), f.mean + std::sqrt(f.variance) * skewt_quantile(0.5, p.skewt), 1e-12);
}

TEST(Garch, SimulationIsSeeded) {
    EXPECT_EQ(simulate_ar_garch(garch_truth(), 300, 5), simulate_ar_garch(garch_truth(), 300, 5));
    EXPECT_NE(simulate_ar_garch(garch_truth(), 300, 5), simulate_ar_garch(garch_truth(), 300, 6));
}
