#include "fixtures.hpp"
#include "oracles.hpp"

#include "vineport/bicop.hpp"
#include "vineport/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace vineport;

namespace {

using fixtures::copula_catalogue;

std::string label(const BicopSpec& s) {
    return std::string(family_name(s.family)) + "/" + std::to_string(s.rotation) + "/" + std::to_string(s.params[0]);
}

const double kGrid[] = {0.1, 0.3, 0.5, 0.7, 0.9};

} // namespace

TEST(Bicop, FamilyCodesRoundTrip) {
    for (auto s : copula_catalogue()) {
        auto fr = family_from_code(s.code());
        EXPECT_EQ(fr.family, s.family);
        EXPECT_EQ(fr.rotation, s.rotation);
    }
    EXPECT_EQ(family_code(Family::Clayton, 180), 13);
    EXPECT_EQ(family_code(Family::Gumbel, 90), 24);
    EXPECT_EQ(family_code(Family::BB8, 270), 40);
    EXPECT_EQ(parameter_count(Family::Independence), 0);
    EXPECT_EQ(parameter_count(Family::Frank), 1);
    EXPECT_EQ(parameter_count(Family::BB7), 2);
    EXPECT_EQ(family_from_name("clayton"), Family::Clayton);
    EXPECT_FALSE(family_from_name("semi-nonparametric").has_value());
}

TEST(Bicop, ValidateRejectsBadSpecs) {
    EXPECT_THROW(validate({Family::Clayton, 0, {-1.0, 0}}), std::invalid_argument);
    EXPECT_THROW(validate({Family::Gaussian, 90, {0.3, 0}}), std::invalid_argument);
    EXPECT_THROW(validate({Family::StudentT, 0, {0.3, 1.5}}), std::invalid_argument);
    EXPECT_NO_THROW(validate({Family::Gumbel, 270, {2.0, 0}}));
}

TEST(Bicop, DensityMatchesMixedDifferenceOfCdf) {
    const double h = 1e-4;
    for (const auto& s : copula_catalogue()) {
        Bicop c(s);
        for (double u : kGrid)
            for (double v : kGrid) {
                const double fd =
                    (c.cdf(u + h, v + h) - c.cdf(u + h, v - h) - c.cdf(u - h, v + h) + c.cdf(u - h, v - h)) / (4 * h * h);
                EXPECT_NEAR(c.pdf(u, v), fd, 1e-4 * std::abs(fd)) << label(s) << " at " << u << "," << v;
            }
    }
}

TEST(Bicop, HfunctionsMatchFirstDifferences) {
    const double h = 1e-5;
    for (const auto& s : copula_catalogue()) {
        Bicop c(s);
        for (double u : kGrid)
            for (double v : kGrid) {
                const double d2 = (c.cdf(u, v + h) - c.cdf(u, v - h)) / (2 * h);
                const double d1 = (c.cdf(u + h, v) - c.cdf(u - h, v)) / (2 * h);
                EXPECT_NEAR(c.hfunc2(u, v), d2, 1e-5) << label(s);
                EXPECT_NEAR(c.hfunc1(u, v), d1, 1e-5) << label(s);
                EXPECT_NEAR(hfunc(u, v, s), d2, 1e-5) << label(s);
            }
    }
}

TEST(Bicop, HinverseComposesToIdentity) {
    for (const auto& s : copula_catalogue()) {
        Bicop c(s);
        for (double u : {0.01, 0.2, 0.5, 0.8, 0.99})
            for (double v : {0.02, 0.3, 0.6, 0.97}) {
                EXPECT_NEAR(c.hinv2(c.hfunc2(u, v), v), u, 1e-8) << label(s);
                EXPECT_NEAR(c.hinv1(c.hfunc1(v, u), v), u, 1e-8) << label(s);
            }
    }
}

TEST(Bicop, UniformMarginIdentities) {
    for (const auto& s : copula_catalogue()) {
        Bicop c(s);
        for (double u : {0.0, 0.13, 0.5, 0.77, 1.0}) {
            EXPECT_NEAR(c.cdf(u, 1.0), u, 1e-12) << label(s);
            EXPECT_NEAR(c.cdf(1.0, u), u, 1e-12) << label(s);
            EXPECT_NEAR(c.cdf(u, 0.0), 0.0, 1e-12) << label(s);
            EXPECT_NEAR(c.cdf(0.0, u), 0.0, 1e-12) << label(s);
        }
    }
}

TEST(Bicop, RotationAlgebra) {
    for (const auto& s : copula_catalogue()) {
        if (s.rotation != 0 || !rotation_allowed(s.family, 180)) continue;
        Bicop c0(s), c180({s.family, 180, s.params}), c90({s.family, 90, s.params}), c270({s.family, 270, s.params});
        for (double u : kGrid)
            for (double v : kGrid) {
                // the survival transform applied to the survival copula restores the original
                EXPECT_NEAR(u + v - 1 + c180.cdf(1 - u, 1 - v), c0.cdf(u, v), 1e-12) << label(s);
                EXPECT_NEAR(c90.cdf(u, v), v - c0.cdf(1 - u, v), 1e-12) << label(s);
                EXPECT_NEAR(c270.cdf(u, v), u - c0.cdf(u, 1 - v), 1e-12) << label(s);
            }
    }
}

TEST(Bicop, TauInversionRoundTrip) {
    for (Family f : kParametricFamilies) {
        for (double tau : {0.05, 0.2, 0.4, 0.6, 0.75}) {
            auto s = tau_to_param(f, 0, tau);
            EXPECT_NEAR(param_to_tau(s), tau, 1e-6) << family_name(f);
            if (rotation_allowed(f, 90)) {
                auto r = tau_to_param(f, 90, -tau);
                EXPECT_NEAR(param_to_tau(r), -tau, 1e-6) << family_name(f);
            }
        }
    }
    for (Family f : {Family::Gaussian, Family::StudentT, Family::Frank})
        EXPECT_NEAR(param_to_tau(tau_to_param(f, 0, -0.45)), -0.45, 1e-6);
    EXPECT_THROW(tau_to_param(Family::Clayton, 0, -0.3), std::domain_error);
}

TEST(Bicop, TailDependenceLimits) {
    std::vector<BicopSpec> specs = {{Family::Clayton, 0, {1.5, 0}},
                                    {Family::Clayton, 180, {2.5, 0}},
                                    {Family::Gumbel, 0, {2.0, 0}},
                                    {Family::Gumbel, 180, {1.5, 0}},
                                    {Family::StudentT, 0, {0.6, 4}}};
    for (const auto& s : specs) {
        Bicop c(s);
        const auto td = tail_dependence(s);
        double prev_lo = 1e9, prev_up = 1e9;
        for (double t : {1e-3, 1e-4, 1e-5}) {
            const double lo = std::abs(c.cdf(t, t) / t - td.lower);
            const double up = std::abs((2 * t - 1 + c.cdf(1 - t, 1 - t)) / t - td.upper);
            EXPECT_LE(lo, prev_lo + 1e-9) << label(s);
            EXPECT_LE(up, prev_up + 1e-9) << label(s);
            prev_lo = lo;
            prev_up = up;
        }
        EXPECT_LE(prev_lo, 2e-2) << label(s);
        EXPECT_LE(prev_up, 2e-2) << label(s);
    }
    EXPECT_NEAR(tail_dependence({Family::Clayton, 0, {1.0, 0}}).lower, 0.5, 1e-12);
    EXPECT_NEAR(tail_dependence({Family::Gumbel, 0, {2.0, 0}}).upper, 2 - std::sqrt(2.0), 1e-12);
}

TEST(Bicop, SamplerReproducesKendallTau) {
    for (const auto& s : copula_catalogue()) {
        auto u = bicop_sample(4000, s, 17);
        const double tau = stats::kendall_tau(stats::col(u, 0), stats::col(u, 1));
        EXPECT_NEAR(tau, param_to_tau(s), 0.035) << label(s);
    }
}

TEST(Bicop, FitRecoversParameter) {
    BicopSpec s{Family::Gumbel, 0, {2.0, 0}};
    auto u = bicop_sample(3000, s, 4);
    auto fit = fit_bicop(stats::col(u, 0), stats::col(u, 1), Family::Gumbel);
    EXPECT_NEAR(fit.spec.params[0], 2.0, 0.1);
    EXPECT_NEAR(fit.aic, -2 * fit.loglik + 2, 1e-9);
    EXPECT_NEAR(fit.loglik, Bicop(fit.spec).loglik(stats::col(u, 0), stats::col(u, 1)), 1e-8 * std::abs(fit.loglik));
}

TEST(Bicop, SelectionIsAicMinimalOverCandidates) {
    BicopSpec s{Family::Clayton, 0, {3.0, 0}};
    auto u = bicop_sample(500, s, 8);
    auto x = stats::col(u, 0), y = stats::col(u, 1);
    SelectionOptions opts;
    opts.families = {Family::Gaussian, Family::Clayton, Family::Gumbel, Family::Frank, Family::Joe};
    auto best = select_bicop(x, y, opts);
    double oracle_aic = 1e300;
    for (Family f : opts.families)
        for (int rot : {0, 180}) {
            if (!rotation_allowed(f, rot)) continue;
            oracle_aic = std::min(oracle_aic, fit_bicop(x, y, f, rot).aic);
        }
    EXPECT_NEAR(best.aic, oracle_aic, 1e-9);
    EXPECT_EQ(best.spec.family, Family::Clayton);
}

TEST(Bicop, IndependenceScreening) {
    const double n = 400, tau = 0.08;
    const double z = std::abs(tau) * std::sqrt(9 * n * (n - 1) / (2 * (2 * n + 5)));
    EXPECT_EQ(reject_independence(tau, 400, 0.05), z > 1.959963984540054);
    EXPECT_TRUE(reject_independence(0.2, 400));
    EXPECT_FALSE(reject_independence(0.01, 400));

    auto u = bicop_sample(400, {Family::Independence, 0, {0, 0}}, 21);
    auto x = stats::col(u, 0), y = stats::col(u, 1);
    const double t = stats::kendall_tau(x, y);
    auto fit = select_bicop(x, y);
    EXPECT_EQ(fit.spec.family == Family::Independence, !reject_independence(t, 400));
}
