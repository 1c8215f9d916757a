#include "oracles.hpp"

#include "vineport/risktests.hpp"
#include "vineport/rng.hpp"
#include "vineport/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vineport;

namespace {

// Normal returns with a known scale and correctly specified forecasts.
HitSequence calibrated(std::size_t T, double p, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    HitSequence h;
    h.p = p;
    const double q = stats::normal_quantile(p);
    const double es = -stats::normal_pdf(q) / p;
    for (std::size_t t = 0; t < T; ++t) {
        const double s = scale * (1.0 + 0.5 * std::sin(0.05 * static_cast<double>(t)));
        h.ret.push_back(s * rng.normal());
        h.var.push_back(s * q);
        h.es.push_back(s * es);
        h.sigma.push_back(s);
    }
    return h;
}

HitSequence with_hits(const std::vector<int>& hits, double p) {
    HitSequence h;
    h.p = p;
    for (std::size_t t = 0; t < hits.size(); ++t) {
        h.var.push_back(-2.0);
        h.es.push_back(-2.5);
        h.sigma.push_back(1.0);
        h.ret.push_back(hits[t] ? -3.0 - 0.1 * static_cast<double>(t % 7) : 0.1 * static_cast<double>(t % 5));
    }
    return h;
}

} // namespace

TEST(Kupiec, MatchesIndependentFormula) {
    EXPECT_NEAR(kupiec_uc(250, 5, 0.01), 1.957, 0.005);
    EXPECT_NEAR(kupiec_uc(500, 12, 0.01), 7.11, 0.01);
    for (std::size_t T : {100u, 250u, 1000u})
        for (std::size_t N = 0; N <= 20; N += 3) EXPECT_NEAR(kupiec_uc(T, N, 0.02), oracle::kupiec(T, N, 0.02), 1e-10);
    EXPECT_NEAR(kupiec_uc(500, 5, 0.01), 0.0, 1e-12);
    EXPECT_NEAR(kupiec_uc(100, 100, 0.01), oracle::kupiec(100, 100, 0.01), 1e-10);
}

TEST(VarBacktest, ConditionalCoverageDominatesUnconditional) {
    Rng rng(4);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<int> hits(300);
        const double rate = 0.005 + 0.05 * rng.uniform();
        for (auto& x : hits) x = rng.uniform() < rate;
        if (rep % 5 == 0) hits[10] = hits[11] = hits[12] = 1;
        auto r = var_backtest(with_hits(hits, 0.01));
        EXPECT_GE(r.cc, r.uc - 1e-12);
        EXPECT_GE(r.lr_ind, 0.0);
        EXPECT_NEAR(r.cc, r.uc + r.lr_ind, 1e-12);
    }
}

TEST(VarBacktest, SummaryColumns) {
    std::vector<int> hits(400, 0);
    for (int t : {30, 90, 150, 151, 300, 333}) hits[static_cast<std::size_t>(t)] = 1;
    auto h = with_hits(hits, 0.01);
    // a varying forecast keeps the DQ design full rank
    for (std::size_t t = 0; t < h.var.size(); ++t) h.var[t] = -2.0 - 0.05 * static_cast<double>(t % 4);
    auto r = var_backtest(h);
    EXPECT_EQ(r.T, 400u);
    EXPECT_EQ(r.ne, 6u);
    EXPECT_NEAR(r.ae, 6.0 / (0.01 * 400), 1e-12);
    EXPECT_NEAR(r.uc, oracle::kupiec(400, 6, 0.01), 1e-10);
    double ad = 0, aql = 0;
    for (std::size_t t = 0; t < h.ret.size(); ++t) {
        const double hit = h.ret[t] < h.var[t];
        ad += hit * std::abs(h.ret[t] - h.var[t]);
        aql += (0.01 - hit) * (h.ret[t] - h.var[t]);
    }
    EXPECT_NEAR(r.ad, ad / 6, 1e-12);
    EXPECT_NEAR(r.aql, aql / 400, 1e-12);
    EXPECT_TRUE(r.dq_computable);
    EXPECT_GE(r.dq, 0.0);
}

TEST(VarBacktest, DegenerateAndRankDeficientCases) {
    auto none = var_backtest(with_hits(std::vector<int>(200, 0), 0.01));
    EXPECT_TRUE(none.degenerate);
    EXPECT_EQ(none.ne, 0u);
    EXPECT_NEAR(none.uc, oracle::kupiec(200, 0, 0.01), 1e-10);
    // constant hits and constant VaR make the DQ design singular
    EXPECT_FALSE(none.dq_computable);
    EXPECT_TRUE(std::isnan(none.dq));
    EXPECT_THROW(var_backtest(with_hits(std::vector<int>(20, 0), 0.01)), std::invalid_argument);
}

TEST(VarBacktest, InvariantToRescalingUnits) {
    auto h = calibrated(1000, 0.05, 6);
    auto g = h;
    for (std::size_t t = 0; t < g.ret.size(); ++t) {
        g.ret[t] = 3.0 * g.ret[t] + 0.7;
        g.var[t] = 3.0 * g.var[t] + 0.7;
    }
    auto a = var_backtest(h), b = var_backtest(g);
    EXPECT_NEAR(a.uc, b.uc, 1e-10);
    EXPECT_NEAR(a.cc, b.cc, 1e-10);
    EXPECT_NEAR(a.dq, b.dq, 1e-6 * std::max(1.0, a.dq));
}

TEST(VarBacktest, QuantileLossIsMinimizedAtTruth) {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto h = calibrated(1000, 0.05, 100 + seed);
        auto lo = h, hi = h;
        for (std::size_t t = 0; t < h.var.size(); ++t) {
            lo.var[t] *= 0.8;
            hi.var[t] *= 1.2;
        }
        const double a = var_backtest(h).aql;
        wins += a < var_backtest(lo).aql && a < var_backtest(hi).aql;
    }
    EXPECT_GE(wins, 95);
}

TEST(EsTests, ExceedanceResidualRespondsToUnderstatedEs) {
    auto good = calibrated(2000, 0.025, 7);
    auto r = es_er_test(good, 2000, 1);
    EXPECT_GT(r.exceedances, 20u);
    EXPECT_GT(r.p_bootstrap, 0.05);
    auto bad = good;
    for (auto& e : bad.es) e *= 0.7;
    auto s = es_er_test(bad, 2000, 1);
    EXPECT_LT(s.mean, 0.0);
    EXPECT_LT(s.p_bootstrap, 0.05);
    EXPECT_LT(s.p_asymptotic, 0.05);
    EXPECT_EQ(es_er_test(bad, 2000, 1).p_bootstrap, s.p_bootstrap);
}

TEST(EsTests, ExceedanceResidualNeedsEnoughHits) {
    auto h = with_hits(std::vector<int>(300, 0), 0.01);
    for (int t : {3, 50, 100, 200}) h.ret[static_cast<std::size_t>(t)] = -5;
    EXPECT_THROW(es_er_test(h), std::invalid_argument);
}

TEST(EsTests, ConditionalCalibration) {
    auto good = calibrated(2500, 0.025, 9);
    auto r = es_cond_calibration(good);
    EXPECT_EQ(r.simple_df, 2);
    EXPECT_EQ(r.general_df, 6);
    EXPECT_GT(r.simple_p, 0.01);
    auto bad = good;
    for (std::size_t t = 0; t < bad.var.size(); ++t) {
        bad.var[t] *= 0.6;
        bad.es[t] *= 0.6;
    }
    auto s = es_cond_calibration(bad);
    EXPECT_LT(s.simple_p, 0.01);
    EXPECT_LT(s.general_p, 0.01);
    EXPECT_THROW(es_cond_calibration(calibrated(200, 0.025, 1)), std::invalid_argument);
}
