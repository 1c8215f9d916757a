#include "oracles.hpp"

#include "vineport/backtest.hpp"
#include "vineport/rng.hpp"
#include "vineport/synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace vineport;

namespace {

ReturnPanel gaussian_panel(int T, std::uint64_t seed) {
    ReturnPanel p;
    p.assets = {"A", "B", "C"};
    p.dates = business_days("2005-01-03", static_cast<std::size_t>(T));
    p.returns.resize(T, 3);
    Rng rng(seed);
    const double vol[] = {0.7, 1.0, 1.4};
    for (int t = 0; t < T; ++t) {
        const double m = rng.normal();
        for (int j = 0; j < 3; ++j) p.returns(t, j) = 0.02 + vol[j] * (0.5 * m + std::sqrt(0.75) * rng.normal());
    }
    return p;
}

BacktestConfig quick(BacktestMethod m) {
    BacktestConfig c;
    c.window = 250;
    c.simulations = 1000;
    c.method = m;
    c.seed = 5;
    return c;
}

void expect_wealth_recursion(const BacktestLedger& l) {
    double gross = 100, net = 100;
    const double c = l.tc_bps / 1e4;
    for (const auto& r : l.rows) {
        const double g = gross * (1 + r.ret / 100);
        const double n = net * (1 + r.ret / 100) * (1 - c * r.turnover);
        EXPECT_NEAR(r.wealth_gross, g, 1e-12 * g);
        EXPECT_NEAR(r.wealth_net, n, 1e-12 * n);
        EXPECT_NEAR(r.turnover, (r.weights - r.pre_weights).cwiseAbs().sum(), 1e-12);
        EXPECT_NEAR(r.weights.sum(), 1.0, 1e-8);
        gross = r.wealth_gross;
        net = r.wealth_net;
    }
}

} // namespace

TEST(Backtest, ConfigValidation) {
    auto c = quick(BacktestMethod::Historical);
    c.window = 100;
    EXPECT_THROW(validate(c), std::invalid_argument);
    c = quick(BacktestMethod::Historical);
    c.simulations = 10;
    EXPECT_THROW(validate(c), std::invalid_argument);
    EXPECT_EQ(backtest_method_from_name("eqw"), BacktestMethod::EqualWeight);
    EXPECT_THROW(backtest_method_from_name("oracle"), std::invalid_argument);
}

TEST(Backtest, EqualWeightLedger) {
    auto p = gaussian_panel(300, 1);
    auto l = run_backtest(p, quick(BacktestMethod::EqualWeight));
    ASSERT_EQ(l.rows.size(), 50u);
    EXPECT_EQ(l.rows.front().date, p.dates[250]);
    EXPECT_EQ(l.rows.front().turnover, 0.0);
    expect_wealth_recursion(l);
    // daily rebalancing back to 1/d trades away the drift
    EXPECT_GT(l.rows[5].turnover, 0.0);
    for (const auto& r : l.rows) EXPECT_LT((r.weights.array() - 1.0 / 3).abs().maxCoeff(), 1e-15);
    double first = 0;
    for (int j = 0; j < 3; ++j) first += (std::exp(p.returns(250, j) / 100) - 1) / 3;
    EXPECT_NEAR(l.rows.front().ret, 100 * first, 1e-12);
}

TEST(Backtest, CadenceHoldsDriftedWeights) {
    auto p = gaussian_panel(320, 2);
    auto c = quick(BacktestMethod::Historical);
    c.cadence = 10;
    c.strategy.kind = Strategy::MinVariance;
    auto l = run_backtest(p, c);
    ASSERT_EQ(l.rows.size(), 70u);
    expect_wealth_recursion(l);
    for (std::size_t i = 0; i < l.rows.size(); ++i) {
        EXPECT_EQ(l.rows[i].rebalanced, i % 10 == 0);
        if (i % 10 != 0) {
            EXPECT_EQ(l.rows[i].turnover, 0.0);
            EXPECT_LT((l.rows[i].weights - l.rows[i].pre_weights).norm(), 1e-15);
        }
    }
}

TEST(Backtest, CopulaWindowsAreDeterministic) {
    SyntheticSpec s;
    s.assets = 3;
    s.days = 262;
    s.seed = 3;
    auto p = synthetic_panel(s);
    auto c = quick(BacktestMethod::Copula);
    c.cadence = 6;
    c.vine.families = {Family::Clayton, Family::Gumbel, Family::Frank};
    auto a = run_backtest(p, c);
    auto b = run_backtest(p, c);
    ASSERT_EQ(a.rows.size(), 12u);
    expect_wealth_recursion(a);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].weights, b.rows[i].weights);
        EXPECT_EQ(a.rows[i].var, b.rows[i].var);
        EXPECT_FALSE(a.rows[i].flagged) << a.rows[i].note;
        EXPECT_LT(a.rows[i].es[0], a.rows[i].var[0]);
        EXPECT_LT(a.rows[i].var[0], 0.0);
    }
}

TEST(Backtest, IndependenceCopulaTracksHistoricalRisk) {
    auto p = gaussian_panel(1250, 8);
    // independent assets, so the independence copula is the true dependence model
    for (int t = 0; t < p.rows(); ++t) {
        Rng rng(derive_seed(99, "row", static_cast<std::uint64_t>(t)));
        for (int j = 0; j < 3; ++j) p.returns(t, j) = 0.02 + (0.7 + 0.35 * j) * rng.normal();
    }
    auto c = quick(BacktestMethod::Copula);
    c.cadence = 20;
    c.simulations = 4000;
    c.vine.families = {Family::Independence};
    c.vine.independence_test = true;
    auto cop = performance_report(run_backtest(p, c));
    c.method = BacktestMethod::Historical;
    auto hist = performance_report(run_backtest(p, c));
    ASSERT_EQ(cop.days, 1000u);
    EXPECT_NEAR(cop.cvar, hist.cvar, 0.10 * hist.cvar);
}

TEST(Backtest, LedgerCsvRoundTrip) {
    auto p = gaussian_panel(280, 4);
    auto c = quick(BacktestMethod::Historical);
    c.var_levels = {0.01, 0.05};
    c.cadence = 3;
    auto l = run_backtest(p, c);
    auto dir = oracle::scratch_dir("ledger");
    write_ledger_csv(l, (dir / "ledger.csv").string());
    write_ledger_aux_csv(l, (dir / "aux.csv").string());
    auto back = read_ledger_csv((dir / "ledger.csv").string(), (dir / "aux.csv").string());
    ASSERT_EQ(back.rows.size(), l.rows.size());
    // weight columns are labelled by position, not by asset name
    EXPECT_EQ(back.assets, (std::vector<std::string>{"w1", "w2", "w3"}));
    EXPECT_EQ(back.var_levels, l.var_levels);
    for (std::size_t i = 0; i < l.rows.size(); ++i) {
        EXPECT_EQ(back.rows[i].date, l.rows[i].date);
        EXPECT_EQ(back.rows[i].weights, l.rows[i].weights);
        EXPECT_EQ(back.rows[i].pre_weights, l.rows[i].pre_weights);
        EXPECT_EQ(back.rows[i].wealth_net, l.rows[i].wealth_net);
        EXPECT_EQ(back.rows[i].es, l.rows[i].es);
        EXPECT_EQ(back.rows[i].rebalanced, l.rows[i].rebalanced);
    }
    std::ifstream in(dir / "ledger.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "date,w1,w2,w3,ret,turnover,wealth_gross,wealth_net,var_1,es_1,var_5,es_5");
}

TEST(Performance, ReportMatchesDirectComputation) {
    BacktestLedger l;
    l.assets = {"A", "B"};
    l.tc_bps = 10;
    double w = 100;
    Rng rng(3);
    for (int i = 0; i < 60; ++i) {
        LedgerRow r;
        r.date = business_days("2020-01-01", 60)[static_cast<std::size_t>(i)];
        r.weights = Eigen::Vector2d(0.5, 0.5);
        r.pre_weights = r.weights;
        r.ret = rng.normal();
        r.turnover = 0.1 * rng.uniform();
        w *= (1 + r.ret / 100) * (1 - 0.001 * r.turnover);
        r.wealth_net = w;
        r.wealth_gross = w;
        l.rows.push_back(r);
    }
    auto net = net_returns(l);
    ASSERT_EQ(net.size(), 60u);
    EXPECT_NEAR(net[0], 100 * (l.rows[0].wealth_net / 100 - 1), 1e-12);
    auto rep = performance_report(l);
    double m = 0;
    for (double x : net) m += x;
    m /= 60;
    EXPECT_NEAR(rep.mean, m, 1e-12);
    EXPECT_NEAR(rep.sd, std::sqrt(oracle::sample_variance(net)), 1e-12);
    EXPECT_NEAR(rep.cvar, oracle::cvar(net, 0.10), 1e-12);
    if (rep.cvar > 0) { EXPECT_NEAR(rep.starr, rep.mean / rep.cvar, 1e-12); }
    auto sub = performance_report(l, {l.rows[10].date, l.rows[29].date});
    EXPECT_EQ(sub.days, 20u);
    EXPECT_EQ(quarter_of("2008-09-30"), "2008Q3");
    EXPECT_EQ(quarter_of("2009-01-02"), "2009Q1");
}

TEST(Regression, RecoversStrategyAndQuarterEffects) {
    std::vector<QuarterlyOutcome> data;
    Rng rng(10);
    const std::vector<std::string> strategies{"EQW", "CVaR", "GMV"};
    const double effect[] = {0.0, -0.4, 0.25};
    const std::vector<std::string> quarters{"2008Q1", "2008Q2", "2008Q3", "2008Q4", "2009Q1", "2009Q2"};
    for (std::size_t q = 0; q < quarters.size(); ++q)
        for (std::size_t s = 0; s < strategies.size(); ++s)
            data.push_back({strategies[s], quarters[q], 1.0 + effect[s] + 0.3 * static_cast<double>(q) + 0.05 * rng.normal()});

    // oracle design: constant, CVaR, GMV, then quarters 2..6
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(data.size()), 8);
    Eigen::VectorXd y(X.rows());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        X(r, 0) = 1;
        if (data[i].strategy == "CVaR") X(r, 1) = 1;
        if (data[i].strategy == "GMV") X(r, 2) = 1;
        for (std::size_t q = 1; q < quarters.size(); ++q)
            if (data[i].quarter == quarters[q]) X(r, 2 + static_cast<Eigen::Index>(q)) = 1;
        y(r) = data[i].value;
    }
    Eigen::VectorXd beta = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    Eigen::VectorXd e = y - X * beta;
    const double s2 = e.squaredNorm() / static_cast<double>(X.rows() - X.cols());
    Eigen::MatrixXd cov = s2 * (X.transpose() * X).inverse();

    auto table = strategy_regression(data, "EQW");
    ASSERT_EQ(table.terms.size(), 8u);
    EXPECT_EQ(table.n, data.size());
    EXPECT_EQ(table.terms[0].name, "const");
    for (Eigen::Index k = 0; k < 8; ++k) {
        EXPECT_NEAR(table.terms[static_cast<std::size_t>(k)].coef, beta(k), 1e-10);
        EXPECT_NEAR(table.terms[static_cast<std::size_t>(k)].t, beta(k) / std::sqrt(cov(k, k)), 1e-6);
    }
    EXPECT_NEAR(table.terms[1].coef, -0.4, 0.1);
    EXPECT_THROW(strategy_regression(data, "Kelly"), std::invalid_argument);
}
