#pragma once

#include "vineport/marginals.hpp"
#include "vineport/panel.hpp"
#include "vineport/portfolio.hpp"
#include "vineport/vine.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vineport {

enum class BacktestMethod { Copula, Historical, EqualWeight };

std::string_view backtest_method_name(BacktestMethod m);
/// Accepts "copula", "historical" and "eqw".
BacktestMethod backtest_method_from_name(std::string_view name);

struct BacktestConfig {
    int window = 500;
    int simulations = 10000;
    StrategySpec strategy{};
    BacktestMethod method = BacktestMethod::Copula;
    VineKind vine_kind = VineKind::RVine;
    VineFitOptions vine{};
    bool joint_mle = false;
    /// Select the structure and families on the first window only and refit
    /// parameters on later windows.
    bool freeze_structure = false;
    double tc_bps = 10.0;
    int cadence = 1;                         ///< days between rebalances
    std::vector<double> var_levels{0.01};    ///< VaR / ES forecast levels
    std::uint64_t seed = 1;
    GarchFitOptions garch{};
};

void validate(const BacktestConfig& c);

/// Result of one estimation window. VaR and ES are return thresholds in
/// percent (negative for losses), one entry per configured level.
struct WindowForecast {
    Eigen::VectorXd weights;
    std::vector<double> var;
    std::vector<double> es;
    double sigma = 0.0;          ///< sd of the simulated portfolio return
    bool fallback = false;       ///< max-SR fell back to GMV
    std::optional<VineModel> model;
};

/// One window: marginals, PIT, vine, simulation, reconstruction and the
/// configured optimizer (or the benchmark rule for non-copula methods).
/// `frozen` supplies the structure and families to refit when given.
WindowForecast run_window(const Eigen::MatrixXd& window, const BacktestConfig& config, std::uint64_t seed,
                          const VineModel* frozen = nullptr);

struct LedgerRow {
    std::string date;
    Eigen::VectorXd pre_weights;   ///< drifted weights before trading
    Eigen::VectorXd weights;       ///< target weights held over the day
    double ret = 0.0;              ///< simple portfolio return, percent
    double turnover = 0.0;
    double wealth_gross = 100.0;
    double wealth_net = 100.0;
    std::vector<double> var;
    std::vector<double> es;
    double sigma = 0.0;
    bool rebalanced = true;
    bool flagged = false;          ///< window failed and weights were carried forward
    std::string note;
};

struct BacktestLedger {
    std::vector<std::string> assets;
    std::vector<double> var_levels;
    double tc_bps = 0.0;
    std::vector<LedgerRow> rows;
};

/// Rolling out-of-sample run over days W..T-1, each day using the previous
/// W rows. Wealth starts at 100 and follows
///   wealth_t = wealth_{t-1} (1 + ret_t / 100) (1 - c turnover_t).
BacktestLedger run_backtest(const ReturnPanel& panel, const BacktestConfig& config);

void write_ledger_csv(const BacktestLedger& ledger, const std::string& path);
void write_ledger_aux_csv(const BacktestLedger& ledger, const std::string& path);
BacktestLedger read_ledger_csv(const std::string& path, const std::string& aux_path = {});

/// Inclusive ISO date bounds; empty means open.
struct PeriodFilter {
    std::string from;
    std::string to;
};

/// Values in percent except turnover (sum of absolute weight changes) and
/// the ratios.
struct PerfReport {
    std::size_t days = 0;
    double mean = 0, sd = 0, sr = 0, cvar = 0, starr = 0;
    double terminal_wealth = 0;      ///< TC = 0
    double terminal_wealth_tc = 0;   ///< TC = 10 bp
    double avg_turnover = 0;
};

/// Daily net returns (percent) implied by the wealth path, starting from the
/// wealth before the first row.
std::vector<double> net_returns(const BacktestLedger& ledger);

PerfReport performance_report(const BacktestLedger& ledger, const PeriodFilter& filter = {});

enum class RealizedMeasure { SR, CVaR, StdDev, Mean };
RealizedMeasure realized_measure_from_name(std::string_view name);
std::string_view realized_measure_name(RealizedMeasure m);
double realized_measure(std::span<const double> net, RealizedMeasure m);

/// Value at date t is the measure over the trailing `horizon` net returns.
std::vector<std::pair<std::string, double>> rolling_realized(const BacktestLedger& ledger, std::size_t horizon,
                                                             RealizedMeasure measure);

struct QuarterlyOutcome {
    std::string strategy;
    std::string quarter;   ///< e.g. 2008Q3
    double value = 0.0;
};

std::string quarter_of(const std::string& iso_date);
std::vector<QuarterlyOutcome> quarterly_outcomes(const BacktestLedger& ledger, const std::string& label,
                                                 RealizedMeasure measure);

struct RegressionTerm {
    std::string name;
    double coef = 0.0;
    double t = 0.0;
};

struct RegressionTable {
    std::vector<RegressionTerm> terms;   ///< const, strategy dummies, then quarter dummies
    double r2 = 0.0;
    std::size_t n = 0;
};

/// OLS of the outcome on strategy dummies and quarter dummies with
/// `reference` strategy and the first quarter omitted. |t| is capped at 1e6.
RegressionTable strategy_regression(const std::vector<QuarterlyOutcome>& data, const std::string& reference = "EQW");

} // namespace vineport
