#include "vineport/backtest.hpp"

#include "vineport/parallel.hpp"
#include "vineport/rng.hpp"
#include "vineport/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

namespace vineport {

std::string_view backtest_method_name(BacktestMethod m) {
    switch (m) {
    case BacktestMethod::Copula: return "copula";
    case BacktestMethod::Historical: return "historical";
    case BacktestMethod::EqualWeight: return "eqw";
    }
    return "?";
}

BacktestMethod backtest_method_from_name(std::string_view name) {
    if (name == "copula") return BacktestMethod::Copula;
    if (name == "historical") return BacktestMethod::Historical;
    if (name == "eqw") return BacktestMethod::EqualWeight;
    throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected copula, historical or eqw)");
}

void validate(const BacktestConfig& c) {
    if (c.window < 250) throw std::invalid_argument("window must be at least 250 days");
    if (c.simulations < 1000) throw std::invalid_argument("simulations must be at least 1000");
    if (c.cadence < 1) throw std::invalid_argument("cadence must be at least 1 day");
    if (!(c.tc_bps >= 0.0) || !std::isfinite(c.tc_bps)) throw std::invalid_argument("tc_bps must be nonnegative");
    if (c.var_levels.empty()) throw std::invalid_argument("var_levels must not be empty");
    for (double l : c.var_levels)
        if (!(l > 0.0 && l < 1.0)) throw std::invalid_argument("var levels must lie in (0, 1)");
    validate(c.strategy);
    if (c.vine.families.empty()) throw std::invalid_argument("family set must not be empty");
}

namespace {

Eigen::MatrixXd simple_returns(const Eigen::MatrixXd& log_pct) {
    return 100.0 * ((log_pct.array() / 100.0).exp() - 1.0);
}

void tail_forecasts(const Eigen::MatrixXd& scenarios, WindowForecast& f, const std::vector<double>& levels) {
    const Eigen::VectorXd port = scenarios * f.weights;
    std::span<const double> p(port.data(), static_cast<std::size_t>(port.size()));
    f.var.clear();
    f.es.clear();
    for (double l : levels) {
        f.var.push_back(-empirical_var(p, l));
        f.es.push_back(-empirical_cvar(p, l));
    }
    f.sigma = stats::stddev(p);
}

std::string level_label(double level) { return fmt::format("{:g}", 100.0 * level); }

std::string num(double v) { return fmt::format("{:.17g}", v); }

} // namespace

WindowForecast run_window(const Eigen::MatrixXd& window, const BacktestConfig& config, std::uint64_t seed,
                          const VineModel* frozen) {
    if (window.rows() < config.window) throw std::invalid_argument("estimation window is shorter than the configured length");
    if (!window.allFinite()) throw std::invalid_argument("estimation window has missing values");
    const auto d = window.cols();
    WindowForecast f;
    if (config.method == BacktestMethod::EqualWeight) {
        f.weights = Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d));
        tail_forecasts(simple_returns(window), f, config.var_levels);
        return f;
    }
    if (config.method == BacktestMethod::Historical) {
        const Eigen::MatrixXd scen = simple_returns(window);
        auto a = optimize(scen, config.strategy);
        f.weights = a.weights;
        f.fallback = a.fallback;
        tail_forecasts(scen, f, config.var_levels);
        return f;
    }

    std::vector<MarginalFit> fits(static_cast<std::size_t>(d));
    parallel_for(static_cast<std::size_t>(d), [&](std::size_t j) {
        auto c = stats::col(window, static_cast<Eigen::Index>(j));
        fits[j] = fit_ar_garch(c, config.garch);
    });
    const auto n = static_cast<Eigen::Index>(fits[0].residuals.size());
    Eigen::MatrixXd u(n, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        auto p = pit_residuals(fits[static_cast<std::size_t>(j)]);
        for (Eigen::Index i = 0; i < n; ++i) u(i, j) = p[static_cast<std::size_t>(i)];
    }
    VineModel model = frozen ? refit_parameters(u, *frozen) : fit_vine(u, config.vine_kind, config.vine);
    if (config.joint_mle) model = fit_joint_mle(u, model);
    const Eigen::MatrixXd sim = vine_simulate(model, static_cast<std::size_t>(config.simulations), derive_seed(seed, "vine-simulate"));
    const Eigen::MatrixXd scen = simple_returns(reconstruct_returns(sim, fits));
    auto a = optimize(scen, config.strategy);
    f.weights = a.weights;
    f.fallback = a.fallback;
    tail_forecasts(scen, f, config.var_levels);
    f.model = std::move(model);
    return f;
}

BacktestLedger run_backtest(const ReturnPanel& panel, const BacktestConfig& config) {
    validate(config);
    const auto T = panel.rows();
    const auto W = static_cast<Eigen::Index>(config.window);
    const auto d = panel.cols();
    if (T <= W) throw std::invalid_argument("panel must be longer than the estimation window");
    if (!panel.returns.allFinite()) throw std::invalid_argument("panel has missing values");

    std::vector<Eigen::Index> days;
    for (Eigen::Index t = W; t < T; t += config.cadence) days.push_back(t);
    std::vector<std::optional<WindowForecast>> forecasts(days.size());
    std::vector<std::string> errors(days.size());
    auto compute = [&](std::size_t k, const VineModel* frozen) {
        const Eigen::Index t = days[k];
        try {
            forecasts[k] = run_window(panel.returns.middleRows(t - W, W), config,
                                      derive_seed(config.seed, "window", static_cast<std::uint64_t>(t)), frozen);
        } catch (const std::exception& e) {
            errors[k] = e.what();
        }
    };
    std::size_t first = 0;
    std::optional<VineModel> frozen;
    if (config.freeze_structure && config.method == BacktestMethod::Copula) {
        for (; first < days.size() && !frozen; ++first) {
            compute(first, nullptr);
            if (forecasts[first] && forecasts[first]->model) frozen = forecasts[first]->model;
        }
    }
    parallel_for(days.size() - first, [&](std::size_t i) { compute(first + i, frozen ? &*frozen : nullptr); });

    BacktestLedger ledger;
    ledger.assets = panel.assets;
    ledger.var_levels = config.var_levels;
    ledger.tc_bps = config.tc_bps;
    const double c = config.tc_bps / 1e4;
    const Eigen::VectorXd eqw = Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d));
    Eigen::VectorXd target = eqw;
    Eigen::VectorXd held;
    std::vector<double> var(config.var_levels.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> es = var;
    double sigma = std::numeric_limits<double>::quiet_NaN();
    double gross = 100.0, net = 100.0;
    std::size_t k = 0;
    for (Eigen::Index t = W; t < T; ++t) {
        LedgerRow row;
        row.date = panel.dates[static_cast<std::size_t>(t)];
        const bool rebalance = k < days.size() && days[k] == t;
        if (rebalance) {
            if (forecasts[k]) {
                target = forecasts[k]->weights;
                var = forecasts[k]->var;
                es = forecasts[k]->es;
                sigma = forecasts[k]->sigma;
                if (forecasts[k]->fallback) row.note = "max-sr fallback to gmv";
            } else {
                row.flagged = true;
                row.note = errors[k];
            }
            ++k;
        }
        row.pre_weights = held.size() ? held : target;
        row.weights = rebalance ? target : row.pre_weights;
        row.rebalanced = rebalance;
        row.turnover = held.size() ? (row.weights - row.pre_weights).cwiseAbs().sum() : 0.0;
        const Eigen::VectorXd asset = (panel.returns.row(t).transpose().array() / 100.0).exp() - 1.0;
        const double r = row.weights.dot(asset);
        row.ret = 100.0 * r;
        gross = gross * (1.0 + row.ret / 100.0);
        net = net * (1.0 + row.ret / 100.0) * (1.0 - c * row.turnover);
        row.wealth_gross = gross;
        row.wealth_net = net;
        row.var = var;
        row.es = es;
        row.sigma = sigma;
        held = (row.weights.array() * (1.0 + asset.array())).matrix() / (1.0 + r);
        ledger.rows.push_back(std::move(row));
    }
    return ledger;
}

void write_ledger_csv(const BacktestLedger& ledger, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    const std::size_t d = ledger.assets.size();
    out << "date";
    for (std::size_t j = 0; j < d; ++j) out << ",w" << j + 1;
    out << ",ret,turnover,wealth_gross,wealth_net";
    for (double l : ledger.var_levels) out << ",var_" << level_label(l) << ",es_" << level_label(l);
    out << '\n';
    for (const auto& r : ledger.rows) {
        out << r.date;
        for (Eigen::Index j = 0; j < r.weights.size(); ++j) out << ',' << num(r.weights(j));
        out << ',' << num(r.ret) << ',' << num(r.turnover) << ',' << num(r.wealth_gross) << ',' << num(r.wealth_net);
        for (std::size_t l = 0; l < r.var.size(); ++l) out << ',' << num(r.var[l]) << ',' << num(r.es[l]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

void write_ledger_aux_csv(const BacktestLedger& ledger, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "date";
    for (std::size_t j = 0; j < ledger.assets.size(); ++j) out << ",pre_w" << j + 1;
    out << ",sigma,rebalanced,flagged,note\n";
    for (const auto& r : ledger.rows) {
        out << r.date;
        for (Eigen::Index j = 0; j < r.pre_weights.size(); ++j) out << ',' << num(r.pre_weights(j));
        out << ',' << num(r.sigma) << ',' << (r.rebalanced ? 1 : 0) << ',' << (r.flagged ? 1 : 0) << ','
            << csv::escape(r.note) << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

namespace {

double parse_cell(const std::string& s, const std::string& path, int line) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
        throw std::runtime_error(fmt::format("{}:{}: unparseable value '{}'", path, line, s));
    }
}

} // namespace

BacktestLedger read_ledger_csv(const std::string& path, const std::string& aux_path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string rec;
    int line = 0;
    if (!csv::read_record(in, rec, line)) throw std::runtime_error(path + ": empty ledger");
    const auto header = csv::split(rec);
    auto ret_at = std::find(header.begin(), header.end(), "ret");
    if (header.empty() || header[0] != "date" || ret_at == header.end() || header.end() - ret_at < 4)
        throw std::runtime_error(path + ": not a ledger file");
    const std::size_t d = static_cast<std::size_t>(ret_at - header.begin() - 1);
    BacktestLedger ledger;
    for (std::size_t j = 0; j < d; ++j) ledger.assets.push_back(header[j + 1]);
    for (auto it = ret_at + 4; it < header.end(); it += 2) {
        if (it + 1 == header.end() || it->rfind("var_", 0) != 0) throw std::runtime_error(path + ": unexpected column " + *it);
        ledger.var_levels.push_back(std::stod(it->substr(4)) / 100.0);
    }
    while (csv::read_record(in, rec, line)) {
        if (rec.empty()) continue;
        auto cells = csv::split(rec);
        if (cells.size() != header.size()) throw std::runtime_error(fmt::format("{}:{}: wrong field count", path, line));
        LedgerRow r;
        r.date = cells[0];
        r.weights.resize(static_cast<Eigen::Index>(d));
        for (std::size_t j = 0; j < d; ++j) r.weights(static_cast<Eigen::Index>(j)) = parse_cell(cells[j + 1], path, line);
        r.ret = parse_cell(cells[d + 1], path, line);
        r.turnover = parse_cell(cells[d + 2], path, line);
        r.wealth_gross = parse_cell(cells[d + 3], path, line);
        r.wealth_net = parse_cell(cells[d + 4], path, line);
        for (std::size_t l = 0; l < ledger.var_levels.size(); ++l) {
            r.var.push_back(parse_cell(cells[d + 5 + 2 * l], path, line));
            r.es.push_back(parse_cell(cells[d + 6 + 2 * l], path, line));
        }
        r.pre_weights = r.weights;
        r.sigma = std::numeric_limits<double>::quiet_NaN();
        ledger.rows.push_back(std::move(r));
    }
    if (!aux_path.empty()) {
        std::ifstream ax(aux_path);
        if (!ax) throw std::runtime_error("cannot open " + aux_path);
        line = 0;
        csv::read_record(ax, rec, line);
        std::size_t i = 0;
        while (csv::read_record(ax, rec, line)) {
            if (rec.empty()) continue;
            auto cells = csv::split(rec);
            if (cells.size() != d + 5 || i >= ledger.rows.size() || cells[0] != ledger.rows[i].date)
                throw std::runtime_error(fmt::format("{}:{}: does not match the ledger", aux_path, line));
            auto& r = ledger.rows[i++];
            for (std::size_t j = 0; j < d; ++j) r.pre_weights(static_cast<Eigen::Index>(j)) = parse_cell(cells[j + 1], aux_path, line);
            r.sigma = parse_cell(cells[d + 1], aux_path, line);
            r.rebalanced = cells[d + 2] == "1";
            r.flagged = cells[d + 3] == "1";
            r.note = cells[d + 4];
        }
        if (i != ledger.rows.size()) throw std::runtime_error(aux_path + ": row count does not match the ledger");
    }
    return ledger;
}

std::vector<double> net_returns(const BacktestLedger& ledger) {
    std::vector<double> out;
    out.reserve(ledger.rows.size());
    double prev = 100.0;
    for (const auto& r : ledger.rows) {
        out.push_back(100.0 * (r.wealth_net / prev - 1.0));
        prev = r.wealth_net;
    }
    return out;
}

double realized_measure(std::span<const double> x, RealizedMeasure m) {
    switch (m) {
    case RealizedMeasure::Mean: return stats::mean(x);
    case RealizedMeasure::StdDev: return x.size() > 1 ? stats::stddev(x) : 0.0;
    case RealizedMeasure::SR: return stats::mean(x) / stats::stddev(x);
    case RealizedMeasure::CVaR: return empirical_cvar(x, 0.10);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

RealizedMeasure realized_measure_from_name(std::string_view name) {
    if (name == "sr") return RealizedMeasure::SR;
    if (name == "cvar") return RealizedMeasure::CVaR;
    if (name == "sd") return RealizedMeasure::StdDev;
    if (name == "mean") return RealizedMeasure::Mean;
    throw std::invalid_argument("unknown measure '" + std::string(name) + "' (expected sr, cvar, sd or mean)");
}

std::string_view realized_measure_name(RealizedMeasure m) {
    switch (m) {
    case RealizedMeasure::SR: return "sr";
    case RealizedMeasure::CVaR: return "cvar";
    case RealizedMeasure::StdDev: return "sd";
    case RealizedMeasure::Mean: return "mean";
    }
    return "?";
}

PerfReport performance_report(const BacktestLedger& ledger, const PeriodFilter& filter) {
    const auto all = net_returns(ledger);
    std::vector<double> net;
    PerfReport p;
    double w0 = 100.0, w10 = 100.0, turnover = 0.0;
    for (std::size_t i = 0; i < ledger.rows.size(); ++i) {
        const auto& r = ledger.rows[i];
        if (!filter.from.empty() && r.date < filter.from) continue;
        if (!filter.to.empty() && r.date > filter.to) continue;
        net.push_back(all[i]);
        w0 *= 1.0 + r.ret / 100.0;
        w10 *= (1.0 + r.ret / 100.0) * (1.0 - 0.001 * r.turnover);
        turnover += r.turnover;
    }
    if (net.empty()) throw std::invalid_argument("performance report: no ledger rows in the period");
    p.days = net.size();
    p.mean = stats::mean(net);
    p.sd = net.size() > 1 ? stats::stddev(net) : 0.0;
    p.sr = p.sd > 0.0 ? p.mean / p.sd : std::numeric_limits<double>::quiet_NaN();
    p.cvar = net.size() >= 10 ? empirical_cvar(net, 0.10) : std::numeric_limits<double>::quiet_NaN();
    p.starr = p.cvar > 0.0 ? p.mean / p.cvar : std::numeric_limits<double>::quiet_NaN();
    p.terminal_wealth = w0;
    p.terminal_wealth_tc = w10;
    p.avg_turnover = turnover / static_cast<double>(net.size());
    return p;
}

std::vector<std::pair<std::string, double>> rolling_realized(const BacktestLedger& ledger, std::size_t horizon,
                                                             RealizedMeasure measure) {
    if (horizon < 2) throw std::invalid_argument("rolling horizon must be at least 2");
    if (ledger.rows.size() < horizon) throw std::invalid_argument("ledger is shorter than the rolling horizon");
    const auto net = net_returns(ledger);
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t end = horizon; end <= net.size(); ++end) {
        std::span<const double> w(net.data() + end - horizon, horizon);
        out.emplace_back(ledger.rows[end - 1].date, realized_measure(w, measure));
    }
    return out;
}

std::string quarter_of(const std::string& iso_date) {
    if (iso_date.size() < 7) throw std::invalid_argument("bad date " + iso_date);
    const int month = std::stoi(iso_date.substr(5, 2));
    return iso_date.substr(0, 4) + "Q" + std::to_string((month - 1) / 3 + 1);
}

std::vector<QuarterlyOutcome> quarterly_outcomes(const BacktestLedger& ledger, const std::string& label,
                                                 RealizedMeasure measure) {
    const auto net = net_returns(ledger);
    std::vector<QuarterlyOutcome> out;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= net.size(); ++i) {
        if (i < net.size() && quarter_of(ledger.rows[i].date) == quarter_of(ledger.rows[start].date)) continue;
        std::span<const double> q(net.data() + start, i - start);
        out.push_back({label, quarter_of(ledger.rows[start].date), realized_measure(q, measure)});
        start = i;
    }
    return out;
}

RegressionTable strategy_regression(const std::vector<QuarterlyOutcome>& data, const std::string& reference) {
    std::set<std::string> strategy_set, quarter_set;
    for (const auto& o : data) {
        strategy_set.insert(o.strategy);
        quarter_set.insert(o.quarter);
    }
    if (!strategy_set.count(reference)) throw std::invalid_argument("reference strategy '" + reference + "' is missing");
    if (strategy_set.size() < 2 || quarter_set.size() < 2)
        throw std::invalid_argument("regression needs at least 2 strategies and 2 quarters");
    std::vector<std::string> strategies{reference};
    for (const auto& s : strategy_set)
        if (s != reference) strategies.push_back(s);
    std::vector<std::string> quarters(quarter_set.begin(), quarter_set.end());
    std::map<std::string, Eigen::Index> sidx, qidx;
    for (std::size_t i = 0; i < strategies.size(); ++i) sidx[strategies[i]] = static_cast<Eigen::Index>(i);
    for (std::size_t i = 0; i < quarters.size(); ++i) qidx[quarters[i]] = static_cast<Eigen::Index>(i);

    const auto n = static_cast<Eigen::Index>(data.size());
    const auto ns = static_cast<Eigen::Index>(strategies.size()), nq = static_cast<Eigen::Index>(quarters.size());
    const Eigen::Index k = 1 + (ns - 1) + (nq - 1);
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, k);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& o = data[static_cast<std::size_t>(i)];
        X(i, 0) = 1.0;
        if (auto s = sidx[o.strategy]; s > 0) X(i, s) = 1.0;
        if (auto q = qidx[o.quarter]; q > 0) X(i, ns - 1 + q) = 1.0;
        y(i) = o.value;
    }
    if (n <= k) throw std::invalid_argument("regression has no residual degrees of freedom");
    stats::OlsResult fit;
    try {
        fit = stats::ols(X, y);
    } catch (const std::runtime_error&) {
        throw std::runtime_error("strategy regression: dummies are collinear");
    }
    RegressionTable out;
    out.n = static_cast<std::size_t>(n);
    out.r2 = fit.r2;
    constexpr double cap = 1e6;
    for (Eigen::Index j = 0; j < k; ++j) {
        RegressionTerm t;
        t.name = j == 0 ? "const" : j < ns ? strategies[static_cast<std::size_t>(j)] : "quarter:" + quarters[static_cast<std::size_t>(j - ns + 1)];
        t.coef = fit.coef(j);
        const double se = fit.stderr_(j);
        const double tol = 1e-12 * std::max(1.0, y.cwiseAbs().maxCoeff());
        if (std::abs(t.coef) <= tol) t.t = 0.0;
        else if (!(se > 0.0) || std::abs(t.coef / se) > cap) t.t = std::copysign(cap, t.coef);
        else t.t = t.coef / se;
        out.terms.push_back(t);
    }
    return out;
}

} // namespace vineport
