#include "vineport/cli.hpp"

#include "vineport/backtest.hpp"
#include "vineport/config.hpp"
#include "vineport/gof.hpp"
#include "vineport/manifest.hpp"
#include "vineport/panel.hpp"
#include "vineport/parallel.hpp"
#include "vineport/portfolio.hpp"
#include "vineport/risktests.hpp"
#include "vineport/rng.hpp"
#include "vineport/serialize.hpp"
#include "vineport/stats.hpp"
#include "vineport/synthetic.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace vineport::cli {

namespace fs = std::filesystem;

namespace {

std::string f6(double v) { return std::isfinite(v) ? fmt::format("{:.6f}", v) : "NA"; }

struct Context {
    std::string command;
    Config config;
    fs::path out;
    RunManifest manifest;

    std::string path(const std::string& name) const { return (out / name).string(); }

    void output(const std::string& file) { manifest.outputs.emplace_back(file, sha256_file(file)); }

    void input(const std::string& file) {
        if (manifest.input_path.empty()) {
            manifest.input_path = file;
            manifest.input_sha256 = sha256_file(file);
        }
    }

    void finish() {
        manifest.finished = utc_timestamp();
        const std::string name = command + ".manifest.json";
        write_file(path(name), manifest_to_json(manifest));
        std::cout << "wrote " << path(name) << "\n";
    }
};

// Writes a report table with fixed 6-decimal numbers.
class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
    void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }
    std::string csv() const {
        std::ostringstream s;
        auto line = [&](const std::vector<std::string>& r) {
            for (std::size_t i = 0; i < r.size(); ++i) s << (i ? "," : "") << csv::escape(r[i]);
            s << '\n';
        };
        line(header_);
        for (const auto& r : rows_) line(r);
        return s.str();
    }
    void save(Context& ctx, const std::string& name) const {
        const std::string p = ctx.path(name);
        write_file(p, csv());
        ctx.output(p);
        std::cout << csv();
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

ReturnPanel load_panel(Context& ctx) {
    const std::string data = ctx.config.get_string("data");
    if (data.empty()) throw std::invalid_argument("config key 'data' must name the input CSV");
    ReturnPanel p = load_returns(data, load_options(ctx.config));
    ctx.input(data);
    if (p.dropped_rows > 0) std::cerr << "warning: dropped " << p.dropped_rows << " rows with missing cells\n";
    return p;
}

Eigen::MatrixXd load_matrix(Context& ctx, const std::string& file, std::vector<std::string>* header) {
    if (!fs::exists(file)) throw std::runtime_error("missing " + file + " (run the earlier pipeline stage first)");
    ctx.input(file);
    return read_matrix_csv(file, header);
}

std::string load_text(Context& ctx, const std::string& file) {
    if (!fs::exists(file)) throw std::runtime_error("missing " + file + " (run the earlier pipeline stage first)");
    ctx.input(file);
    return read_file(file);
}

void cmd_describe(Context& ctx) {
    const auto panel = load_panel(ctx);
    const double level = ctx.config.get_number("level");
    Table t({"asset", "n", "mean", "sd", "median", "min", "max", "skewness", "excess_kurtosis", "var", "cvar", "jb", "jb_p"});
    for (const auto& s : describe(panel, level))
        t.row({s.asset, std::to_string(panel.rows()), f6(s.mean), f6(s.sd), f6(s.median), f6(s.min), f6(s.max),
               f6(s.skewness), f6(s.excess_kurtosis), f6(s.var), f6(s.cvar), f6(s.jb), f6(s.jb_p)});
    t.save(ctx, "describe.csv");
}

void cmd_fit_marginals(Context& ctx) {
    const auto panel = load_panel(ctx);
    const auto opts = garch_options(ctx.config);
    const auto d = static_cast<std::size_t>(panel.cols());
    std::vector<NamedMarginal> fits(d);
    parallel_for(d, [&](std::size_t j) {
        fits[j].asset = panel.assets[j];
        fits[j].fit = fit_ar_garch(stats::col(panel.returns, static_cast<Eigen::Index>(j)), opts);
    });
    const auto n = static_cast<Eigen::Index>(fits[0].fit.residuals.size());
    Eigen::MatrixXd u(n, static_cast<Eigen::Index>(d));
    Table t({"asset", "mu", "phi", "omega", "alpha", "beta", "skew", "shape", "loglik", "converged"});
    for (std::size_t j = 0; j < d; ++j) {
        const auto p = pit_residuals(fits[j].fit);
        for (Eigen::Index i = 0; i < n; ++i) u(i, static_cast<Eigen::Index>(j)) = p[static_cast<std::size_t>(i)];
        const auto& q = fits[j].fit.params;
        t.row({fits[j].asset, f6(q.mu), f6(q.phi), f6(q.omega), f6(q.alpha), f6(q.beta), f6(q.skewt.skew),
               f6(q.skewt.shape), f6(fits[j].fit.log_likelihood), fits[j].fit.converged ? "1" : "0"});
    }
    write_file(ctx.path("marginals.json"), marginals_to_json(fits));
    ctx.output(ctx.path("marginals.json"));
    write_matrix_csv(ctx.path("pit.csv"), panel.assets, u);
    ctx.output(ctx.path("pit.csv"));
    t.save(ctx, "marginals.csv");
}

void cmd_fit_vine(Context& ctx) {
    std::vector<std::string> header;
    const Eigen::MatrixXd u = load_matrix(ctx, ctx.path("pit.csv"), &header);
    const auto opts = vine_options(ctx.config);
    const VineKind kind = vine_kind_from_name(ctx.config.get_string("vine_kind"));
    VineModel m = fit_vine(u, kind, opts);
    if (ctx.config.get_bool("joint_mle")) m = fit_joint_mle(u, m);
    write_file(ctx.path("vine.json"), vine_model_to_json(m));
    ctx.output(ctx.path("vine.json"));
    Table t({"tree", "edge", "family", "rotation", "par", "par2", "tau"});
    for (int tr = 0; tr + 1 < m.dim(); ++tr) {
        for (int j = 0; j <= m.dim() - 2 - tr; ++j) {
            const auto e = m.structure.edge(tr, j);
            std::string label = header[static_cast<std::size_t>(e.a)] + "," + header[static_cast<std::size_t>(e.b)];
            if (!e.cond.empty()) {
                label += "|";
                for (std::size_t k = 0; k < e.cond.size(); ++k) label += (k ? "," : "") + header[static_cast<std::size_t>(e.cond[k])];
            }
            const auto& s = m.specs[static_cast<std::size_t>(tr)][static_cast<std::size_t>(j)];
            const int np = parameter_count(s.family);
            t.row({std::to_string(tr + 1), label, std::string(family_name(s.family)), std::to_string(s.rotation),
                   np > 0 ? f6(s.params[0]) : "NA", np > 1 ? f6(s.params[1]) : "NA",
                   f6(param_to_tau(s))});
        }
    }
    t.save(ctx, "vine_edges.csv");
    const double n = static_cast<double>(u.rows()), k = m.parameter_count();
    std::cout << "loglik " << f6(m.loglik) << "  aic " << f6(-2 * m.loglik + 2 * k) << "  bic "
              << f6(-2 * m.loglik + std::log(n) * k) << "\n";
}

void cmd_gof(Context& ctx) {
    const Eigen::MatrixXd u = load_matrix(ctx, ctx.path("pit.csv"), nullptr);
    const VineModel m = vine_model_from_json(load_text(ctx, ctx.path("vine.json")));
    GofOptions o = gof_options(ctx.config);
    o.seed = derive_seed(ctx.config.seed(), "gof");
    bool ecp = false, ecp2 = false;
    for (const auto& t : ctx.config.get_strings("gof_tests")) {
        if (t == "ECP") ecp = true;
        else if (t == "ECP2") ecp2 = true;
        else throw std::invalid_argument("config key 'gof_tests': unknown test '" + t + "'");
    }
    std::vector<GofReport> rows;
    if (ecp && ecp2) rows = gof_suite(u, m, o);
    else if (ecp) rows = {ecp_test(u, m, GofStatistic::CvM, o), ecp_test(u, m, GofStatistic::KS, o)};
    else if (ecp2) rows = {ecp2_test(u, m, GofStatistic::CvM, o), ecp2_test(u, m, GofStatistic::KS, o)};
    Table t({"test", "statistic", "value", "p_value", "bootstrap", "reference"});
    for (const auto& r : rows)
        t.row({std::string(gof_test_name(r.test)), std::string(gof_statistic_name(r.statistic)), f6(r.value),
               f6(r.p_value), std::to_string(r.bootstrap), std::to_string(r.reference)});
    t.save(ctx, "gof.csv");
}

void cmd_simulate(Context& ctx) {
    const VineModel m = vine_model_from_json(load_text(ctx, ctx.path("vine.json")));
    const auto marg = marginals_from_json(load_text(ctx, ctx.path("marginals.json")));
    if (static_cast<int>(marg.size()) != m.dim()) throw std::runtime_error("marginals.json does not match vine.json");
    const long long n = ctx.config.get_int("n");
    if (n < 1) throw std::invalid_argument("config key 'n' must be positive");
    const Eigen::MatrixXd u = vine_simulate(m, static_cast<std::size_t>(n), derive_seed(ctx.config.seed(), "simulate"));
    std::vector<MarginalFit> fits;
    std::vector<std::string> names;
    for (const auto& x : marg) {
        fits.push_back(x.fit);
        names.push_back(x.asset);
    }
    write_matrix_csv(ctx.path("simulated_uniforms.csv"), names, u);
    ctx.output(ctx.path("simulated_uniforms.csv"));
    write_matrix_csv(ctx.path("simulated_returns.csv"), names, reconstruct_returns(u, fits));
    ctx.output(ctx.path("simulated_returns.csv"));
    std::cout << "simulated " << n << " draws\n";
}

void cmd_optimize(Context& ctx) {
    const StrategySpec spec = strategy_spec(ctx.config);
    std::string file = ctx.config.get_string("scenarios");
    if (file.empty()) file = ctx.path("simulated_returns.csv");
    std::vector<std::string> names;
    const Eigen::MatrixXd logr = load_matrix(ctx, file, &names);
    const Eigen::MatrixXd scen = 100.0 * ((logr.array() / 100.0).exp() - 1.0);
    const Allocation a = optimize(scen, spec);
    Table t({"asset", "weight"});
    for (std::size_t j = 0; j < names.size(); ++j) t.row({names[j], f6(a.weights(static_cast<Eigen::Index>(j)))});
    t.save(ctx, "weights.csv");
    Table s({"metric", "value"});
    s.row({"strategy", std::string(strategy_name(spec.kind))});
    s.row({"objective", f6(a.objective)});
    s.row({"mean", f6(scen.colwise().mean().dot(a.weights.transpose()))});
    s.row({"sd", f6(std::sqrt(portfolio_variance(scen, a.weights)))});
    s.row({"cvar", f6(portfolio_cvar(scen, a.weights, spec.alpha))});
    s.row({"fallback", a.fallback ? "1" : "0"});
    s.save(ctx, "optimize.csv");
}

void cmd_backtest(Context& ctx) {
    const auto panel = load_panel(ctx);
    const BacktestConfig cfg = backtest_config(ctx.config);
    const BacktestLedger ledger = run_backtest(panel, cfg);
    write_ledger_csv(ledger, ctx.path("ledger.csv"));
    ctx.output(ctx.path("ledger.csv"));
    write_ledger_aux_csv(ledger, ctx.path("ledger_aux.csv"));
    ctx.output(ctx.path("ledger_aux.csv"));
    const PerfReport p = performance_report(ledger, {ctx.config.get_string("period_from"), ctx.config.get_string("period_to")});
    std::size_t flagged = 0;
    for (const auto& r : ledger.rows) flagged += r.flagged;
    Table s({"metric", "value"});
    s.row({"days", std::to_string(p.days)});
    s.row({"mean", f6(p.mean)});
    s.row({"sd", f6(p.sd)});
    s.row({"sr", f6(p.sr)});
    s.row({"cvar", f6(p.cvar)});
    s.row({"starr", f6(p.starr)});
    s.row({"terminal_wealth", f6(p.terminal_wealth)});
    s.row({"terminal_wealth_tc10", f6(p.terminal_wealth_tc)});
    s.row({"avg_turnover", f6(p.avg_turnover)});
    s.row({"flagged_days", std::to_string(flagged)});
    s.save(ctx, "summary.csv");
    const auto h = static_cast<std::size_t>(ctx.config.get_int("rolling_horizon"));
    if (h >= 10 && ledger.rows.size() >= h) {
        auto sr = rolling_realized(ledger, h, RealizedMeasure::SR);
        auto cv = rolling_realized(ledger, h, RealizedMeasure::CVaR);
        auto sd = rolling_realized(ledger, h, RealizedMeasure::StdDev);
        Table r({"date", "sr", "cvar", "sd"});
        for (std::size_t i = 0; i < sr.size(); ++i) r.row({sr[i].first, f6(sr[i].second), f6(cv[i].second), f6(sd[i].second)});
        const std::string p2 = ctx.path("rolling.csv");
        write_file(p2, r.csv());
        ctx.output(p2);
    }
}

HitSequence hits_from_ledger(Context& ctx, bool need_aux) {
    std::string file = ctx.config.get_string("ledger");
    if (file.empty()) file = ctx.path("ledger.csv");
    std::string aux = file;
    if (auto pos = aux.rfind(".csv"); pos != std::string::npos) aux.replace(pos, 4, "_aux.csv");
    if (!fs::exists(file)) throw std::runtime_error("missing " + file + " (run backtest first)");
    ctx.input(file);
    const bool have_aux = fs::exists(aux);
    if (need_aux && !have_aux) throw std::runtime_error("missing " + aux + " (volatility forecasts for the ES tests)");
    const BacktestLedger ledger = read_ledger_csv(file, have_aux ? aux : std::string{});
    const double level = ctx.config.get_number("var_level");
    std::size_t li = ledger.var_levels.size();
    for (std::size_t i = 0; i < ledger.var_levels.size(); ++i)
        if (std::abs(ledger.var_levels[i] - level) < 1e-9) li = i;
    if (li == ledger.var_levels.size())
        throw std::invalid_argument(fmt::format("config key 'var_level': ledger has no VaR column for level {}", level));
    const std::string from = ctx.config.get_string("period_from"), to = ctx.config.get_string("period_to");
    HitSequence h;
    h.p = level;
    for (const auto& r : ledger.rows) {
        if ((!from.empty() && r.date < from) || (!to.empty() && r.date > to)) continue;
        if (!std::isfinite(r.var[li])) continue;
        h.ret.push_back(r.ret);
        h.var.push_back(r.var[li]);
        h.es.push_back(r.es[li]);
        h.sigma.push_back(r.sigma);
    }
    return h;
}

void cmd_var_test(Context& ctx) {
    const HitSequence h = hits_from_ledger(ctx, false);
    const VarTestReport r = var_backtest(h);
    Table t({"T", "NE", "UC", "UC_p", "CC", "CC_p", "DQ", "DQ_p", "AD", "AE", "AQL"});
    t.row({std::to_string(r.T), std::to_string(r.ne), f6(r.uc), f6(r.uc_p), f6(r.cc), f6(r.cc_p), f6(r.dq), f6(r.dq_p),
           f6(r.ad), f6(r.ae), f6(r.aql)});
    t.save(ctx, "var_test.csv");
    if (r.degenerate) std::cerr << "warning: no exceedances or all exceedances; UC uses the limiting form\n";
    if (!r.dq_computable) std::cerr << "warning: DQ design is rank deficient; DQ not computable\n";
}

void cmd_es_test(Context& ctx) {
    const HitSequence h = hits_from_ledger(ctx, true);
    const CalibrationReport c = es_cond_calibration(h);
    std::vector<std::string> er{"NA", "NA", "NA", "NA"};
    try {
        const auto e = es_er_test(h, static_cast<int>(ctx.config.get_int("er_bootstrap")), derive_seed(ctx.config.seed(), "es-test"));
        er = {std::to_string(e.exceedances), f6(e.t), f6(e.p_bootstrap), f6(e.p_asymptotic)};
    } catch (const std::invalid_argument& e) {
        std::cerr << "warning: " << e.what() << "\n";
    }
    Table t({"CC_simple", "CC_simple_p", "CC_general", "CC_general_p", "ER_exceedances", "ER_t", "ER_p_bootstrap",
             "ER_p_asymptotic"});
    t.row({f6(c.simple), f6(c.simple_p), f6(c.general), f6(c.general_p), er[0], er[1], er[2], er[3]});
    t.save(ctx, "es_test.csv");
}

void cmd_regress(Context& ctx) {
    const RealizedMeasure measure = realized_measure_from_name(ctx.config.get_string("regress_measure"));
    std::vector<QuarterlyOutcome> data;
    for (const auto& entry : ctx.config.get_strings("regress_ledgers")) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos || eq == 0) throw std::invalid_argument("config key 'regress_ledgers': entries must be label=path");
        const std::string label = entry.substr(0, eq), file = entry.substr(eq + 1);
        ctx.input(file);
        auto q = quarterly_outcomes(read_ledger_csv(file), label, measure);
        data.insert(data.end(), q.begin(), q.end());
    }
    const auto table = strategy_regression(data, ctx.config.get_string("regress_reference"));
    Table t({"term", "coef", "t"});
    for (const auto& term : table.terms) t.row({term.name, f6(term.coef), f6(term.t)});
    t.row({"r2", f6(table.r2), "NA"});
    t.save(ctx, "regression.csv");
}

void cmd_synth(Context& ctx) {
    const SyntheticSpec s = synthetic_spec(ctx.config);
    const ReturnPanel p = synthetic_panel(s);
    const std::string file = ctx.path("synthetic.csv");
    write_returns_csv(p, file);
    ctx.output(file);
    std::cout << "wrote " << file << " (" << p.rows() << " days, " << p.cols() << " assets)\n";
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"vine copula portfolio toolkit"};
    app.set_version_flag("--version", library_version());
    app.require_subcommand(1);
    std::string config_path;
    std::vector<std::string> overrides;
    struct Cmd {
        const char* name;
        const char* help;
        void (*fn)(Context&);
    };
    const Cmd cmds[] = {
        {"describe", "summary statistics per asset", cmd_describe},
        {"fit-marginals", "AR(1)-GARCH(1,1) skew-t fits and PIT uniforms", cmd_fit_marginals},
        {"fit-vine", "vine copula selection and estimation on the PIT uniforms", cmd_fit_vine},
        {"gof", "empirical copula goodness-of-fit tests", cmd_gof},
        {"simulate", "draw from the fitted vine and map to one-step returns", cmd_simulate},
        {"optimize", "optimize weights on simulated scenarios", cmd_optimize},
        {"backtest", "rolling out-of-sample backtest", cmd_backtest},
        {"var-test", "VaR backtests on a ledger", cmd_var_test},
        {"es-test", "ES backtests on a ledger", cmd_es_test},
        {"regress", "strategy effect regression on quarterly outcomes", cmd_regress},
        {"synth", "write a synthetic return panel", cmd_synth},
    };
    std::vector<std::pair<CLI::App*, const Cmd*>> subs;
    for (const auto& c : cmds) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("-c,--config", config_path, "JSON config file");
        sub->add_option("overrides", overrides, "key=value config overrides");
        subs.emplace_back(sub, &c);
    }
    std::vector<std::string> argv_rev(args.rbegin(), args.rend() - 1);
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    try {
        Context ctx;
        for (auto& [sub, c] : subs) {
            if (!sub->parsed()) continue;
            ctx.command = c->name;
            ctx.manifest.started = utc_timestamp();
            ctx.config = config_path.empty() ? Config{} : Config::from_file(config_path);
            for (const auto& o : overrides) ctx.config.set(o);
            ctx.out = ctx.config.get_string("out_dir");
            fs::create_directories(ctx.out);
            ctx.manifest.command = c->name;
            ctx.manifest.version = library_version();
            ctx.manifest.seed = ctx.config.seed();
            ctx.manifest.config_json = ctx.config.snapshot();
            c->fn(ctx);
            ctx.finish();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int main(int argc, char** argv) { return run(std::vector<std::string>(argv, argv + argc)); }

} // namespace vineport::cli
