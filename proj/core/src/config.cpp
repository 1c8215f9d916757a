#include "vineport/config.hpp"

#include "vineport/serialize.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vineport {

using nlohmann::json;

const std::vector<ConfigKey>& config_schema() {
    using T = ConfigType;
    static const std::vector<ConfigKey> keys = {
        {"data", T::String, "\"\"", "input CSV of returns or prices"},
        {"prices", T::Bool, "false", "input holds price levels; convert to 100 ln(P_t/P_{t-1})"},
        {"units", T::String, "\"\"", "percent or decimal; empty uses the file's '# units=' line, then percent"},
        {"out_dir", T::String, "\"out\"", "directory for all outputs"},
        {"seed", T::Integer, "1", "root seed; every stage derives its own stream from it"},
        {"level", T::Number, "0.1", "VaR/CVaR level used by describe"},
        {"garch_max_evals", T::Integer, "20000", "Nelder-Mead evaluation budget per GARCH fit"},
        {"garch_restarts", T::Integer, "4", "Nelder-Mead restarts per GARCH fit"},
        {"vine_kind", T::String, "\"rvine\"", "rvine, cvine or dvine"},
        {"families", T::StringList,
         "[\"gaussian\",\"t\",\"clayton\",\"gumbel\",\"frank\",\"joe\",\"bb1\",\"bb6\",\"bb7\",\"bb8\"]",
         "candidate pair-copula families (independence is always a candidate)"},
        {"independence_test", T::Bool, "true", "pre-test each edge for independence"},
        {"independence_level", T::Number, "0.05", "level of the independence pre-test"},
        {"rotation_by_tau_sign", T::Bool, "true", "only try rotations matching the sign of Kendall's tau"},
        {"dependence", T::String, "\"kendall\"", "edge weight for structure selection: kendall or pearson"},
        {"joint_mle", T::Bool, "false", "refine the sequential fit by joint maximum likelihood"},
        {"gof_tests", T::StringList, "[\"ECP\",\"ECP2\"]", "goodness-of-fit tests to run"},
        {"gof_bootstrap", T::Integer, "200", "bootstrap replications B (at least 100)"},
        {"gof_reference", T::Integer, "100000", "model draws M used to evaluate the fitted copula (at least 1000)"},
        {"n", T::Integer, "1000", "draws written by simulate"},
        {"strategy", T::String, "\"cvar\"", "sr, cvar or gmv"},
        {"alpha", T::Number, "0.1", "CVaR tail probability used by the min-CVaR optimizer"},
        {"risk_free", T::Number, "0", "per-period risk-free rate in percent"},
        {"scenarios", T::String, "\"\"", "scenario CSV for optimize; empty uses out_dir/simulated_returns.csv"},
        {"window", T::Integer, "500", "estimation window length in days (at least 250)"},
        {"simulations", T::Integer, "10000", "simulated scenarios per window (at least 1000)"},
        {"method", T::String, "\"copula\"", "copula, historical or eqw"},
        {"tc_bps", T::Number, "10", "proportional transaction cost in basis points"},
        {"cadence", T::Integer, "1", "days between rebalances"},
        {"freeze_structure", T::Bool, "false", "select the vine on the first window only, then refit parameters"},
        {"var_levels", T::NumberList, "[0.01]", "VaR/ES forecast levels recorded in the ledger"},
        {"period_from", T::String, "\"\"", "first date (inclusive) of the reporting period"},
        {"period_to", T::String, "\"\"", "last date (inclusive) of the reporting period"},
        {"rolling_horizon", T::Integer, "500", "holding period for rolling realized measures"},
        {"ledger", T::String, "\"\"", "ledger CSV for var-test and es-test; empty uses out_dir/ledger.csv"},
        {"var_level", T::Number, "0.01", "which ledger VaR/ES level the tests evaluate"},
        {"er_bootstrap", T::Integer, "5000", "bootstrap replications for the exceedance residual test"},
        {"regress_ledgers", T::StringList, "[]", "label=path entries; one ledger per strategy"},
        {"regress_measure", T::String, "\"sr\"", "quarterly outcome: sr, cvar, sd or mean"},
        {"regress_reference", T::String, "\"EQW\"", "label of the reference strategy"},
        {"synth_assets", T::Integer, "4", "synth: number of assets"},
        {"synth_days", T::Integer, "600", "synth: number of days"},
        {"synth_family", T::String, "\"clayton\"", "synth: pair-copula family"},
        {"synth_tau", T::Number, "0.4", "synth: Kendall's tau of the first tree"},
        {"synth_start", T::String, "\"2010-01-04\"", "synth: first date"},
    };
    return keys;
}

namespace {

const ConfigKey& find_key(const std::string& key) {
    const auto& s = config_schema();
    auto it = std::find_if(s.begin(), s.end(), [&](const ConfigKey& k) { return k.name == key; });
    if (it == s.end()) throw std::invalid_argument("unknown config key '" + key + "'");
    return *it;
}

bool integral(const json& v) {
    if (v.is_number_integer()) return true;
    return v.is_number_float() && std::isfinite(v.get<double>()) && std::floor(v.get<double>()) == v.get<double>();
}

void check_type(const ConfigKey& k, const json& v) {
    bool ok = false;
    std::string want;
    switch (k.type) {
    case ConfigType::String: ok = v.is_string(); want = "a string"; break;
    case ConfigType::Number: ok = v.is_number(); want = "a number"; break;
    case ConfigType::Integer: ok = v.is_number() && integral(v); want = "an integer"; break;
    case ConfigType::Bool: ok = v.is_boolean(); want = "true or false"; break;
    case ConfigType::StringList:
        ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); });
        want = "a list of strings";
        break;
    case ConfigType::NumberList:
        ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
        want = "a list of numbers";
        break;
    }
    if (!ok) throw std::invalid_argument("config key '" + k.name + "' must be " + want);
}

template <class F>
auto keyed(const std::string& key, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw std::invalid_argument("config key '" + key + "': " + e.what());
    }
}

} // namespace

Config Config::parse(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(source + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument(source + ": config must be a JSON object");
    Config c;
    for (auto it = j.begin(); it != j.end(); ++it) c.put(it.key(), it.value().dump(), source);
    return c;
}

Config Config::from_file(const std::string& path) { return parse(read_file(path), path); }

void Config::put(const std::string& key, const std::string& json_text, const std::string& source) {
    const ConfigKey& k = [&]() -> const ConfigKey& {
        try {
            return find_key(key);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(source + ": " + e.what());
        }
    }();
    const json v = json::parse(json_text);
    check_type(k, v);
    values_[key] = v.dump();
}

void Config::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("override '" + assignment + "' must be key=value");
    const std::string key = assignment.substr(0, eq), value = assignment.substr(eq + 1);
    const ConfigKey& k = find_key(key);
    json v;
    try {
        v = json::parse(value);
    } catch (const json::exception&) {
        v = value;
    }
    if (k.type == ConfigType::String && !v.is_string()) v = value;
    if (k.type == ConfigType::StringList && v.is_string()) v = json::array({v});
    if (k.type == ConfigType::NumberList && v.is_number()) v = json::array({v});
    put(key, v.dump(), "override");
}

bool Config::is_set(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::raw(const std::string& key) const {
    const ConfigKey& k = find_key(key);
    auto it = values_.find(key);
    return it == values_.end() ? k.default_json : it->second;
}

std::string Config::get_string(const std::string& key) const { return json::parse(raw(key)).get<std::string>(); }
double Config::get_number(const std::string& key) const { return json::parse(raw(key)).get<double>(); }
long long Config::get_int(const std::string& key) const {
    const json v = json::parse(raw(key));
    return v.is_number_integer() ? v.get<long long>() : static_cast<long long>(v.get<double>());
}
bool Config::get_bool(const std::string& key) const { return json::parse(raw(key)).get<bool>(); }
std::vector<std::string> Config::get_strings(const std::string& key) const {
    return json::parse(raw(key)).get<std::vector<std::string>>();
}
std::vector<double> Config::get_numbers(const std::string& key) const {
    return json::parse(raw(key)).get<std::vector<double>>();
}

std::uint64_t Config::seed() const {
    const json v = json::parse(raw("seed"));
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    const long long s = get_int("seed");
    if (s < 0) throw std::invalid_argument("config key 'seed' must be nonnegative");
    return static_cast<std::uint64_t>(s);
}

std::string Config::snapshot() const {
    json j = json::object();
    for (const auto& k : config_schema()) j[k.name] = json::parse(raw(k.name));
    return j.dump(2);
}

LoadOptions load_options(const Config& c) {
    LoadOptions o;
    if (c.is_set("prices")) o.prices = c.get_bool("prices");
    const std::string u = c.get_string("units");
    if (u == "percent") o.units = ReturnUnit::Percent;
    else if (u == "decimal") o.units = ReturnUnit::Decimal;
    else if (!u.empty()) throw std::invalid_argument("config key 'units' must be percent or decimal");
    return o;
}

StrategySpec strategy_spec(const Config& c) {
    StrategySpec s;
    s.kind = keyed("strategy", [&] { return strategy_from_name(c.get_string("strategy")); });
    s.alpha = c.get_number("alpha");
    s.risk_free = c.get_number("risk_free");
    keyed("alpha", [&] { validate(s); return 0; });
    return s;
}

VineFitOptions vine_options(const Config& c) {
    VineFitOptions o;
    o.families.clear();
    for (const auto& name : c.get_strings("families")) {
        auto f = family_from_name(name);
        if (!f) throw std::invalid_argument("config key 'families': unknown family '" + name + "'");
        if (*f != Family::Independence && std::find(o.families.begin(), o.families.end(), *f) == o.families.end())
            o.families.push_back(*f);
    }
    o.independence_test = c.get_bool("independence_test");
    o.independence_level = c.get_number("independence_level");
    if (!(o.independence_level > 0.0 && o.independence_level < 1.0))
        throw std::invalid_argument("config key 'independence_level' must lie in (0, 1)");
    o.rotation_by_tau_sign = c.get_bool("rotation_by_tau_sign");
    const std::string dep = c.get_string("dependence");
    if (dep == "kendall") o.measure = DependenceMeasure::Kendall;
    else if (dep == "pearson") o.measure = DependenceMeasure::Pearson;
    else throw std::invalid_argument("config key 'dependence' must be kendall or pearson");
    return o;
}

GarchFitOptions garch_options(const Config& c) {
    GarchFitOptions o;
    o.max_evals = static_cast<int>(c.get_int("garch_max_evals"));
    o.max_restarts = static_cast<int>(c.get_int("garch_restarts"));
    if (o.max_evals < 100) throw std::invalid_argument("config key 'garch_max_evals' must be at least 100");
    if (o.max_restarts < 0) throw std::invalid_argument("config key 'garch_restarts' must be nonnegative");
    return o;
}

GofOptions gof_options(const Config& c) {
    GofOptions o;
    o.bootstrap = static_cast<int>(c.get_int("gof_bootstrap"));
    const long long m = c.get_int("gof_reference");
    if (o.bootstrap < 100) throw std::invalid_argument("config key 'gof_bootstrap' must be at least 100");
    if (m < 1000) throw std::invalid_argument("config key 'gof_reference' must be at least 1000");
    o.reference = static_cast<std::size_t>(m);
    o.seed = c.seed();
    return o;
}

BacktestConfig backtest_config(const Config& c) {
    BacktestConfig b;
    b.window = static_cast<int>(c.get_int("window"));
    b.simulations = static_cast<int>(c.get_int("simulations"));
    b.strategy = strategy_spec(c);
    b.method = keyed("method", [&] { return backtest_method_from_name(c.get_string("method")); });
    b.vine_kind = keyed("vine_kind", [&] { return vine_kind_from_name(c.get_string("vine_kind")); });
    b.vine = vine_options(c);
    b.joint_mle = c.get_bool("joint_mle");
    b.freeze_structure = c.get_bool("freeze_structure");
    b.tc_bps = c.get_number("tc_bps");
    b.cadence = static_cast<int>(c.get_int("cadence"));
    b.var_levels = c.get_numbers("var_levels");
    b.seed = c.seed();
    b.garch = garch_options(c);
    if (b.window < 250) throw std::invalid_argument("config key 'window' must be at least 250");
    if (b.simulations < 1000) throw std::invalid_argument("config key 'simulations' must be at least 1000");
    if (b.cadence < 1) throw std::invalid_argument("config key 'cadence' must be at least 1");
    if (!(b.tc_bps >= 0.0)) throw std::invalid_argument("config key 'tc_bps' must be nonnegative");
    keyed("var_levels", [&] { validate(b); return 0; });
    return b;
}

SyntheticSpec synthetic_spec(const Config& c) {
    SyntheticSpec s;
    s.assets = static_cast<int>(c.get_int("synth_assets"));
    s.days = static_cast<int>(c.get_int("synth_days"));
    const auto name = c.get_string("synth_family");
    auto f = family_from_name(name);
    if (!f) throw std::invalid_argument("config key 'synth_family': unknown family '" + name + "'");
    s.family = *f;
    s.tau = c.get_number("synth_tau");
    s.start_date = c.get_string("synth_start");
    s.seed = c.seed();
    keyed("synth_assets", [&] { validate(s); return 0; });
    if (s.family != Family::Independence)
        keyed("synth_tau", [&] { return tau_to_param(s.family, 0, s.tau); });
    return s;
}

} // namespace vineport
