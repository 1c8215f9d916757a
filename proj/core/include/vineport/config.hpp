#pragma once

#include "vineport/backtest.hpp"
#include "vineport/gof.hpp"
#include "vineport/panel.hpp"
#include "vineport/synthetic.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace vineport {

enum class ConfigType { String, Number, Integer, Bool, StringList, NumberList };

struct ConfigKey {
    std::string name;
    ConfigType type;
    std::string default_json;
    std::string help;
};

/// Every accepted key with its default.
const std::vector<ConfigKey>& config_schema();

/// Flat JSON object of scalar or list values. Unknown keys and type
/// mismatches are rejected with a message naming the key.
class Config {
public:
    static Config parse(const std::string& text, const std::string& source = "<config>");
    static Config from_file(const std::string& path);

    /// Override from a key=value argument; the value is read as JSON when
    /// it parses, otherwise as a string.
    void set(const std::string& assignment);

    bool is_set(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    double get_number(const std::string& key) const;
    long long get_int(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<std::string> get_strings(const std::string& key) const;
    std::vector<double> get_numbers(const std::string& key) const;
    std::uint64_t seed() const;

    /// All keys with defaults filled in, sorted, as pretty JSON.
    std::string snapshot() const;

private:
    void put(const std::string& key, const std::string& json_text, const std::string& source);
    std::string raw(const std::string& key) const;
    std::map<std::string, std::string> values_;   // key -> canonical JSON
};

LoadOptions load_options(const Config& c);
StrategySpec strategy_spec(const Config& c);
VineFitOptions vine_options(const Config& c);
GarchFitOptions garch_options(const Config& c);
GofOptions gof_options(const Config& c);
BacktestConfig backtest_config(const Config& c);
SyntheticSpec synthetic_spec(const Config& c);

} // namespace vineport
