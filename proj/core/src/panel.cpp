#include "vineport/panel.hpp"

#include "vineport/portfolio.hpp"
#include "vineport/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace vineport {

namespace csv {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string s = "\"";
    for (char c : field) {
        if (c == '"') s += '"';
        s += c;
    }
    return s + "\"";
}

bool read_record(std::istream& in, std::string& record, int& line_no) {
    record.clear();
    std::string line;
    bool open = false;
    bool any = false;
    while (std::getline(in, line)) {
        ++line_no;
        any = true;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (open) record += '\n';
        record += line;
        for (char c : line)
            if (c == '"') open = !open;
        if (!open) return true;
    }
    if (open) throw std::runtime_error(fmt::format("line {}: unterminated quoted field", line_no));
    return any;
}

} // namespace csv

namespace {

std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c); };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

bool is_missing(const std::string& s) {
    std::string l = s;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    return l.empty() || l == "na" || l == "nan" || l == "null";
}

bool parse_number(const std::string& s, double& v) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (b != e && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    return ec == std::errc() && p == e && std::isfinite(v);
}

bool iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    const int m = std::stoi(s.substr(5, 2)), d = std::stoi(s.substr(8, 2));
    return m >= 1 && m <= 12 && d >= 1 && d <= 31;
}

} // namespace

ReturnPanel ReturnPanel::slice(Eigen::Index begin, Eigen::Index count) const {
    if (begin < 0 || count < 0 || begin + count > rows()) throw std::out_of_range("panel slice out of range");
    ReturnPanel p;
    p.dates.assign(dates.begin() + begin, dates.begin() + begin + count);
    p.assets = assets;
    p.returns = returns.middleRows(begin, count);
    return p;
}

ReturnPanel parse_returns(std::istream& in, const LoadOptions& opts, const std::string& source) {
    bool prices = false;
    ReturnUnit units = ReturnUnit::Percent;
    std::string record;
    int line_no = 0;
    std::vector<std::string> header;
    while (csv::read_record(in, record, line_no)) {
        const std::string t = trim(record);
        if (t.empty()) continue;
        if (t[0] == '#') {
            std::string body = trim(t.substr(1));
            auto eq = body.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = trim(body.substr(0, eq)), value = trim(body.substr(eq + 1));
            if (key == "units") {
                if (value == "percent") units = ReturnUnit::Percent;
                else if (value == "decimal") units = ReturnUnit::Decimal;
                else throw std::runtime_error(fmt::format("{}:{}: units must be percent or decimal", source, line_no));
            } else if (key == "kind") {
                if (value == "prices") prices = true;
                else if (value == "returns") prices = false;
                else throw std::runtime_error(fmt::format("{}:{}: kind must be returns or prices", source, line_no));
            }
            continue;
        }
        header = csv::split(record);
        break;
    }
    if (header.empty()) throw std::runtime_error(source + ": missing header row");
    if (opts.prices) prices = *opts.prices;
    if (opts.units) units = *opts.units;
    for (auto& h : header) h = trim(h);
    if (header.size() < 3) throw std::runtime_error(source + ": need a date column and at least 2 assets");
    ReturnPanel panel;
    panel.assets.assign(header.begin() + 1, header.end());
    const std::size_t d = panel.assets.size();

    std::vector<std::vector<double>> rows;
    while (csv::read_record(in, record, line_no)) {
        if (trim(record).empty()) continue;
        auto cells = csv::split(record);
        if (cells.size() != d + 1)
            throw std::runtime_error(fmt::format("{}:{}: expected {} fields, found {}", source, line_no, d + 1, cells.size()));
        const std::string date = trim(cells[0]);
        if (!iso_date(date)) throw std::runtime_error(fmt::format("{}:{}: unparseable date '{}'", source, line_no, date));
        std::vector<double> v(d);
        bool missing = false;
        for (std::size_t j = 0; j < d; ++j) {
            const std::string c = trim(cells[j + 1]);
            if (is_missing(c)) {
                missing = true;
                continue;
            }
            if (!parse_number(c, v[j]))
                throw std::runtime_error(fmt::format("{}:{}: unparseable value '{}'", source, line_no, c));
            if (prices && !(v[j] > 0.0))
                throw std::runtime_error(fmt::format("{}:{}: prices must be positive", source, line_no));
        }
        if (!panel.dates.empty() && date <= panel.dates.back()) {
            if (date == panel.dates.back()) throw std::runtime_error(fmt::format("{}:{}: duplicate date {}", source, line_no, date));
            throw std::runtime_error(fmt::format("{}:{}: date {} is not after {}", source, line_no, date, panel.dates.back()));
        }
        if (missing) {
            ++panel.dropped_rows;
            continue;
        }
        panel.dates.push_back(date);
        rows.push_back(std::move(v));
    }

    const double scale = units == ReturnUnit::Decimal ? 100.0 : 1.0;
    if (prices) {
        if (rows.size() < 2) throw std::runtime_error(source + ": need at least two price rows");
        panel.returns.resize(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(d));
        for (std::size_t i = 1; i < rows.size(); ++i)
            for (std::size_t j = 0; j < d; ++j)
                panel.returns(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) = 100.0 * std::log(rows[i][j] / rows[i - 1][j]);
        panel.dates.erase(panel.dates.begin());
    } else {
        if (rows.empty()) throw std::runtime_error(source + ": no complete data rows");
        panel.returns.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (std::size_t j = 0; j < d; ++j)
                panel.returns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = scale * rows[i][j];
    }
    return panel;
}

ReturnPanel load_returns(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return parse_returns(in, opts, path);
}

void write_returns_csv(const ReturnPanel& panel, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "# units=percent\ndate";
    for (const auto& a : panel.assets) out << ',' << csv::escape(a);
    out << '\n';
    for (Eigen::Index i = 0; i < panel.rows(); ++i) {
        out << panel.dates[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < panel.cols(); ++j) out << fmt::format(",{:.10f}", panel.returns(i, j));
        out << '\n';
    }
    if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<AssetSummary> describe(const ReturnPanel& panel, double level) {
    if (panel.rows() < 1) throw std::invalid_argument("describe: empty panel");
    std::vector<AssetSummary> out;
    for (Eigen::Index j = 0; j < panel.cols(); ++j) {
        auto x = stats::col(panel.returns, j);
        AssetSummary s;
        s.asset = panel.assets[static_cast<std::size_t>(j)];
        s.mean = stats::mean(x);
        s.sd = x.size() > 1 ? stats::stddev(x) : 0.0;
        s.median = stats::median(x);
        s.min = *std::min_element(x.begin(), x.end());
        s.max = *std::max_element(x.begin(), x.end());
        if (s.min == s.max) {
            s.mean = s.median = s.min;
            s.sd = 0.0;
        }
        s.var = empirical_var(x, level);
        s.cvar = empirical_cvar(x, level);
        if (s.sd > 0.0 && x.size() > 3) {
            s.skewness = stats::skewness(x);
            s.excess_kurtosis = stats::excess_kurtosis(x);
            const double n = static_cast<double>(x.size());
            s.jb = n / 6.0 * (s.skewness * s.skewness + 0.25 * s.excess_kurtosis * s.excess_kurtosis);
            s.jb_p = stats::chi2_sf(s.jb, 2.0);
        } else {
            s.skewness = s.excess_kurtosis = std::numeric_limits<double>::quiet_NaN();
            s.jb = s.jb_p = std::numeric_limits<double>::quiet_NaN();
            s.jb_computable = false;
        }
        out.push_back(s);
    }
    return out;
}

} // namespace vineport
