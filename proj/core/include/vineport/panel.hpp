#pragma once

#include <Eigen/Dense>

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace vineport {

/// Daily log returns in percent, one column per asset.
struct ReturnPanel {
    std::vector<std::string> dates;   ///< ISO YYYY-MM-DD, strictly increasing
    std::vector<std::string> assets;
    Eigen::MatrixXd returns;
    int dropped_rows = 0;             ///< rows removed for missing cells

    Eigen::Index rows() const { return returns.rows(); }
    Eigen::Index cols() const { return returns.cols(); }
    ReturnPanel slice(Eigen::Index begin, Eigen::Index count) const;
};

enum class ReturnUnit { Percent, Decimal };

struct LoadOptions {
    /// Input holds price levels; returns become 100 ln(P_t / P_{t-1}).
    std::optional<bool> prices;
    /// Unit of return input. Defaults to the "# units=" header line, then percent.
    std::optional<ReturnUnit> units;
};

/// CSV with a header row (date column, then asset labels). Leading lines
/// starting with '#' carry metadata as key=value: units=percent|decimal and
/// kind=returns|prices. Empty or NA cells drop the row.
ReturnPanel load_returns(const std::string& path, const LoadOptions& opts = {});
ReturnPanel parse_returns(std::istream& in, const LoadOptions& opts = {}, const std::string& source = "<input>");

void write_returns_csv(const ReturnPanel& panel, const std::string& path);

struct AssetSummary {
    std::string asset;
    double mean = 0, sd = 0, median = 0, min = 0, max = 0;
    double skewness = 0, excess_kurtosis = 0;
    double var = 0, cvar = 0;     ///< positive loss magnitudes
    double jb = 0, jb_p = 0;      ///< NaN when the column is constant
    bool jb_computable = true;
};

std::vector<AssetSummary> describe(const ReturnPanel& panel, double level = 0.10);

namespace csv {
/// Split one RFC 4180 record. Quoted fields may contain commas and doubled quotes.
std::vector<std::string> split(const std::string& line);
std::string escape(const std::string& field);
/// Reads one logical record, joining lines while a quote is open. False at EOF.
bool read_record(std::istream& in, std::string& record, int& line_no);
} // namespace csv

} // namespace vineport
