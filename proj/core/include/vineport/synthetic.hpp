#pragma once

#include "vineport/bicop.hpp"
#include "vineport/marginals.hpp"
#include "vineport/panel.hpp"
#include "vineport/vine.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vineport {

struct SyntheticSpec {
    int assets = 4;
    int days = 600;
    Family family = Family::Clayton;
    double tau = 0.4;
    /// One entry per asset; empty means AR(1)-GARCH(1,1) skew-t margins with
    /// unconditional daily volatility 0.8 + 0.4 j percent for asset j.
    std::vector<ArGarchParams> margins;
    std::string start_date = "2010-01-04";
    std::uint64_t seed = 1;
    int burn_in = 500;
};

void validate(const SyntheticSpec& s);

/// C-vine copula behind the synthetic panel. For Clayton the trees carry
/// theta / (1 + t theta), which is the exchangeable d-dimensional Clayton
/// copula (every pair has Kendall tau `tau`). Other families use `tau` on
/// the first tree and independence above it.
VineModel synthetic_copula(const SyntheticSpec& s);
std::vector<ArGarchParams> synthetic_margins(const SyntheticSpec& s);

/// Weekday dates starting at start_date, percent log returns.
ReturnPanel synthetic_panel(const SyntheticSpec& s);

/// `count` consecutive weekdays starting at an ISO date (moved forward to a
/// weekday when needed).
std::vector<std::string> business_days(const std::string& start, std::size_t count);

} // namespace vineport
