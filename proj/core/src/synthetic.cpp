#include "vineport/synthetic.hpp"

#include "vineport/rng.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cstdio>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vineport {

void validate(const SyntheticSpec& s) {
    if (s.assets < 2) throw std::invalid_argument("synthetic panel needs at least 2 assets");
    if (s.days < 1) throw std::invalid_argument("synthetic panel needs at least one day");
    if (s.burn_in < 0) throw std::invalid_argument("burn_in must be nonnegative");
    if (!s.margins.empty() && static_cast<int>(s.margins.size()) != s.assets)
        throw std::invalid_argument("synthetic margins must have one entry per asset");
    for (const auto& m : s.margins) validate(m);
}

std::vector<ArGarchParams> synthetic_margins(const SyntheticSpec& s) {
    if (!s.margins.empty()) return s.margins;
    std::vector<ArGarchParams> out;
    for (int j = 0; j < s.assets; ++j) {
        ArGarchParams p;
        p.mu = 0.03;
        p.phi = 0.05;
        p.alpha = 0.08;
        p.beta = 0.90;
        const double vol = 0.8 + 0.4 * j;
        p.omega = vol * vol * (1.0 - p.alpha - p.beta);
        p.skewt = {0.9, 7.0};
        out.push_back(p);
    }
    return out;
}

VineModel synthetic_copula(const SyntheticSpec& s) {
    const int d = s.assets;
    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    VineModel m = independence_vine(cvine_structure(order));
    if (s.family == Family::Independence) return m;
    const BicopSpec first = tau_to_param(s.family, 0, s.tau);
    for (int t = 0; t + 1 < d; ++t) {
        for (auto& spec : m.specs[static_cast<std::size_t>(t)]) {
            if (s.family == Family::Clayton) {
                const double theta = first.params[0];
                spec = {Family::Clayton, 0, {theta / (1.0 + t * theta), 0.0}};
            } else if (t == 0) {
                spec = first;
            }
        }
    }
    return m;
}

ReturnPanel synthetic_panel(const SyntheticSpec& s) {
    validate(s);
    const auto margins = synthetic_margins(s);
    const VineModel cop = synthetic_copula(s);
    const auto total = static_cast<std::size_t>(s.days + s.burn_in);
    const Eigen::MatrixXd u = vine_simulate(cop, total, derive_seed(s.seed, "synthetic-copula"));
    ReturnPanel p;
    p.dates = business_days(s.start_date, static_cast<std::size_t>(s.days));
    for (int j = 0; j < s.assets; ++j) p.assets.push_back(fmt::format("A{}", j + 1));
    p.returns.resize(s.days, s.assets);
    std::vector<double> col(total);
    for (int j = 0; j < s.assets; ++j) {
        for (std::size_t i = 0; i < total; ++i) col[i] = u(static_cast<Eigen::Index>(i), j);
        const auto r = simulate_ar_garch(margins[static_cast<std::size_t>(j)], col);
        for (int i = 0; i < s.days; ++i) p.returns(i, j) = r[static_cast<std::size_t>(i + s.burn_in)];
    }
    return p;
}

std::vector<std::string> business_days(const std::string& start, std::size_t count) {
    using namespace std::chrono;
    int y = 0;
    unsigned mo = 0, dd = 0;
    if (start.size() != 10 || std::sscanf(start.c_str(), "%d-%u-%u", &y, &mo, &dd) != 3)
        throw std::invalid_argument("start date must be YYYY-MM-DD");
    const year_month_day ymd{year{y}, month{mo}, day{dd}};
    if (!ymd.ok()) throw std::invalid_argument("invalid start date " + start);
    sys_days day_point{ymd};
    std::vector<std::string> out;
    out.reserve(count);
    while (out.size() < count) {
        const weekday wd{day_point};
        if (wd != Saturday && wd != Sunday) {
            const year_month_day cur{day_point};
            out.push_back(fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(cur.year()),
                                      static_cast<unsigned>(cur.month()), static_cast<unsigned>(cur.day())));
        }
        day_point += days{1};
    }
    return out;
}

} // namespace vineport
