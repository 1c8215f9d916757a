#include "vineport/optim.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

namespace vineport::optim {

namespace {

struct SimplexRun {
    std::vector<double> x;
    double fx;
    int evals;
    bool converged;
};

SimplexRun run_simplex(const Objective& raw, const std::vector<double>& x0, double step, int budget, double ftol,
                      double atol) {
    const std::size_t n = x0.size();
    int evals = 0;
    auto f = [&](const std::vector<double>& x) {
        ++evals;
        const double v = raw(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += (x0[i] != 0.0 ? step * std::max(1.0, std::abs(x0[i])) : step);
    for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

    std::vector<std::size_t> idx(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    bool converged = false;
    while (evals < budget) {
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = idx[0], worst = idx[n], second = idx[n - 1];
        const double spread = std::abs(vals[worst] - vals[best]);
        if (std::isfinite(vals[worst]) && (spread <= ftol * (std::abs(vals[best]) + 1e-12) || spread <= atol)) {
            converged = true;
            break;
        }
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[idx[k]][i] / static_cast<double>(n);

        for (std::size_t i = 0; i < n; ++i) xr[i] = centroid[i] + (centroid[i] - pts[worst][i]);
        const double fr = f(xr);
        if (fr < vals[best]) {
            for (std::size_t i = 0; i < n; ++i) xe[i] = centroid[i] + 2.0 * (centroid[i] - pts[worst][i]);
            const double fe = f(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        for (std::size_t i = 0; i < n; ++i)
            xc[i] = outside ? centroid[i] + 0.5 * (xr[i] - centroid[i]) : centroid[i] + 0.5 * (pts[worst][i] - centroid[i]);
        const double fc = f(xc);
        if (fc < (outside ? fr : vals[worst])) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        // shrink toward the best vertex
        for (std::size_t k = 1; k <= n; ++k) {
            auto& p = pts[idx[k]];
            for (std::size_t i = 0; i < n; ++i) p[i] = pts[best][i] + 0.5 * (p[i] - pts[best][i]);
            vals[idx[k]] = f(p);
        }
    }
    const auto b = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    return {pts[b], vals[b], evals, converged};
}

} // namespace

MinimizeResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts) {
    MinimizeResult out;
    out.x = x0;
    out.fx = f(x0);
    if (!std::isfinite(out.fx)) out.fx = std::numeric_limits<double>::infinity();
    out.evals = 1;
    double step = opts.initial_step;
    for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
        const int budget = opts.max_evals - out.evals;
        if (budget <= static_cast<int>(x0.size()) + 1) break;
        const SimplexRun run = run_simplex(f, out.x, step, budget, opts.ftol, opts.atol);
        out.evals += run.evals;
        const double gain = out.fx - run.fx;
        if (run.fx < out.fx) {
            out.x = run.x;
            out.fx = run.fx;
        }
        out.converged = run.converged;
        if (run.converged && !(gain > opts.ftol * (std::abs(out.fx) + 1e-12) && gain > opts.atol)) break;
        step = std::max(step * 0.5, 1e-3);
    }
    return out;
}

ScalarMinimum brent_minimize(const std::function<double(double)>& f, double lo, double hi, int bits, int max_iter) {
    auto safe = [&](double x) {
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };
    std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
    const auto [x, fx] = boost::math::tools::brent_find_minima(safe, lo, hi, bits, iters);
    return {x, fx};
}

} // namespace vineport::optim
