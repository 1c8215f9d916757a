#pragma once

// Reference implementations used as independent oracles in tests. They are
// deliberately naive: no shared code paths with the library beyond the
// bivariate copula primitives.

#include "vineport/bicop.hpp"
#include "vineport/vine.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

struct LabeledEdge {
    int a = 0, b = 0;
    std::set<int> cond;
    vineport::BicopSpec spec;  // first argument is `a`
};

inline std::vector<LabeledEdge> labeled_edges(const vineport::VineModel& m) {
    std::vector<LabeledEdge> out;
    for (int t = 0; t + 1 < m.dim(); ++t)
        for (int j = 0; j <= m.dim() - 2 - t; ++j) {
            auto e = m.structure.edge(t, j);
            out.push_back({e.a, e.b, std::set<int>(e.cond.begin(), e.cond.end()), m.specs[t][j]});
        }
    return out;
}

// F(x | S) by the conditional-distribution recursion
//   F(x | S) = dC_{x,y|S\y}(F(x | S\y), F(y | S\y)) / dF(y | S\y)
// choosing any y in S whose edge {x, y} | S\y is present in the vine.
inline double cond_cdf(const Eigen::RowVectorXd& u, int x, const std::set<int>& S, const std::vector<LabeledEdge>& edges) {
    if (S.empty()) return u(x);
    for (const auto& e : edges) {
        if (e.cond.size() + 1 != S.size()) continue;
        int y = -1;
        if (e.a == x && S.count(e.b)) y = e.b;
        if (e.b == x && S.count(e.a)) y = e.a;
        if (y < 0) continue;
        std::set<int> rest = S;
        rest.erase(y);
        if (rest != e.cond) continue;
        const double fx = cond_cdf(u, x, rest, edges);
        const double fy = cond_cdf(u, y, rest, edges);
        // hfunc(u, v) = dC(u, v)/dv for the edge's own argument order
        if (e.a == x) return vineport::hfunc(fx, fy, e.spec);
        return vineport::hfunc(fx, fy, vineport::swap_arguments(e.spec));
    }
    throw std::logic_error("oracle: no edge conditions the requested pair");
}

// Log density as the product of all pair-copula densities evaluated at the
// recursively computed conditional distribution functions.
inline double vine_log_density(const Eigen::RowVectorXd& u, const vineport::VineModel& m) {
    const auto edges = labeled_edges(m);
    double s = 0.0;
    for (const auto& e : edges) {
        const double fa = cond_cdf(u, e.a, e.cond, edges);
        const double fb = cond_cdf(u, e.b, e.cond, edges);
        s += std::log(vineport::bicop_pdf(fa, fb, e.spec));
    }
    return s;
}

inline double kupiec(double T, double N, double p) {
    auto xlogy = [](double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); };
    const double pi = N / T;
    const double l0 = xlogy(T - N, 1.0 - p) + xlogy(N, p);
    const double l1 = xlogy(T - N, 1.0 - pi) + xlogy(N, pi);
    return -2.0 * (l0 - l1);
}

// Calls f(w) for every point of the 3-asset simplex grid with the given step.
inline void simplex_grid3(int steps, const std::function<void(const Eigen::Vector3d&)>& f) {
    for (int i = 0; i <= steps; ++i)
        for (int j = 0; j + i <= steps; ++j) {
            Eigen::Vector3d w(i, j, steps - i - j);
            f(w / steps);
        }
}

// Naive empirical CVaR: mean loss over the k = floor(alpha n) worst outcomes.
inline double cvar(std::vector<double> r, double alpha) {
    std::sort(r.begin(), r.end());
    const auto k = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(r.size()) + 1e-9));
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) s += r[i];
    return -s / static_cast<double>(k);
}

struct GridComparison {
    double optimizer = 0.0;   // objective at the optimizer's weights
    double grid = 0.0;        // best objective on the grid
    double resolution = 0.0;  // largest objective change from one grid step at the optimizer's weights
    double weight_gap = 0.0;  // max-norm distance to the best grid point
    bool ok() const { return optimizer <= grid + 1e-9 && grid - optimizer <= resolution + 1e-12; }
};

// Compares a 3-asset allocation with a brute-force search over the simplex
// grid of the given step, for an objective to be minimized.
inline GridComparison compare_with_grid(const Eigen::Vector3d& w, double step,
                                        const std::function<double(const Eigen::Vector3d&)>& objective) {
    GridComparison g;
    g.optimizer = objective(w);
    g.grid = 1e300;
    Eigen::Vector3d best = w;
    simplex_grid3(static_cast<int>(std::lround(1.0 / step)), [&](const Eigen::Vector3d& v) {
        const double f = objective(v);
        if (f < g.grid) {
            g.grid = f;
            best = v;
        }
    });
    for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
            if (k == l) continue;
            Eigen::Vector3d v = w;
            const double move = std::min(step, v(l));
            v(k) += move;
            v(l) -= move;
            g.resolution = std::max(g.resolution, 2.0 * std::abs(objective(v) - g.optimizer));
        }
    g.weight_gap = (w - best).cwiseAbs().maxCoeff();
    return g;
}

inline std::vector<double> portfolio_returns(const Eigen::MatrixXd& r, const Eigen::VectorXd& w) {
    std::vector<double> out(static_cast<std::size_t>(r.rows()));
    for (Eigen::Index i = 0; i < r.rows(); ++i) out[static_cast<std::size_t>(i)] = r.row(i).dot(w);
    return out;
}

inline double sample_variance(const std::vector<double>& x) {
    double m = 0, s = 0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

inline double sharpe(const std::vector<double>& x, double rf) {
    double m = 0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    return (m - rf) / std::sqrt(sample_variance(x));
}

inline double kendall_naive(const std::vector<double>& x, const std::vector<double>& y) {
    double c = 0, d = 0, tx = 0, ty = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double a = (x[i] - x[j]) * (y[i] - y[j]);
            if (a > 0) ++c;
            else if (a < 0) ++d;
            else {
                if (x[i] == x[j] && y[i] != y[j]) ++tx;
                if (y[i] == y[j] && x[i] != x[j]) ++ty;
            }
        }
    return (c - d) / std::sqrt((c + d + tx) * (c + d + ty));
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("vineport_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

} // namespace oracle
