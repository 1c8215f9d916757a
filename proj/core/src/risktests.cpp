#include "vineport/risktests.hpp"

#include "vineport/rng.hpp"
#include "vineport/stats.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vineport {

namespace {

double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(y); }

} // namespace

void validate(const HitSequence& h) {
    if (!(h.p > 0.0 && h.p < 1.0)) throw std::invalid_argument("coverage level p must lie in (0, 1)");
    const std::size_t T = h.ret.size();
    if (h.var.size() != T || (!h.es.empty() && h.es.size() != T) || (!h.sigma.empty() && h.sigma.size() != T))
        throw std::invalid_argument("hit sequence columns have different lengths");
}

std::vector<int> exceedances(const HitSequence& h) {
    validate(h);
    std::vector<int> out(h.ret.size());
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = h.ret[t] < h.var[t] ? 1 : 0;
    return out;
}

double kupiec_uc(std::size_t T, std::size_t N, double p) {
    if (T == 0 || N > T) throw std::invalid_argument("kupiec_uc: need 0 <= N <= T and T > 0");
    const double t = static_cast<double>(T), n = static_cast<double>(N);
    const double pi = n / t;
    const double l0 = xlogy(t - n, 1.0 - p) + xlogy(n, p);
    const double l1 = xlogy(t - n, 1.0 - pi) + xlogy(n, pi);
    return std::max(0.0, -2.0 * (l0 - l1));
}

double christoffersen_ind(const std::vector<int>& hits) {
    double n00 = 0, n01 = 0, n10 = 0, n11 = 0;
    for (std::size_t t = 1; t < hits.size(); ++t) {
        const int a = hits[t - 1], b = hits[t];
        (a ? (b ? n11 : n10) : (b ? n01 : n00)) += 1.0;
    }
    const double pi01 = n00 + n01 > 0 ? n01 / (n00 + n01) : 0.0;
    const double pi11 = n10 + n11 > 0 ? n11 / (n10 + n11) : 0.0;
    const double total = n00 + n01 + n10 + n11;
    const double pi = total > 0 ? (n01 + n11) / total : 0.0;
    const double l0 = xlogy(n00 + n10, 1.0 - pi) + xlogy(n01 + n11, pi);
    const double l1 = xlogy(n00, 1.0 - pi01) + xlogy(n01, pi01) + xlogy(n10, 1.0 - pi11) + xlogy(n11, pi11);
    return std::max(0.0, -2.0 * (l0 - l1));
}

VarTestReport var_backtest(const HitSequence& h) {
    const auto hits = exceedances(h);
    const std::size_t T = hits.size();
    if (T < 50) throw std::invalid_argument("var_backtest needs at least 50 observations");
    VarTestReport r;
    r.T = T;
    for (int i : hits) r.ne += static_cast<std::size_t>(i);
    r.degenerate = r.ne == 0 || r.ne == T;
    r.uc = kupiec_uc(T, r.ne, h.p);
    r.uc_p = stats::chi2_sf(r.uc, 1.0);
    r.lr_ind = christoffersen_ind(hits);
    r.cc = r.uc + r.lr_ind;
    r.cc_p = stats::chi2_sf(r.cc, 2.0);

    double ad = 0.0, aql = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        const double e = h.ret[t] - h.var[t];
        if (hits[t]) ad += std::abs(e);
        aql += (h.p - hits[t]) * e;
    }
    r.ad = r.ne ? ad / static_cast<double>(r.ne) : std::numeric_limits<double>::quiet_NaN();
    r.ae = static_cast<double>(r.ne) / (h.p * static_cast<double>(T));
    r.aql = aql / static_cast<double>(T);

    constexpr int lags = 4;
    const auto n = static_cast<Eigen::Index>(T - lags);
    Eigen::MatrixXd X(n, lags + 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::size_t t = static_cast<std::size_t>(i) + lags;
        X(i, 0) = 1.0;
        for (int l = 1; l <= lags; ++l) X(i, l) = hits[t - static_cast<std::size_t>(l)] - h.p;
        X(i, lags + 1) = h.var[t];
        y(i) = hits[t] - h.p;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < X.cols()) {
        r.dq_computable = false;
        r.dq = r.dq_p = std::numeric_limits<double>::quiet_NaN();
    } else {
        const Eigen::VectorXd beta = qr.solve(y);
        const Eigen::VectorXd fitted = X * beta;
        r.dq = fitted.squaredNorm() / (h.p * (1.0 - h.p));
        r.dq_p = stats::chi2_sf(r.dq, static_cast<double>(X.cols()));
    }
    return r;
}

ErTestReport es_er_test(const HitSequence& h, int bootstrap, std::uint64_t seed) {
    const auto hits = exceedances(h);
    if (h.es.size() != hits.size() || h.sigma.size() != hits.size())
        throw std::invalid_argument("ER test needs ES and volatility forecasts");
    if (bootstrap < 1) throw std::invalid_argument("ER test needs a positive bootstrap count");
    std::vector<double> e;
    for (std::size_t t = 0; t < hits.size(); ++t) {
        if (!hits[t]) continue;
        if (!(h.sigma[t] > 0.0)) throw std::invalid_argument("ER test: volatility forecasts must be positive");
        e.push_back((h.ret[t] - h.es[t]) / h.sigma[t]);
    }
    if (e.size() < 5) throw std::invalid_argument("ER test: fewer than 5 exceedances, not computable");
    ErTestReport r;
    r.exceedances = e.size();
    r.bootstrap = bootstrap;
    const double n = static_cast<double>(e.size());
    r.mean = stats::mean(e);
    const double sd = stats::stddev(e);
    if (!(sd > 0.0)) {
        r.t = r.mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), r.mean);
        r.p_bootstrap = r.p_asymptotic = r.mean < 0.0 ? 0.0 : 1.0;
        return r;
    }
    r.t = r.mean / (sd / std::sqrt(n));
    r.p_asymptotic = stats::student_cdf(r.t, n - 1.0);

    Rng rng(derive_seed(seed, "er-bootstrap"));
    std::vector<double> z(e.size());
    int below = 0;
    for (int b = 0; b < bootstrap; ++b) {
        double s = 0.0, s2 = 0.0;
        for (auto& v : z) {
            v = e[rng.index(e.size())] - r.mean;
            s += v;
        }
        const double m = s / n;
        for (double v : z) s2 += (v - m) * (v - m);
        const double sdb = std::sqrt(s2 / (n - 1.0));
        const double tb = sdb > 0.0 ? m / (sdb / std::sqrt(n)) : 0.0;
        below += tb <= r.t;
    }
    r.p_bootstrap = static_cast<double>(below) / static_cast<double>(bootstrap);
    return r;
}

namespace {

// T gbar' S^{-1} gbar with S the uncentred second moment of the moments.
double wald(const Eigen::MatrixXd& g) {
    const auto T = static_cast<double>(g.rows());
    const Eigen::VectorXd gbar = g.colwise().mean().transpose();
    if (gbar.cwiseAbs().maxCoeff() == 0.0) return 0.0;
    const Eigen::MatrixXd S = g.transpose() * g / T;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14)
        throw std::runtime_error("conditional calibration: moment covariance is singular");
    return std::max(0.0, T * gbar.dot(ldlt.solve(gbar)));
}

} // namespace

CalibrationReport es_cond_calibration(const HitSequence& h) {
    const auto hits = exceedances(h);
    if (h.es.size() != hits.size()) throw std::invalid_argument("conditional calibration needs ES forecasts");
    const std::size_t T = hits.size();
    if (T < 250) throw std::invalid_argument("conditional calibration needs at least 250 observations");
    Eigen::MatrixXd v(static_cast<Eigen::Index>(T), 2);
    for (std::size_t t = 0; t < T; ++t) {
        const auto i = static_cast<Eigen::Index>(t);
        v(i, 0) = h.p - hits[t];
        v(i, 1) = h.es[t] - h.var[t] + hits[t] * (h.var[t] - h.ret[t]) / h.p;
    }
    CalibrationReport r;
    r.simple = wald(v);
    r.simple_p = stats::chi2_sf(r.simple, r.simple_df);

    const auto n = static_cast<Eigen::Index>(T - 1);
    Eigen::MatrixXd g(n, 6);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double inst[3] = {1.0, v(i, 0), v(i, 1)};
        for (int c = 0; c < 2; ++c)
            for (int k = 0; k < 3; ++k) g(i, 3 * c + k) = v(i + 1, c) * inst[k];
    }
    r.general = wald(g);
    r.general_p = stats::chi2_sf(r.general, r.general_df);
    return r;
}

} // namespace vineport
