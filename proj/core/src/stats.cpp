#include "vineport/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vineport::stats {

double mean(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("mean of empty series");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) throw std::invalid_argument("variance needs at least two values");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

double median(std::span<const double> x) {
    if (x.empty()) throw std::invalid_argument("median of empty series");
    std::vector<double> v(x.begin(), x.end());
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    double hi = v[n / 2];
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + n / 2);
    return 0.5 * (lo + hi);
}

namespace {

double central_moment(std::span<const double> x, int k, double m) {
    double s = 0.0;
    for (double v : x) s += std::pow(v - m, k);
    return s / static_cast<double>(x.size());
}

} // namespace

double skewness(std::span<const double> x) {
    const double m = mean(x);
    const double m2 = central_moment(x, 2, m);
    if (m2 == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return central_moment(x, 3, m) / std::pow(m2, 1.5);
}

double excess_kurtosis(std::span<const double> x) {
    const double m = mean(x);
    const double m2 = central_moment(x, 2, m);
    if (m2 == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return central_moment(x, 4, m) / (m2 * m2) - 3.0;
}

namespace {

// Counts pairs i < j with y[i] > y[j] while merge-sorting y.
std::uint64_t count_inversions(std::vector<double>& y, std::vector<double>& buf,
                               std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t inv = count_inversions(y, buf, lo, mid) + count_inversions(y, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (y[j] < y[i]) {
            inv += mid - i;
            buf[k++] = y[j++];
        } else {
            buf[k++] = y[i++];
        }
    }
    while (i < mid) buf[k++] = y[i++];
    while (j < hi) buf[k++] = y[j++];
    std::copy(buf.begin() + lo, buf.begin() + hi, y.begin() + lo);
    return inv;
}

template <class Eq>
std::uint64_t tie_pairs(std::size_t n, Eq equal) {
    std::uint64_t ties = 0, run = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i < n && equal(i - 1, i)) {
            ++run;
        } else {
            ties += run * (run - 1) / 2;
            run = 1;
        }
    }
    return ties;
}

} // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (y.size() != n) throw std::invalid_argument("kendall_tau: length mismatch");
    if (n < 2) throw std::invalid_argument("kendall_tau: need at least two observations");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x[perm[i]];
        ys[i] = y[perm[i]];
    }
    const std::uint64_t xtie = tie_pairs(n, [&](std::size_t a, std::size_t b) { return xs[a] == xs[b]; });
    const std::uint64_t jtie = tie_pairs(n, [&](std::size_t a, std::size_t b) {
        return xs[a] == xs[b] && ys[a] == ys[b];
    });
    std::vector<double> buf(n);
    const std::uint64_t dis = count_inversions(ys, buf, 0, n);
    // ys is now sorted.
    const std::uint64_t ytie = tie_pairs(n, [&](std::size_t a, std::size_t b) { return ys[a] == ys[b]; });

    const double tot = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    const double denom = std::sqrt(tot - static_cast<double>(xtie)) * std::sqrt(tot - static_cast<double>(ytie));
    if (denom == 0.0) return 0.0;
    const double num = tot - static_cast<double>(xtie) - static_cast<double>(ytie) +
                       static_cast<double>(jtie) - 2.0 * static_cast<double>(dis);
    return num / denom;
}

Eigen::MatrixXd pseudo_observations(const Eigen::MatrixXd& data) {
    const Eigen::Index n = data.rows();
    Eigen::MatrixXd out(n, data.cols());
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < data.cols(); ++k) {
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return data(a, k) < data(b, k); });
        for (Eigen::Index i = 0; i < n;) {
            Eigen::Index j = i;
            while (j + 1 < n && data(idx[j + 1], k) == data(idx[i], k)) ++j;
            const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
            for (Eigen::Index r = i; r <= j; ++r) out(idx[r], k) = rank / static_cast<double>(n + 1);
            i = j + 1;
        }
    }
    return out;
}

Eigen::MatrixXd kendall_matrix(const Eigen::MatrixXd& data) {
    const Eigen::Index d = data.cols();
    Eigen::MatrixXd tau = Eigen::MatrixXd::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i + 1; j < d; ++j) tau(i, j) = tau(j, i) = kendall_tau(col(data, i), col(data, j));
    return tau;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0,1)");
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

double student_cdf(double x, double df) {
    return boost::math::cdf(boost::math::students_t_distribution<double>(df), x);
}

double student_quantile(double p, double df) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("student_quantile: p outside (0,1)");
    return boost::math::quantile(boost::math::students_t_distribution<double>(df), p);
}

double chi2_sf(double x, double df) {
    if (!(x > 0.0)) return 1.0;
    if (!std::isfinite(x)) return 0.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(df), x));
}

OlsResult ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw std::invalid_argument("ols: dimension mismatch");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    OlsResult out;
    out.rank = static_cast<int>(qr.rank());
    if (out.rank < X.cols()) throw std::runtime_error("ols: design matrix is rank deficient");
    out.coef = qr.solve(y);
    out.resid = y - X * out.coef;
    const double dof = static_cast<double>(X.rows() - X.cols());
    out.sigma2 = dof > 0 ? out.resid.squaredNorm() / dof : 0.0;
    const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
    out.stderr_ = (out.sigma2 * xtx_inv.diagonal()).cwiseSqrt();
    const double ybar = y.mean();
    const double tss = (y.array() - ybar).square().sum();
    out.r2 = tss > 0 ? 1.0 - out.resid.squaredNorm() / tss : 0.0;
    return out;
}

} // namespace vineport::stats
