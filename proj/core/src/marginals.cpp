#include "vineport/marginals.hpp"

#include "vineport/optim.hpp"
#include "vineport/rng.hpp"
#include "vineport/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vineport {

namespace {

constexpr double kStationarityMargin = 1e-6;
constexpr double kUniformClip = 1e-10;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// Transformed coordinates: (mu, phi, log omega, logit alpha, logit share of
// remaining persistence for beta, log skew, log(shape - 2)).
ArGarchParams from_free(std::span<const double> v) {
    ArGarchParams p;
    p.mu = v[0];
    p.phi = v[1];
    p.omega = std::exp(v[2]);
    const double cap = 1.0 - kStationarityMargin;
    p.alpha = cap * logistic(v[3]);
    p.beta = (cap - p.alpha) * logistic(v[4]);
    p.skewt.skew = std::exp(std::clamp(v[5], -5.0, 5.0));
    p.skewt.shape = 2.0 + std::exp(std::clamp(v[6], -7.0, 7.0));
    return p;
}

std::vector<double> to_free(const ArGarchParams& p) {
    const double cap = 1.0 - kStationarityMargin;
    const double a = std::clamp(p.alpha / cap, 1e-9, 1.0 - 1e-9);
    const double share = std::clamp(p.beta / (cap - p.alpha), 1e-9, 1.0 - 1e-9);
    return {p.mu, p.phi, std::log(p.omega), logit(a), logit(share), std::log(p.skewt.skew),
            std::log(p.skewt.shape - 2.0)};
}

void check_series(std::span<const double> series, std::size_t min_length) {
    if (series.size() < min_length)
        throw std::invalid_argument("series too short for AR-GARCH fit (need at least " + std::to_string(min_length) +
                                    " observations)");
    for (double v : series)
        if (!std::isfinite(v)) throw std::invalid_argument("series contains non-finite values");
}

} // namespace

void validate(const ArGarchParams& p) {
    if (!(p.omega > 0.0)) throw std::invalid_argument("omega must be > 0");
    if (!(p.alpha >= 0.0) || !(p.beta >= 0.0)) throw std::invalid_argument("alpha and beta must be >= 0");
    if (!(p.alpha + p.beta < 1.0)) throw std::invalid_argument("alpha + beta must be < 1");
    validate(p.skewt);
}

double ar_garch_loglik(std::span<const double> r, const ArGarchParams& p, std::vector<double>* variances,
                       std::vector<double>* residuals) {
    const std::size_t T = r.size();
    if (T < 3) throw std::invalid_argument("ar_garch_loglik: series too short");
    const SkewtDistribution dist(p.skewt);
    const double h0 = stats::variance(r);
    if (variances) variances->assign(T - 1, 0.0);
    if (residuals) residuals->assign(T - 1, 0.0);

    double ll = 0.0, h = h0, e_prev = 0.0;
    for (std::size_t t = 1; t < T; ++t) {
        if (t > 1) h = p.omega + p.alpha * e_prev * e_prev + p.beta * h;
        const double e = r[t] - p.mu - p.phi * r[t - 1];
        const double z = e / std::sqrt(h);
        ll += dist.log_pdf(z) - 0.5 * std::log(h);
        if (variances) (*variances)[t - 1] = h;
        if (residuals) (*residuals)[t - 1] = z;
        e_prev = e;
    }
    return ll;
}

MarginalFit filter_ar_garch(std::span<const double> series, const ArGarchParams& p) {
    validate(p);
    MarginalFit fit;
    fit.params = p;
    fit.log_likelihood = ar_garch_loglik(series, p, &fit.variances, &fit.residuals);
    fit.last_return = series.back();
    fit.last_variance = fit.variances.back();
    fit.last_innovation = fit.residuals.back() * std::sqrt(fit.last_variance);
    return fit;
}

MarginalFit fit_ar_garch(std::span<const double> series, const GarchFitOptions& opts) {
    check_series(series, 250);
    const double var = stats::variance(series);
    if (!(var > 0.0)) throw std::invalid_argument("series has zero variance");

    ArGarchParams start;
    start.mu = stats::mean(series);
    start.phi = 0.0;
    start.omega = 0.05 * var;
    start.alpha = 0.05;
    start.beta = 0.90;
    start.skewt = {1.0, 8.0};

    auto objective = [&](std::span<const double> v) {
        const ArGarchParams p = from_free(v);
        if (!(p.omega > 0.0) || !std::isfinite(p.omega)) return std::numeric_limits<double>::infinity();
        const double ll = ar_garch_loglik(series, p);
        return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
    };

    optim::NelderMeadOptions nm;
    nm.max_evals = opts.max_evals;
    nm.ftol = opts.ftol;
    nm.max_restarts = opts.max_restarts;
    nm.initial_step = 0.25;
    std::vector<double> x0 = to_free(start);
    x0[0] = start.mu;
    const auto res = optim::nelder_mead(objective, x0, nm);

    MarginalFit fit = filter_ar_garch(series, from_free(res.x));
    fit.converged = res.converged;
    fit.evaluations = res.evals;
    return fit;
}

std::vector<double> pit_residuals(const MarginalFit& fit) {
    const SkewtDistribution dist(fit.params.skewt);
    std::vector<double> u(fit.residuals.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        u[i] = std::clamp(dist.cdf(fit.residuals[i]), kUniformClip, 1.0 - kUniformClip);
    return u;
}

OneStepForecast forecast_one_step(const MarginalFit& fit) {
    const auto& p = fit.params;
    OneStepForecast f;
    f.mean = p.mu + p.phi * fit.last_return;
    f.variance = p.omega + p.alpha * fit.last_innovation * fit.last_innovation + p.beta * fit.last_variance;
    return f;
}

Eigen::MatrixXd reconstruct_returns(const Eigen::MatrixXd& u, std::span<const MarginalFit> fits) {
    if (static_cast<std::size_t>(u.cols()) != fits.size())
        throw std::invalid_argument("reconstruct_returns: uniform columns do not match fitted assets");
    Eigen::MatrixXd r(u.rows(), u.cols());
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
        const SkewtDistribution dist(fits[j].params.skewt);
        const OneStepForecast f = forecast_one_step(fits[j]);
        const double sd = std::sqrt(f.variance);
        for (Eigen::Index i = 0; i < u.rows(); ++i) r(i, j) = f.mean + sd * dist.quantile(u(i, j));
    }
    return r;
}

std::vector<double> simulate_ar_garch(const ArGarchParams& p, std::span<const double> uniforms) {
    validate(p);
    const SkewtDistribution dist(p.skewt);
    const double hbar = p.omega / (1.0 - p.alpha - p.beta);
    std::vector<double> r(uniforms.size());
    double h = hbar, e = 0.0, r_prev = p.mu / (1.0 - p.phi);
    for (std::size_t t = 0; t < uniforms.size(); ++t) {
        h = p.omega + p.alpha * e * e + p.beta * h;
        e = std::sqrt(h) * dist.quantile(uniforms[t]);
        r[t] = p.mu + p.phi * r_prev + e;
        r_prev = r[t];
    }
    return r;
}

std::vector<double> simulate_ar_garch(const ArGarchParams& p, std::size_t T, std::uint64_t seed, std::size_t burn_in) {
    Rng rng(seed);
    std::vector<double> u(T + burn_in);
    for (double& v : u) v = rng.uniform();
    std::vector<double> r = simulate_ar_garch(p, u);
    return {r.begin() + static_cast<std::ptrdiff_t>(burn_in), r.end()};
}

} // namespace vineport
