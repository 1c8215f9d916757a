#include "vineport/skewt.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <stdexcept>

namespace vineport {

void validate(const SkewtParams& p) {
    if (!(p.shape > 2.0) || !std::isfinite(p.shape))
        throw std::invalid_argument("skew-t shape must be finite and > 2");
    if (!(p.skew > 0.0) || !std::isfinite(p.skew)) throw std::invalid_argument("skew-t skew must be finite and > 0");
}

SkewtDistribution::SkewtDistribution(const SkewtParams& p) : p_(p) {
    validate(p);
    const double nu = p.shape, xi = p.skew;
    const double lg = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu);
    // E|Z| for the unit-variance t
    const double m1 = 2.0 * std::sqrt(nu - 2.0) * std::exp(lg) / ((nu - 1.0) * std::sqrt(M_PI));
    mu_ = m1 * (xi - 1.0 / xi);
    sigma_ = std::sqrt((1.0 - m1 * m1) * (xi * xi + 1.0 / (xi * xi)) + 2.0 * m1 * m1 - 1.0);
    log_g_ = std::log(2.0 / (xi + 1.0 / xi));
    log_c_ = lg - 0.5 * std::log(M_PI * (nu - 2.0));
    t_scale_ = std::sqrt(nu / (nu - 2.0));
}

double SkewtDistribution::log_pdf(double z) const {
    if (!std::isfinite(z)) throw std::domain_error("skew-t density at non-finite point");
    const double nu = p_.shape;
    const double zs = z * sigma_ + mu_;
    const double x = zs >= 0.0 ? zs / p_.skew : zs * p_.skew;
    return log_g_ + std::log(sigma_) + log_c_ - 0.5 * (nu + 1.0) * std::log1p(x * x / (nu - 2.0));
}

double SkewtDistribution::pdf(double z) const { return std::exp(log_pdf(z)); }

double SkewtDistribution::inner_cdf(double x) const {
    return boost::math::cdf(boost::math::students_t_distribution<double>(p_.shape), x * t_scale_);
}

double SkewtDistribution::inner_quantile(double u) const {
    return boost::math::quantile(boost::math::students_t_distribution<double>(p_.shape), u) / t_scale_;
}

double SkewtDistribution::cdf(double z) const {
    if (std::isnan(z)) throw std::domain_error("skew-t cdf at NaN");
    if (z == -INFINITY) return 0.0;
    if (z == INFINITY) return 1.0;
    const double xi = p_.skew, xi2 = xi * xi;
    const double zs = z * sigma_ + mu_;
    if (zs < 0.0) return 2.0 / (xi2 + 1.0) * inner_cdf(zs * xi);
    return 1.0 - 2.0 * xi2 / (xi2 + 1.0) * inner_cdf(-zs / xi);
}

double SkewtDistribution::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("skew-t quantile: u outside (0,1)");
    const double xi = p_.skew, xi2 = xi * xi;
    const double split = 1.0 / (1.0 + xi2);  // mass left of the mode
    double zs;
    if (u < split)
        zs = inner_quantile(u * (xi2 + 1.0) / 2.0) / xi;
    else
        zs = -xi * inner_quantile(std::min(0.5, (1.0 - u) * (1.0 + xi2) / (2.0 * xi2)));
    return (zs - mu_) / sigma_;
}

double skewt_pdf(double z, const SkewtParams& p) { return SkewtDistribution(p).pdf(z); }
double skewt_cdf(double z, const SkewtParams& p) { return SkewtDistribution(p).cdf(z); }
double skewt_quantile(double u, const SkewtParams& p) { return SkewtDistribution(p).quantile(u); }

} // namespace vineport
