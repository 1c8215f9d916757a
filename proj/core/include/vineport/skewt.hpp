#pragma once

namespace vineport {

/// Skewed Student-t innovation law: the two-piece (Fernandez-Steel) skew
/// construction applied to a unit-variance Student-t, then recentred and
/// rescaled to zero mean and unit variance. skew == 1 is the symmetric case;
/// skew > 1 puts more mass in the right tail.
struct SkewtParams {
    double skew = 1.0;   ///< > 0
    double shape = 8.0;  ///< degrees of freedom, > 2
};

void validate(const SkewtParams& p);

/// Precomputed constants for repeated evaluation at fixed parameters.
class SkewtDistribution {
public:
    explicit SkewtDistribution(const SkewtParams& p);

    double pdf(double z) const;
    double log_pdf(double z) const;
    double cdf(double z) const;
    double quantile(double u) const;

    const SkewtParams& params() const { return p_; }

private:
    double inner_cdf(double x) const;      // unit-variance Student-t
    double inner_quantile(double u) const;

    SkewtParams p_;
    double mu_ = 0.0;      // mean of the unstandardized two-piece variable
    double sigma_ = 1.0;   // its standard deviation
    double log_g_ = 0.0;   // log(2 / (xi + 1/xi))
    double log_c_ = 0.0;   // log normalizer of the unit-variance t
    double t_scale_ = 1.0; // sqrt(nu / (nu - 2))
};

double skewt_pdf(double z, const SkewtParams& p);
double skewt_cdf(double z, const SkewtParams& p);
double skewt_quantile(double u, const SkewtParams& p);

} // namespace vineport
