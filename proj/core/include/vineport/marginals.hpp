#pragma once

#include "vineport/skewt.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace vineport {

/// AR(1)-GARCH(1,1) with skewed Student-t innovations:
///   r_t = mu + phi r_{t-1} + e_t,  e_t = z_t sqrt(h_t),
///   h_t = omega + alpha e_{t-1}^2 + beta h_{t-1}.
struct ArGarchParams {
    double mu = 0.0;
    double phi = 0.0;
    double omega = 0.05;
    double alpha = 0.05;
    double beta = 0.90;
    SkewtParams skewt{};
};

/// Throws std::invalid_argument unless omega > 0, alpha, beta >= 0,
/// alpha + beta < 1 and the innovation parameters are valid.
void validate(const ArGarchParams& p);

struct MarginalFit {
    ArGarchParams params;
    std::vector<double> variances;  ///< h_t for t = 2..T
    std::vector<double> residuals;  ///< standardized z_t for t = 2..T
    double log_likelihood = 0.0;
    double last_return = 0.0;       ///< r_T
    double last_variance = 0.0;     ///< h_T
    double last_innovation = 0.0;   ///< e_T
    bool converged = true;
    int evaluations = 0;
};

struct GarchFitOptions {
    int max_evals = 20000;
    double ftol = 1e-10;
    int max_restarts = 4;
};

/// Conditional skew-t log-likelihood of the series at the given parameters.
/// The first observation seeds the AR lag; the first variance is the sample
/// variance of the series. Fills `variances`/`residuals` when non-null.
double ar_garch_loglik(std::span<const double> series, const ArGarchParams& p, std::vector<double>* variances = nullptr,
                       std::vector<double>* residuals = nullptr);

/// Maximum likelihood fit (Nelder-Mead in transformed coordinates). Returns
/// the best point found; `converged` is false when the evaluation budget ran
/// out. Throws on series shorter than 250, non-finite values, or zero variance.
MarginalFit fit_ar_garch(std::span<const double> series, const GarchFitOptions& opts = {});

/// Rebuild the filtered state of a fit at fixed parameters.
MarginalFit filter_ar_garch(std::span<const double> series, const ArGarchParams& p);

/// Probability integral transform of the standardized residuals.
std::vector<double> pit_residuals(const MarginalFit& fit);

struct OneStepForecast {
    double mean = 0.0;
    double variance = 0.0;
};
OneStepForecast forecast_one_step(const MarginalFit& fit);

/// Maps copula uniforms (n x d) to simulated next-period returns through each
/// asset's one-step forecast and innovation quantile function.
Eigen::MatrixXd reconstruct_returns(const Eigen::MatrixXd& u, std::span<const MarginalFit> fits);

/// Simulate T observations; `innovation_uniforms` (if non-empty, length T)
/// drives the innovations through the skew-t quantile, otherwise draws are
/// taken from a stream seeded by `seed`. The variance starts at its
/// unconditional level after `burn_in` discarded steps.
std::vector<double> simulate_ar_garch(const ArGarchParams& p, std::size_t T, std::uint64_t seed,
                                      std::size_t burn_in = 500);
std::vector<double> simulate_ar_garch(const ArGarchParams& p, std::span<const double> innovation_uniforms);

} // namespace vineport
