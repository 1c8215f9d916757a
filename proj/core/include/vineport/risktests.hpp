#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vineport {

/// Aligned daily forecasts and outcomes. VaR and ES are return thresholds
/// (negative numbers for losses); an exceedance is ret < var.
struct HitSequence {
    std::vector<double> ret;
    std::vector<double> var;
    std::vector<double> es;
    std::vector<double> sigma;
    double p = 0.01;
};

void validate(const HitSequence& h);
std::vector<int> exceedances(const HitSequence& h);

/// Kupiec likelihood ratio with the 0 log 0 = 0 convention.
double kupiec_uc(std::size_t T, std::size_t N, double p);
/// Christoffersen first-order Markov independence likelihood ratio.
double christoffersen_ind(const std::vector<int>& hits);

struct VarTestReport {
    std::size_t T = 0;
    std::size_t ne = 0;
    double uc = 0, uc_p = 1;
    double lr_ind = 0;
    double cc = 0, cc_p = 1;
    double dq = 0, dq_p = 1;
    double ad = 0, ae = 0, aql = 0;
    bool degenerate = false;   ///< N == 0 or N == T
    bool dq_computable = true; ///< false on a rank deficient DQ design
};

/// UC, CC, DQ (constant, 4 hit lags and VaR; chi-squared(6)), AD, AE and
/// AQL. Needs T >= 50.
VarTestReport var_backtest(const HitSequence& h);

struct ErTestReport {
    std::size_t exceedances = 0;
    double mean = 0;          ///< mean standardized exceedance residual
    double t = 0;
    double p_bootstrap = 1;   ///< one-sided, small when ES understates risk
    double p_asymptotic = 1;
    int bootstrap = 0;
};

/// Exceedance residuals (ret - es) / sigma on exceedance days, tested against
/// a negative mean with a centred studentized bootstrap. Throws with fewer
/// than 5 exceedances.
ErTestReport es_er_test(const HitSequence& h, int bootstrap = 5000, std::uint64_t seed = 1);

struct CalibrationReport {
    double simple = 0, simple_p = 1;
    int simple_df = 2;
    double general = 0, general_p = 1;
    int general_df = 6;
};

/// Wald tests on the identification functions
///   V1 = p - I_t,  V2 = es_t - var_t + I_t (var_t - ret_t) / p.
/// "simple" uses their unconditional means; "general" interacts both with
/// the instruments (1, V1_{t-1}, V2_{t-1}). Needs T >= 250.
CalibrationReport es_cond_calibration(const HitSequence& h);

} // namespace vineport
