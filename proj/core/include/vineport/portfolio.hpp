#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>

namespace vineport {

enum class Strategy { MaxSharpe, MinCvar, MinVariance };

std::string_view strategy_name(Strategy s);
/// Accepts "sr", "cvar" and "gmv".
Strategy strategy_from_name(std::string_view name);

struct StrategySpec {
    Strategy kind = Strategy::MinCvar;
    double alpha = 0.10;      ///< CVaR tail probability
    double risk_free = 0.0;   ///< per-period, same units as the scenarios
};

void validate(const StrategySpec& s);

/// Negated mean of the floor(alpha T) smallest returns (a positive number
/// for a loss). Throws when T < 1/alpha.
double empirical_cvar(std::span<const double> returns, double alpha);
/// Negated floor(alpha T)-th smallest return, the threshold matching
/// `empirical_cvar`.
double empirical_var(std::span<const double> returns, double alpha);

/// Sample covariance of the scenario columns (divisor S - 1).
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& scenarios);

struct Allocation {
    Eigen::VectorXd weights;
    double objective = 0.0;   ///< variance, CVaR or Sharpe ratio of the weights
    bool fallback = false;    ///< max-SR fell back to GMV
    bool converged = true;
    int iterations = 0;
};

/// Long-only, fully invested problems on an S x d scenario matrix.
Allocation min_variance(const Eigen::MatrixXd& scenarios);
Allocation min_cvar(const Eigen::MatrixXd& scenarios, double alpha);
Allocation max_sharpe(const Eigen::MatrixXd& scenarios, double risk_free = 0.0);
Allocation optimize(const Eigen::MatrixXd& scenarios, const StrategySpec& spec);

double portfolio_variance(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& w);
double portfolio_sharpe(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& w, double risk_free = 0.0);
double portfolio_cvar(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& w, double alpha);

} // namespace vineport
