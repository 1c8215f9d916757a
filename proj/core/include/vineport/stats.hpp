#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace vineport::stats {

double mean(std::span<const double> x);
/// Sample variance with divisor n - 1.
double variance(std::span<const double> x);
double stddev(std::span<const double> x);
double median(std::span<const double> x);
double skewness(std::span<const double> x);
double excess_kurtosis(std::span<const double> x);

/// Kendall's tau-b in O(n log n) (Knight's algorithm).
double kendall_tau(std::span<const double> x, std::span<const double> y);
/// Column-wise ranks scaled by 1/(n+1); ties receive their average rank.
Eigen::MatrixXd pseudo_observations(const Eigen::MatrixXd& data);

/// Pairwise Kendall tau of the columns of an n x d matrix.
Eigen::MatrixXd kendall_matrix(const Eigen::MatrixXd& data);

double normal_cdf(double x);
double normal_quantile(double p);
double normal_pdf(double x);
double student_cdf(double x, double df);
double student_quantile(double p, double df);
/// Upper tail probability of a chi-squared(df) variable.
double chi2_sf(double x, double df);

/// Ordinary least squares fit of y on the columns of X.
struct OlsResult {
    Eigen::VectorXd coef;
    Eigen::VectorXd stderr_;
    Eigen::VectorXd resid;
    double sigma2 = 0.0;
    double r2 = 0.0;
    int rank = 0;
};
OlsResult ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

inline std::span<const double> col(const Eigen::MatrixXd& m, Eigen::Index j) {
    return {m.col(j).data(), static_cast<std::size_t>(m.rows())};
}

} // namespace vineport::stats
