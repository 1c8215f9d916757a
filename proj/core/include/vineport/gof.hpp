#pragma once

#include "vineport/vine.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>
#include <vector>

namespace vineport {

/// Empirical copula C_n(t) = (1/n) sum_i 1{u_i <= t componentwise}.
class EmpiricalCopula {
public:
    explicit EmpiricalCopula(Eigen::MatrixXd u);
    double operator()(std::span<const double> t) const;
    /// Evaluate at every row of `points`.
    Eigen::VectorXd evaluate(const Eigen::MatrixXd& points) const;
    Eigen::Index size() const { return u_.rows(); }

private:
    Eigen::MatrixXd u_;
};

/// counts(q) = number of rows of `sample` dominated componentwise by row q
/// of `queries` (ties count as dominated).
std::vector<std::size_t> dominance_counts(const Eigen::MatrixXd& sample, const Eigen::MatrixXd& queries);

enum class GofTest { ECP, ECP2 };
enum class GofStatistic { CvM, KS };

std::string_view gof_test_name(GofTest t);
std::string_view gof_statistic_name(GofStatistic s);

struct GofOptions {
    int bootstrap = 200;          ///< B, at least 100
    std::size_t reference = 100000;  ///< M, draws used to evaluate the model copula
    std::uint64_t seed = 1;
};

struct GofReport {
    GofTest test = GofTest::ECP;
    GofStatistic statistic = GofStatistic::CvM;
    double value = 0.0;
    double p_value = 1.0;
    int bootstrap = 0;
    std::size_t reference = 0;
};

/// Statistic of data against a model copula cdf evaluated at the data points.
double gof_statistic(const Eigen::VectorXd& empirical, const Eigen::VectorXd& model, GofStatistic s);

GofReport ecp_test(const Eigen::MatrixXd& u, const VineModel& model, GofStatistic s, const GofOptions& opts = {});
GofReport ecp2_test(const Eigen::MatrixXd& u, const VineModel& model, GofStatistic s, const GofOptions& opts = {});

/// ECP and ECP2 with both statistics, sharing bootstrap samples and refits.
/// Rows are ordered ECP/CvM, ECP/KS, ECP2/CvM, ECP2/KS.
std::vector<GofReport> gof_suite(const Eigen::MatrixXd& u, const VineModel& model, const GofOptions& opts = {});

} // namespace vineport
