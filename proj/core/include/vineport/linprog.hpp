#pragma once

#include <Eigen/Dense>

namespace vineport::optim {

enum class LpStatus { Optimal, Unbounded, IterationLimit };

struct LpResult {
    LpStatus status = LpStatus::Optimal;
    Eigen::VectorXd x;     ///< primal solution
    Eigen::VectorXd dual;  ///< one multiplier per inequality row
    double objective = 0.0;
    int pivots = 0;
};

/// Dense simplex for  max c'x  s.t.  A x <= b,  x >= 0  with b >= 0, so the
/// slack basis is feasible and no phase one is needed. Uses a condensed
/// (Jordan exchange) tableau of size (m+1) x (n+1) and Bland's rule.
LpResult simplex_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                     int max_pivots = 100000);

} // namespace vineport::optim
