#pragma once

#include <Eigen/Dense>

namespace vineport::optim {

struct QpResult {
    Eigen::VectorXd x;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Primal active-set solver for
///     min 0.5 x'Qx + c'x   s.t.  a'x = b,  x >= 0
/// with Q symmetric positive definite on the feasible face. `x0` must be
/// feasible; bounds with x0_i == 0 start in the working set.
QpResult active_set_qp(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c, const Eigen::VectorXd& a, double b,
                       Eigen::VectorXd x0, int max_iter = 500);

} // namespace vineport::optim
