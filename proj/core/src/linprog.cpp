#include "vineport/linprog.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace vineport::optim {

LpResult simplex_max(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c, int max_pivots) {
    const Eigen::Index m = A.rows(), n = A.cols();
    if (b.size() != m || c.size() != n) throw std::invalid_argument("simplex_max: dimension mismatch");
    if ((b.array() < 0.0).any()) throw std::invalid_argument("simplex_max: right-hand side must be nonnegative");

    constexpr double eps = 1e-12;
    Eigen::MatrixXd T(m + 1, n + 1);
    T.topLeftCorner(m, n) = A;
    T.topRightCorner(m, 1) = b;
    T.bottomLeftCorner(1, n) = -c.transpose();
    T(m, n) = 0.0;

    std::vector<Eigen::Index> col_label(n), row_label(m);
    for (Eigen::Index j = 0; j < n; ++j) col_label[j] = j;
    for (Eigen::Index i = 0; i < m; ++i) row_label[i] = n + i;

    LpResult out;
    for (;;) {
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < n; ++j)
            if (T(m, j) < -eps && (enter < 0 || col_label[j] < col_label[enter])) enter = j;
        if (enter < 0) break;

        Eigen::Index leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < m; ++i) {
            if (T(i, enter) <= eps) continue;
            const double ratio = T(i, n) / T(i, enter);
            if (ratio < best - 1e-14 || (ratio <= best + 1e-14 && leave >= 0 && row_label[i] < row_label[leave])) {
                best = ratio;
                leave = i;
            }
        }
        if (leave < 0) {
            out.status = LpStatus::Unbounded;
            return out;
        }
        if (++out.pivots > max_pivots) {
            out.status = LpStatus::IterationLimit;
            break;
        }

        const double p = T(leave, enter);
        const Eigen::RowVectorXd pivot_row = T.row(leave) / p;
        const Eigen::VectorXd pivot_col = T.col(enter);
        for (Eigen::Index i = 0; i <= m; ++i) {
            if (i == leave) continue;
            T.row(i) -= pivot_col(i) * pivot_row;
            T(i, enter) = -pivot_col(i) / p;
        }
        T.row(leave) = pivot_row;
        T(leave, enter) = 1.0 / p;
        std::swap(col_label[enter], row_label[leave]);
    }

    out.x = Eigen::VectorXd::Zero(n);
    out.dual = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i < m; ++i)
        if (row_label[i] < n) out.x(row_label[i]) = T(i, n);
    for (Eigen::Index j = 0; j < n; ++j)
        if (col_label[j] >= n) out.dual(col_label[j] - n) = T(m, j);
    out.objective = T(m, n);
    return out;
}

} // namespace vineport::optim
