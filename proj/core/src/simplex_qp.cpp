#include "vineport/simplex_qp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace vineport::optim {

QpResult active_set_qp(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c, const Eigen::VectorXd& a, double b,
                       Eigen::VectorXd x, int max_iter) {
    const Eigen::Index n = Q.rows();
    if (Q.cols() != n || c.size() != n || a.size() != n || x.size() != n)
        throw std::invalid_argument("active_set_qp: dimension mismatch");
    if (std::abs(a.dot(x) - b) > 1e-8 * (1.0 + std::abs(b)) || (x.array() < -1e-12).any())
        throw std::invalid_argument("active_set_qp: starting point is infeasible");
    x = x.cwiseMax(0.0);

    std::vector<bool> active(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) active[i] = x(i) == 0.0;

    QpResult out;
    const double scale = std::max(1.0, Q.diagonal().cwiseAbs().maxCoeff());
    for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!active[i]) free.push_back(i);
        const auto k = static_cast<Eigen::Index>(free.size());
        const Eigen::VectorXd g = Q * x + c;

        // Equality-constrained step on the free face: [Q_FF a_F; a_F' 0].
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(k + 1, k + 1);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
        for (Eigen::Index r = 0; r < k; ++r) {
            for (Eigen::Index s = 0; s < k; ++s) K(r, s) = Q(free[r], free[s]);
            K(r, k) = K(k, r) = a(free[r]);
            rhs(r) = -g(free[r]);
        }
        const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
        Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
        for (Eigen::Index r = 0; r < k; ++r) p(free[r]) = sol(r);
        const double nu = -sol(k);  // gradient of the Lagrangian: g + Qp - nu a = 0 on F

        if (p.lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
            // Multipliers of the active bounds: mu_i = g_i - nu a_i must be >= 0.
            Eigen::Index drop = -1;
            double most_negative = -1e-11 * scale;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!active[i]) continue;
                const double mu = g(i) - nu * a(i);
                if (mu < most_negative) {
                    most_negative = mu;
                    drop = i;
                }
            }
            if (drop < 0) {
                out.converged = true;
                break;
            }
            active[drop] = false;
            continue;
        }

        double step = 1.0;
        Eigen::Index block = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (active[i] || p(i) >= 0.0) continue;
            const double t = -x(i) / p(i);
            if (t < step) {
                step = t;
                block = i;
            }
        }
        x += step * p;
        if (block >= 0) {
            x(block) = 0.0;
            active[block] = true;
        }
    }
    x = x.cwiseMax(0.0);
    out.x = x;
    out.objective = 0.5 * x.dot(Q * x) + c.dot(x);
    return out;
}

} // namespace vineport::optim
