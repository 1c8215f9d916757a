#pragma once

#include <functional>
#include <span>
#include <vector>

namespace vineport::optim {

using Objective = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
    int max_evals = 20000;
    double ftol = 1e-10;     ///< relative spread of simplex values at convergence
    double atol = 0.0;       ///< absolute spread that also counts as converged
    double initial_step = 0.1;
    int max_restarts = 4;    ///< restart from the best vertex until no further gain
};

struct MinimizeResult {
    std::vector<double> x;
    double fx = 0.0;
    int evals = 0;
    bool converged = false;
};

/// Derivative-free simplex minimization. Non-finite objective values are
/// treated as +inf, so callers can signal infeasible points that way.
MinimizeResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts = {});

struct ScalarMinimum {
    double x = 0.0;
    double fx = 0.0;
};

/// Bounded one-dimensional minimization (Brent).
ScalarMinimum brent_minimize(const std::function<double(double)>& f, double lo, double hi, int bits = 40,
                             int max_iter = 200);

} // namespace vineport::optim
