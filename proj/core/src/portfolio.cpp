#include "vineport/portfolio.hpp"

#include "vineport/linprog.hpp"
#include "vineport/simplex_qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace vineport {

std::string_view strategy_name(Strategy s) {
    switch (s) {
    case Strategy::MaxSharpe: return "sr";
    case Strategy::MinCvar: return "cvar";
    case Strategy::MinVariance: return "gmv";
    }
    return "?";
}

Strategy strategy_from_name(std::string_view name) {
    if (name == "sr") return Strategy::MaxSharpe;
    if (name == "cvar") return Strategy::MinCvar;
    if (name == "gmv") return Strategy::MinVariance;
    throw std::invalid_argument("unknown strategy '" + std::string(name) + "' (expected sr, cvar or gmv)");
}

void validate(const StrategySpec& s) {
    if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw std::invalid_argument("strategy alpha must lie in (0, 1)");
    if (!std::isfinite(s.risk_free)) throw std::invalid_argument("risk_free must be finite");
}

namespace {

std::size_t tail_count(std::size_t n, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("cvar level must lie in (0, 1)");
    const auto k = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n) + 1e-9));
    if (k < 1) throw std::invalid_argument("cvar needs at least 1/alpha observations");
    return k;
}

void check_scenarios(const Eigen::MatrixXd& s) {
    if (s.cols() < 1 || s.rows() < 2) throw std::invalid_argument("scenario matrix needs at least one asset and two rows");
    if (s.rows() < s.cols()) throw std::invalid_argument("scenario matrix needs at least as many rows as assets");
    if (!s.allFinite()) throw std::invalid_argument("scenario matrix has non-finite entries");
}

Eigen::MatrixXd regularized_covariance(const Eigen::MatrixXd& scenarios) {
    Eigen::MatrixXd cov = sample_covariance(scenarios);
    const auto d = cov.rows();
    if (Eigen::LLT<Eigen::MatrixXd>(cov).info() == Eigen::Success) return cov;
    const double ridge = 1e-10 * std::max(cov.trace(), 1e-300) / static_cast<double>(d);
    cov.diagonal().array() += ridge;
    if (Eigen::LLT<Eigen::MatrixXd>(cov).info() != Eigen::Success)
        throw std::runtime_error("scenario covariance is not positive definite after regularization");
    return cov;
}

Eigen::VectorXd clean_weights(Eigen::VectorXd w) {
    w = w.cwiseMax(0.0);
    const double s = w.sum();
    if (!(s > 0.0)) throw std::runtime_error("optimizer returned a zero weight vector");
    return w / s;
}

} // namespace

double empirical_cvar(std::span<const double> returns, double alpha) {
    const std::size_t k = tail_count(returns.size(), alpha);
    std::vector<double> r(returns.begin(), returns.end());
    std::nth_element(r.begin(), r.begin() + static_cast<long>(k - 1), r.end());
    std::sort(r.begin(), r.begin() + static_cast<long>(k));
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += r[i];
    return -sum / static_cast<double>(k);
}

double empirical_var(std::span<const double> returns, double alpha) {
    const std::size_t k = tail_count(returns.size(), alpha);
    std::vector<double> r(returns.begin(), returns.end());
    std::nth_element(r.begin(), r.begin() + static_cast<long>(k - 1), r.end());
    return -r[k - 1];
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& scenarios) {
    if (scenarios.rows() < 2) throw std::invalid_argument("covariance needs at least two rows");
    const Eigen::RowVectorXd mean = scenarios.colwise().mean();
    const Eigen::MatrixXd c = scenarios.rowwise() - mean;
    return (c.transpose() * c) / static_cast<double>(scenarios.rows() - 1);
}

double portfolio_variance(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& w) {
    return w.dot(sample_covariance(scenarios) * w);
}

double portfolio_sharpe(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& w, double risk_free) {
    const Eigen::VectorXd mu = scenarios.colwise().mean().transpose();
    const double sd = std::sqrt(std::max(portfolio_variance(scenarios, w), 0.0));
    return (w.dot(mu) - risk_free) / sd;
}

double portfolio_cvar(const Eigen::MatrixXd& scenarios, const Eigen::VectorXd& w, double alpha) {
    const Eigen::VectorXd r = scenarios * w;
    return empirical_cvar({r.data(), static_cast<std::size_t>(r.size())}, alpha);
}

Allocation min_variance(const Eigen::MatrixXd& scenarios) {
    check_scenarios(scenarios);
    const auto d = scenarios.cols();
    const Eigen::MatrixXd cov = regularized_covariance(scenarios);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d));
    auto qp = optim::active_set_qp(cov, Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d), 1.0, x0, 50 * static_cast<int>(d) + 100);
    Allocation out;
    out.weights = clean_weights(qp.x);
    out.objective = out.weights.dot(cov * out.weights);
    out.converged = qp.converged;
    out.iterations = qp.iterations;
    return out;
}

// Kelley cutting planes on f(w) = mean of the k largest scenario losses.
// Every cut is f(w) >= g'w with g the mean of the negated tail scenarios, so
// the master problem min_w max_j g_j'w over the simplex is a matrix game,
// solved as  max 1'y  s.t. (G + c) y <= 1, y >= 0.
Allocation min_cvar(const Eigen::MatrixXd& scenarios, double alpha) {
    check_scenarios(scenarios);
    const auto S = scenarios.rows();
    const auto d = scenarios.cols();
    const std::size_t k = tail_count(static_cast<std::size_t>(S), alpha);

    std::vector<Eigen::Index> idx(static_cast<std::size_t>(S));
    auto evaluate = [&](const Eigen::VectorXd& w, Eigen::VectorXd& g) {
        const Eigen::VectorXd r = scenarios * w;
        for (Eigen::Index i = 0; i < S; ++i) idx[i] = i;
        std::nth_element(idx.begin(), idx.begin() + static_cast<long>(k - 1), idx.end(),
                         [&](Eigen::Index a, Eigen::Index b) { return r(a) < r(b) || (r(a) == r(b) && a < b); });
        g = Eigen::VectorXd::Zero(d);
        for (std::size_t i = 0; i < k; ++i) g -= scenarios.row(idx[i]).transpose();
        g /= static_cast<double>(k);
        return g.dot(w);
    };

    Allocation out;
    std::vector<Eigen::VectorXd> cuts;
    Eigen::VectorXd best_w = Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d));
    double upper = std::numeric_limits<double>::infinity();
    Eigen::VectorXd g;
    auto add_cut = [&](const Eigen::VectorXd& w) {
        const double f = evaluate(w, g);
        cuts.push_back(g);
        if (f < upper) {
            upper = f;
            best_w = w;
        }
    };
    add_cut(best_w);
    for (Eigen::Index j = 0; j < d; ++j) add_cut(Eigen::VectorXd::Unit(d, j));

    out.converged = false;
    const int max_iter = 1000;
    for (out.iterations = 0; out.iterations < max_iter; ++out.iterations) {
        const auto m = static_cast<Eigen::Index>(cuts.size());
        Eigen::MatrixXd G(m, d);
        for (Eigen::Index i = 0; i < m; ++i) G.row(i) = cuts[i].transpose();
        const double shift = 1.0 - G.minCoeff();
        const Eigen::MatrixXd A = G.array() + shift;
        auto lp = optim::simplex_max(A, Eigen::VectorXd::Ones(m), Eigen::VectorXd::Ones(d));
        if (lp.status != optim::LpStatus::Optimal || !(lp.objective > 0.0))
            throw std::runtime_error("min_cvar: master problem failed");
        const Eigen::VectorXd w = clean_weights(lp.x);
        const double lower = (G * w).maxCoeff();
        if (upper - lower <= 1e-10 * (1.0 + std::abs(upper))) {
            out.converged = true;
            break;
        }
        add_cut(w);
    }
    out.weights = best_w;
    out.objective = portfolio_cvar(scenarios, best_w, alpha);
    return out;
}

Allocation max_sharpe(const Eigen::MatrixXd& scenarios, double risk_free) {
    check_scenarios(scenarios);
    const auto d = scenarios.cols();
    const Eigen::VectorXd excess = scenarios.colwise().mean().transpose().array() - risk_free;
    Eigen::Index top = 0;
    const double best = excess.maxCoeff(&top);
    if (!(best > 0.0)) {
        Allocation out = min_variance(scenarios);
        out.fallback = true;
        out.objective = portfolio_sharpe(scenarios, out.weights, risk_free);
        return out;
    }
    const Eigen::MatrixXd cov = regularized_covariance(scenarios);
    Eigen::VectorXd y0 = Eigen::VectorXd::Zero(d);
    y0(top) = 1.0 / best;
    auto qp = optim::active_set_qp(cov, Eigen::VectorXd::Zero(d), excess, 1.0, y0, 50 * static_cast<int>(d) + 100);
    Allocation out;
    out.weights = clean_weights(qp.x);
    out.converged = qp.converged;
    out.iterations = qp.iterations;
    out.objective = portfolio_sharpe(scenarios, out.weights, risk_free);
    return out;
}

Allocation optimize(const Eigen::MatrixXd& scenarios, const StrategySpec& spec) {
    validate(spec);
    switch (spec.kind) {
    case Strategy::MaxSharpe: return max_sharpe(scenarios, spec.risk_free);
    case Strategy::MinCvar: return min_cvar(scenarios, spec.alpha);
    case Strategy::MinVariance: return min_variance(scenarios);
    }
    throw std::invalid_argument("unknown strategy");
}

} // namespace vineport
