#include "vineport/bicop.hpp"
#include "vineport/optim.hpp"
#include "vineport/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace vineport {

namespace {

constexpr double kNuCap = 50.0;

void check_sample(std::span<const double> u1, std::span<const double> u2) {
    if (u1.size() != u2.size()) throw std::invalid_argument("fit_bicop: u1 and u2 differ in length");
    if (u1.size() < 30) throw std::invalid_argument("fit_bicop: need at least 30 observations");
    for (auto span : {u1, u2}) {
        std::vector<double> s(span.begin(), span.end());
        for (double x : s)
            if (!std::isfinite(x)) throw std::invalid_argument("fit_bicop: non-finite observation");
        std::sort(s.begin(), s.end());
        std::size_t ties = 0;
        for (std::size_t i = 1; i < s.size(); ++i) ties += s[i] == s[i - 1];
        if (2 * ties > s.size()) throw std::invalid_argument("fit_bicop: degenerate data (more than half tied)");
    }
}

double loglik_of(const BicopSpec& s, std::span<const double> u1, std::span<const double> u2) {
    try {
        double ll = Bicop(s).loglik(u1, u2);
        return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
    } catch (const std::invalid_argument&) {
        return -std::numeric_limits<double>::infinity();
    }
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// Start from tau inversion, with tau pulled into the family's reach.
BicopSpec tau_start(Family f, int rotation, double tau) {
    double t = std::clamp(tau, -0.95, 0.95);
    bool negated = rotation == 90 || rotation == 270;
    double base = negated ? -t : t;
    switch (f) {
    case Family::Clayton:
    case Family::Gumbel:
    case Family::Joe:
    case Family::BB1:
    case Family::BB6:
    case Family::BB7:
    case Family::BB8: base = std::clamp(base, 0.01, 0.9); break;
    case Family::Frank: base = std::clamp(base, -0.85, 0.85); break;
    default: break;
    }
    double signed_tau = negated ? -base : base;
    try {
        return tau_to_param(f, rotation, signed_tau);
    } catch (const std::domain_error&) {
        auto box = parameter_box(f);
        BicopSpec s{f, rotation, {box.lower[0], box.lower[1]}};
        return s;
    }
}

BicopFit finish(const BicopSpec& s, double ll, std::size_t n, bool converged) {
    BicopFit out;
    out.spec = s;
    out.loglik = ll;
    out.n = n;
    out.aic = -2.0 * ll + 2.0 * parameter_count(s.family);
    out.converged = converged;
    return out;
}

BicopFit fit_gaussian(std::span<const double> u1, std::span<const double> u2, double tau) {
    const std::size_t n = u1.size();
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = stats::normal_quantile(std::clamp(u1[i], 1e-10, 1 - 1e-10));
        y[i] = stats::normal_quantile(std::clamp(u2[i], 1e-10, 1 - 1e-10));
    }
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += x[i] * x[i] + y[i] * y[i];
        sxy += x[i] * y[i];
    }
    auto nll = [&](double r) {
        double q = 1.0 - r * r;
        return 0.5 * n * std::log(q) + (r * r * sxx - 2.0 * r * sxy) / (2.0 * q);
    };
    auto m = optim::brent_minimize(nll, -0.999, 0.999, 52);
    double start = std::clamp(std::sin(std::numbers::pi * tau / 2.0), -0.999, 0.999);
    double r = nll(start) < m.fx ? start : m.x;
    BicopSpec s{Family::Gaussian, 0, {r, 0.0}};
    return finish(s, -nll(r), n, true);
}

BicopFit fit_student(std::span<const double> u1, std::span<const double> u2, double tau,
                     const BicopSpec* warm = nullptr) {
    const std::size_t n = u1.size();
    auto box = parameter_box(Family::StudentT);
    std::vector<double> a(n), b(n), x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = std::clamp(u1[i], 1e-10, 1 - 1e-10);
        b[i] = std::clamp(u2[i], 1e-10, 1 - 1e-10);
    }
    double rho_tau = std::clamp(std::sin(std::numbers::pi * tau / 2.0), -0.99, 0.99);
    double best_rho = rho_tau;
    auto profile = [&](double nu) {
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = stats::student_quantile(a[i], nu);
            y[i] = stats::student_quantile(b[i], nu);
        }
        double c = std::lgamma((nu + 2) / 2) + std::lgamma(nu / 2) - 2 * std::lgamma((nu + 1) / 2);
        double marg = 0.0;
        for (std::size_t i = 0; i < n; ++i) marg += std::log1p(x[i] * x[i] / nu) + std::log1p(y[i] * y[i] / nu);
        marg *= 0.5 * (nu + 1);
        auto nll = [&](double r) {
            double q = 1 - r * r;
            double s = 0;
            for (std::size_t i = 0; i < n; ++i)
                s += std::log1p((x[i] * x[i] + y[i] * y[i] - 2 * r * x[i] * y[i]) / (nu * q));
            return -(n * (c - 0.5 * std::log(q)) - 0.5 * (nu + 2) * s + marg);
        };
        auto m = optim::brent_minimize(nll, box.lower[0], box.upper[0], 30, 100);
        double fs = nll(rho_tau);
        if (fs < m.fx) m = {rho_tau, fs};
        best_rho = m.x;
        return m.fx;
    };
    // optimise over log(nu - 2) for a better-conditioned profile
    auto to_nu = [&](double z) { return 2.0 + std::exp(z); };
    double zlo = std::log(box.lower[1] - 2.0), zhi = std::log(box.upper[1] - 2.0);
    auto outer = optim::brent_minimize([&](double z) { return profile(to_nu(z)); }, zlo, zhi, 24, 60);
    double nu = to_nu(outer.x);
    double fx = profile(nu);
    double rho = best_rho;
    BicopSpec s{Family::StudentT, 0, {rho, std::clamp(nu, box.lower[1], box.upper[1])}};
    double ll = -fx;
    if (warm) {
        double wl = loglik_of(*warm, u1, u2);
        if (wl > ll) {
            s = *warm;
            ll = wl;
        }
    }
    if (s.params[1] >= kNuCap - 1e-3) return fit_gaussian(u1, u2, tau);
    return finish(s, ll, n, true);
}

BicopFit fit_one_param(std::span<const double> u1, std::span<const double> u2, Family f, int rotation,
                       const BicopSpec& start) {
    auto box = parameter_box(f);
    BicopSpec s{f, rotation, {0.0, 0.0}};
    auto nll = [&](double p) {
        s.params[0] = p;
        return -loglik_of(s, u1, u2);
    };
    auto m = optim::brent_minimize(nll, box.lower[0], box.upper[0], 40, 200);
    double fs = nll(start.params[0]);
    double p = fs < m.fx ? start.params[0] : m.x;
    s.params[0] = p;
    return finish(s, -std::min(fs, m.fx), u1.size(), true);
}

BicopFit fit_two_param(std::span<const double> u1, std::span<const double> u2, Family f, int rotation,
                       double tau, const BicopSpec& start) {
    auto box = parameter_box(f);
    auto to_param = [&](std::span<const double> z, int i) {
        return box.lower[i] + (box.upper[i] - box.lower[i]) * logistic(z[i]);
    };
    auto to_free = [&](double p, int i) {
        double frac = (p - box.lower[i]) / (box.upper[i] - box.lower[i]);
        return logit(std::clamp(frac, 1e-4, 1 - 1e-4));
    };
    BicopSpec s{f, rotation, {0.0, 0.0}};
    auto nll = [&](std::span<const double> z) {
        s.params = {to_param(z, 0), to_param(z, 1)};
        return -loglik_of(s, u1, u2);
    };
    std::vector<std::vector<double>> starts;
    starts.push_back({to_free(start.params[0], 0), to_free(start.params[1], 1)});
    // an interior start that splits dependence between the two parameters
    double t = std::clamp(rotation == 90 || rotation == 270 ? -tau : tau, 0.05, 0.9);
    switch (f) {
    case Family::BB1: {
        double de = 1.5;
        double th = std::max(2.0 / (de * (1.0 - t)) - 2.0, 0.05);
        starts.push_back({to_free(th, 0), to_free(de, 1)});
        break;
    }
    case Family::BB6: starts.push_back({to_free(1.5, 0), to_free(std::max(1.0 / (1.0 - t) / 1.3, 1.05), 1)}); break;
    case Family::BB7: starts.push_back({to_free(1.5, 0), to_free(std::max(2.0 * t / (1.0 - t) / 1.5, 0.05), 1)}); break;
    case Family::BB8: starts.push_back({to_free(std::min(2.0 * (1.0 + 3.0 * t), 7.5), 0), to_free(0.7, 1)}); break;
    default: break;
    }
    double start_ll = loglik_of(start, u1, u2);
    BicopSpec best = start;
    double best_ll = start_ll;
    bool converged = false;
    optim::NelderMeadOptions opts;
    opts.max_evals = 3000;
    opts.ftol = 1e-10;
    opts.atol = 1e-4;
    opts.initial_step = 0.5;
    opts.max_restarts = 1;
    for (auto& z0 : starts) {
        auto r = optim::nelder_mead(nll, z0, opts);
        if (-r.fx > best_ll) {
            best_ll = -r.fx;
            best = {f, rotation, {to_param(r.x, 0), to_param(r.x, 1)}};
            converged = r.converged;
        }
    }
    if (!std::isfinite(best_ll)) throw std::runtime_error("fit_bicop: likelihood is not finite anywhere");
    return finish(best, best_ll, u1.size(), converged || best == start);
}

BicopFit fit_impl(std::span<const double> u1, std::span<const double> u2, Family family, int rotation,
                  const BicopSpec* warm) {
    check_sample(u1, u2);
    if (!rotation_allowed(family, rotation)) throw std::invalid_argument("fit_bicop: illegal rotation for family");
    double tau = stats::kendall_tau(u1, u2);
    switch (family) {
    case Family::Independence: return finish(BicopSpec{}, 0.0, u1.size(), true);
    case Family::Gaussian: return fit_gaussian(u1, u2, tau);
    case Family::StudentT: return fit_student(u1, u2, tau, warm);
    default: break;
    }
    BicopSpec start = tau_start(family, rotation, tau);
    if (warm && loglik_of(*warm, u1, u2) > loglik_of(start, u1, u2)) start = *warm;
    if (parameter_count(family) == 1) return fit_one_param(u1, u2, family, rotation, start);
    return fit_two_param(u1, u2, family, rotation, tau, start);
}

} // namespace

BicopFit fit_bicop(std::span<const double> u1, std::span<const double> u2, Family family, int rotation) {
    return fit_impl(u1, u2, family, rotation, nullptr);
}

BicopFit refit_bicop(std::span<const double> u1, std::span<const double> u2, const BicopSpec& spec) {
    validate(spec);
    return fit_impl(u1, u2, spec.family, spec.rotation, &spec);
}

bool reject_independence(double tau, std::size_t n, double level) {
    if (n < 2) return false;
    double nn = static_cast<double>(n);
    double stat = std::abs(tau) * std::sqrt(9.0 * nn * (nn - 1.0) / (2.0 * (2.0 * nn + 5.0)));
    return stat > stats::normal_quantile(1.0 - level / 2.0);
}

std::vector<FamilyRotation> expand_candidates(std::span<const Family> families, std::optional<double> tau_sign) {
    std::vector<FamilyRotation> out;
    for (Family f : families) {
        if (f == Family::Independence) {
            out.push_back({f, 0});
            continue;
        }
        if (!rotation_allowed(f, 90)) {
            out.push_back({f, 0});
            continue;
        }
        bool pos = !tau_sign || *tau_sign >= 0.0;
        bool neg = !tau_sign || *tau_sign < 0.0;
        if (pos) {
            out.push_back({f, 0});
            out.push_back({f, 180});
        }
        if (neg) {
            out.push_back({f, 90});
            out.push_back({f, 270});
        }
    }
    return out;
}

BicopFit select_bicop(std::span<const double> u1, std::span<const double> u2, std::span<const FamilyRotation> candidates,
                      bool independence_test, double independence_level) {
    if (candidates.empty()) throw std::invalid_argument("select_bicop: candidate set is empty");
    check_sample(u1, u2);
    const std::size_t n = u1.size();
    if (independence_test) {
        double tau = stats::kendall_tau(u1, u2);
        if (!reject_independence(tau, n, independence_level)) return finish(BicopSpec{}, 0.0, n, true);
    }
    std::optional<BicopFit> best;
    for (const auto& c : candidates) {
        BicopFit fit;
        try {
            fit = fit_bicop(u1, u2, c.family, c.rotation);
        } catch (const std::runtime_error&) {
            continue;
        }
        if (!std::isfinite(fit.aic)) continue;
        if (!best || fit.aic < best->aic) best = fit;
    }
    if (!best) return finish(BicopSpec{}, 0.0, n, false);
    return *best;
}

BicopFit select_bicop(std::span<const double> u1, std::span<const double> u2, const SelectionOptions& opts) {
    std::optional<double> sign;
    if (opts.rotation_by_tau_sign) {
        if (u1.size() != u2.size()) throw std::invalid_argument("select_bicop: u1 and u2 differ in length");
        sign = stats::kendall_tau(u1, u2);
    }
    auto cands = expand_candidates(opts.families, sign);
    return select_bicop(u1, u2, cands, opts.independence_test, opts.independence_level);
}

} // namespace vineport
