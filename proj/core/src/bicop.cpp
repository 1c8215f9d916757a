#include "vineport/bicop.hpp"

#include "vineport/rng.hpp"
#include "vineport/stats.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vineport {

namespace {

constexpr double kClampLo = 1e-10;
constexpr double kClampHi = 1.0 - 1e-10;

double clamp_u(double u) {
    if (std::isnan(u)) throw std::invalid_argument("copula argument is NaN");
    return std::clamp(u, kClampLo, kClampHi);
}

using Real = long double;

// Second-order jet: value and first two derivatives with respect to u.
template <class R>
struct Jet {
    R v, d, dd;
};

template <class R> Jet<R> operator+(Jet<R> a, R c) { return {a.v + c, a.d, a.dd}; }
template <class R> Jet<R> operator-(Jet<R> a) { return {-a.v, -a.d, -a.dd}; }
template <class R> Jet<R> operator*(R c, Jet<R> a) { return {c * a.v, c * a.d, c * a.dd}; }

template <class R> Jet<R> chain(Jet<R> x, R f, R f1, R f2) { return {f, f1 * x.d, f2 * x.d * x.d + f1 * x.dd}; }

template <class R> R lg(R x) { return std::log(x); }
template <class R> R l1p(R x) { return std::log1p(x); }
template <class R> R em1(R x) { return std::expm1(x); }
template <class R> R pw(R x, R a) { return std::pow(x, a); }
template <class R> Jet<R> lg(Jet<R> x) { return chain(x, std::log(x.v), 1 / x.v, -1 / (x.v * x.v)); }
template <class R> Jet<R> l1p(Jet<R> x) {
    R p = 1 + x.v;
    return chain(x, std::log1p(x.v), 1 / p, -1 / (p * p));
}
template <class R> Jet<R> em1(Jet<R> x) {
    R e = std::exp(x.v);
    return chain(x, std::expm1(x.v), e, e);
}
// log(1 - exp(x)) for x < 0
template <class R> R l1me(R x) { return x < R(-0.6931471805599453) ? std::log1p(-std::exp(x)) : std::log(-std::expm1(x)); }
template <class R> Jet<R> l1me(Jet<R> x) {
    R g = std::expm1(-x.v);
    return chain(x, l1me(x.v), -1 / g, -std::exp(-x.v) / (g * g));
}
template <class R> Jet<R> pw(Jet<R> x, R a) {
    R p = std::pow(x.v, a - 2);
    return chain(x, p * x.v * x.v, a * p * x.v, a * (a - 1) * p);
}

// Generators phi of the Archimedean families handled through the generic
// path. `T` is a real type or a jet over it.
template <class R, class T>
T generator(Family f, R th, R de, R bb8_log_eta, T u) {
    const R one = 1;
    switch (f) {
    case Family::Clayton: return (one / th) * em1(-th * lg(u));
    case Family::Gumbel: return pw(-lg(u), th);
    case Family::Joe: return -l1me(th * l1p(-u));
    case Family::BB1: return pw(em1(-th * lg(u)), de);
    case Family::BB6: return pw(-l1me(th * l1p(-u)), de);
    case Family::BB7: return pw(-em1(th * l1p(-u)), -de) + (-one);
    case Family::BB8: return -l1me(th * l1p(-de * u)) + bb8_log_eta;
    default: throw std::logic_error("generator: not a generic Archimedean family");
    }
}

template <class R>
R generator_inverse(Family f, R th, R de, R bb8_log_eta, R s) {
    switch (f) {
    case Family::Clayton: return std::exp(-std::log1p(th * s) / th);
    case Family::Gumbel: return std::exp(-std::pow(s, 1 / th));
    case Family::Joe: return -std::expm1(l1me(-s) / th);
    case Family::BB1: return std::exp(-std::log1p(std::pow(s, 1 / de)) / th);
    case Family::BB6: return -std::expm1(l1me(-std::pow(s, 1 / de)) / th);
    case Family::BB7: return -std::expm1(l1me(-std::log1p(s) / de) / th);
    case Family::BB8: {
        R eta = std::exp(bb8_log_eta);
        return -std::expm1(std::log1p(-eta * std::exp(-s)) / th) / de;
    }
    default: throw std::logic_error("generator_inverse: not a generic Archimedean family");
    }
}

template <class R>
R arch_cdf(Family f, R th, R de, R le, R u, R v) {
    return generator_inverse<R>(f, th, de, le, generator<R, R>(f, th, de, le, u) + generator<R, R>(f, th, de, le, v));
}

// log c = log phi''(C) + log(-phi'(u)) + log(-phi'(v)) - 3 log(-phi'(C))
template <class R>
R arch_log_pdf(Family f, R th, R de, R le, R u, R v) {
    auto ju = generator<R, Jet<R>>(f, th, de, le, Jet<R>{u, 1, 0});
    auto jv = generator<R, Jet<R>>(f, th, de, le, Jet<R>{v, 1, 0});
    R c = generator_inverse<R>(f, th, de, le, ju.v + jv.v);
    if (!(c > 0)) return -std::numeric_limits<R>::infinity();
    auto jc = generator<R, Jet<R>>(f, th, de, le, Jet<R>{c, 1, 0});
    R q = -jc.d;
    return std::log(jc.dd * (ju.d * jv.d) / (q * q * q));
}

// h(u|v) = phi'(v) / phi'(C(u, v))
template <class R>
R arch_h(Family f, R th, R de, R le, R u, R v) {
    R pu = generator<R, R>(f, th, de, le, u);
    auto jv = generator<R, Jet<R>>(f, th, de, le, Jet<R>{v, 1, 0});
    R c = generator_inverse<R>(f, th, de, le, pu + jv.v);
    if (!(c > 0)) return 0;
    auto jc = generator<R, Jet<R>>(f, th, de, le, Jet<R>{c, 1, 0});
    return jv.d / jc.d;
}

bool is_generic_archimedean(Family f) {
    switch (f) {
    case Family::Clayton:
    case Family::Gumbel:
    case Family::Joe:
    case Family::BB1:
    case Family::BB6:
    case Family::BB7:
    case Family::BB8: return true;
    default: return false;
    }
}

template <class F>
double solve_increasing(F&& g, double target, double lo, double hi) {
    double glo = g(lo) - target;
    if (glo >= 0.0) return lo;
    double ghi = g(hi) - target;
    if (ghi <= 0.0) return hi;
    std::uintmax_t iters = 200;
    auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-13; };
    auto [a, b] = boost::math::tools::toms748_solve([&](double x) { return g(x) - target; }, lo, hi, glo, ghi, tol,
                                                    iters);
    if (iters >= 200) throw std::runtime_error("h-function inversion did not converge");
    return 0.5 * (a + b);
}

} // namespace

// ------------------------------------------------------------ family meta --

int parameter_count(Family f) {
    switch (f) {
    case Family::Independence: return 0;
    case Family::Gaussian:
    case Family::Clayton:
    case Family::Gumbel:
    case Family::Frank:
    case Family::Joe: return 1;
    default: return 2;
    }
}

ParamBox parameter_box(Family f) {
    switch (f) {
    case Family::Independence: return {{0, 0}, {0, 0}};
    case Family::Gaussian: return {{-0.999, 0}, {0.999, 0}};
    case Family::StudentT: return {{-0.999, 2.0001}, {0.999, 50.0}};
    case Family::Clayton: return {{1e-4, 0}, {28.0, 0}};
    case Family::Gumbel: return {{1.0, 0}, {17.0, 0}};
    case Family::Frank: return {{-35.0, 0}, {35.0, 0}};
    case Family::Joe: return {{1.0, 0}, {30.0, 0}};
    case Family::BB1: return {{1e-4, 1.0}, {7.0, 7.0}};
    case Family::BB6: return {{1.0, 1.0}, {6.0, 8.0}};
    case Family::BB7: return {{1.0, 1e-4}, {6.0, 75.0}};
    case Family::BB8: return {{1.0, 1e-4}, {8.0, 1.0}};
    }
    throw std::invalid_argument("unknown family");
}

bool rotation_allowed(Family f, int rotation) {
    if (rotation == 0) return true;
    if (rotation != 90 && rotation != 180 && rotation != 270) return false;
    return is_generic_archimedean(f);
}

std::string_view family_name(Family f) {
    switch (f) {
    case Family::Independence: return "Independence";
    case Family::Gaussian: return "Gaussian";
    case Family::StudentT: return "StudentT";
    case Family::Clayton: return "Clayton";
    case Family::Gumbel: return "Gumbel";
    case Family::Frank: return "Frank";
    case Family::Joe: return "Joe";
    case Family::BB1: return "BB1";
    case Family::BB6: return "BB6";
    case Family::BB7: return "BB7";
    case Family::BB8: return "BB8";
    }
    return "?";
}

std::optional<Family> family_from_name(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "independence" || lower == "indep") return Family::Independence;
    if (lower == "gaussian" || lower == "normal") return Family::Gaussian;
    if (lower == "studentt" || lower == "student" || lower == "t") return Family::StudentT;
    if (lower == "clayton") return Family::Clayton;
    if (lower == "gumbel") return Family::Gumbel;
    if (lower == "frank") return Family::Frank;
    if (lower == "joe") return Family::Joe;
    if (lower == "bb1") return Family::BB1;
    if (lower == "bb6") return Family::BB6;
    if (lower == "bb7") return Family::BB7;
    if (lower == "bb8") return Family::BB8;
    return std::nullopt;
}

int family_code(Family f, int rotation) {
    int base = static_cast<int>(f);
    switch (rotation) {
    case 0: return base;
    case 180: return base + 10;
    case 90: return base + 20;
    case 270: return base + 30;
    default: throw std::invalid_argument("rotation must be 0, 90, 180 or 270");
    }
}

FamilyRotation family_from_code(int code) {
    if (code < 0 || code > 40) throw std::invalid_argument("family code " + std::to_string(code) + " out of range");
    if (code == 0) return {Family::Independence, 0};
    int base = code % 10;
    int offset = code - base;
    if (base == 0) {
        base = 10;
        offset -= 10;
    }
    int rotation = offset == 0 ? 0 : offset == 10 ? 180 : offset == 20 ? 90 : 270;
    auto f = static_cast<Family>(base);
    if (!rotation_allowed(f, rotation))
        throw std::invalid_argument("family code " + std::to_string(code) + " is not a legal family/rotation");
    return {f, rotation};
}

void validate(const BicopSpec& spec) {
    if (!rotation_allowed(spec.family, spec.rotation))
        throw std::invalid_argument(std::string("rotation ") + std::to_string(spec.rotation) + " not allowed for " +
                                    std::string(family_name(spec.family)));
    int k = parameter_count(spec.family);
    auto box = parameter_box(spec.family);
    for (int i = 0; i < k; ++i) {
        double p = spec.params[i];
        if (!std::isfinite(p) || p < box.lower[i] - 1e-12 || p > box.upper[i] + 1e-12)
            throw std::invalid_argument(std::string(family_name(spec.family)) + " parameter " + std::to_string(i + 1) +
                                        " = " + std::to_string(p) + " outside [" + std::to_string(box.lower[i]) + ", " +
                                        std::to_string(box.upper[i]) + "]");
    }
}

// --------------------------------------------------------------- evaluator --

Bicop::Bicop(const BicopSpec& spec) : spec_(spec) {
    validate(spec_);
    switch (spec_.family) {
    case Family::Gaussian:
        rho_ = spec_.params[0];
        one_minus_rho2_ = 1.0 - rho_ * rho_;
        break;
    case Family::StudentT:
        rho_ = spec_.params[0];
        nu_ = spec_.params[1];
        one_minus_rho2_ = 1.0 - rho_ * rho_;
        t_log_const_ = std::lgamma((nu_ + 2.0) / 2.0) + std::lgamma(nu_ / 2.0) - 2.0 * std::lgamma((nu_ + 1.0) / 2.0) -
                       0.5 * std::log(one_minus_rho2_);
        break;
    case Family::Frank:
        theta_ = spec_.params[0];
        frank_em1_ = std::expm1(-theta_);
        break;
    default:
        theta_ = spec_.params[0];
        delta_ = spec_.params[1];
        if (spec_.family == Family::BB8) bb8_log_eta_ = std::log(-std::expm1(theta_ * std::log1p(-delta_)));
        break;
    }
}

double Bicop::quantile(double u) const {
    return spec_.family == Family::StudentT ? stats::student_quantile(u, nu_) : stats::normal_quantile(u);
}

double Bicop::marginal_cdf(double x) const {
    return spec_.family == Family::StudentT ? stats::student_cdf(x, nu_) : stats::normal_cdf(x);
}

double Bicop::elliptical_log_pdf_q(double x, double y) const {
    if (spec_.family == Family::Gaussian) {
        return -0.5 * std::log(one_minus_rho2_) -
               (rho_ * rho_ * (x * x + y * y) - 2.0 * rho_ * x * y) / (2.0 * one_minus_rho2_);
    }
    double q = (x * x + y * y - 2.0 * rho_ * x * y) / (nu_ * one_minus_rho2_);
    return t_log_const_ - 0.5 * (nu_ + 2.0) * std::log1p(q) +
           0.5 * (nu_ + 1.0) * (std::log1p(x * x / nu_) + std::log1p(y * y / nu_));
}

double Bicop::elliptical_h_q(double x, double y) const {
    if (spec_.family == Family::Gaussian) return stats::normal_cdf((x - rho_ * y) / std::sqrt(one_minus_rho2_));
    double scale = std::sqrt((nu_ + y * y) * one_minus_rho2_ / (nu_ + 1.0));
    return stats::student_cdf((x - rho_ * y) / scale, nu_ + 1.0);
}

double Bicop::base_cdf(double u, double v) const {
    switch (spec_.family) {
    case Family::Independence: return u * v;
    case Family::Gaussian:
    case Family::StudentT: {
        if (rho_ == 0.0 && spec_.family == Family::Gaussian) return u * v;
        double x = quantile(u);
        double y = quantile(v);
        bool gauss = spec_.family == Family::Gaussian;
        auto integrand = [&](double t) {
            double dens = gauss ? stats::normal_pdf(t)
                                : std::exp(std::lgamma((nu_ + 1) / 2) - std::lgamma(nu_ / 2) -
                                           0.5 * std::log(nu_ * std::numbers::pi) -
                                           (nu_ + 1) / 2 * std::log1p(t * t / nu_));
            return elliptical_h_q(x, t) * dens;
        };
        double val = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            integrand, -std::numeric_limits<double>::infinity(), y, 15, 1e-13);
        return std::clamp(val, std::max(0.0, u + v - 1.0), std::min(u, v));
    }
    case Family::Frank: {
        if (std::abs(theta_) < 1e-10) return u * v;
        double a = std::expm1(-theta_ * u);
        double b = std::expm1(-theta_ * v);
        return -std::log1p(a * b / frank_em1_) / theta_;
    }
    default: {
        double c = arch_cdf<double>(spec_.family, theta_, delta_, bb8_log_eta_, u, v);
        if (std::isfinite(c)) return c;
        return static_cast<double>(arch_cdf<Real>(spec_.family, theta_, delta_, bb8_log_eta_, u, v));
    }
    }
}

double Bicop::base_log_pdf(double u, double v) const {
    switch (spec_.family) {
    case Family::Independence: return 0.0;
    case Family::Gaussian:
    case Family::StudentT: return elliptical_log_pdf_q(quantile(u), quantile(v));
    case Family::Frank: {
        if (std::abs(theta_) < 1e-10) return 0.0;
        double a = std::expm1(-theta_ * u);
        double b = std::expm1(-theta_ * v);
        double den = frank_em1_ + a * b;
        return std::log(-theta_ * frank_em1_) - theta_ * (u + v) - 2.0 * std::log(std::abs(den));
    }
    default: {
        double out = arch_log_pdf<double>(spec_.family, theta_, delta_, bb8_log_eta_, u, v);
        if (std::isfinite(out)) return out;
        return static_cast<double>(arch_log_pdf<Real>(spec_.family, theta_, delta_, bb8_log_eta_, u, v));
    }
    }
}

double Bicop::base_h(double u, double v) const {
    switch (spec_.family) {
    case Family::Independence: return u;
    case Family::Gaussian:
    case Family::StudentT: return elliptical_h_q(quantile(u), quantile(v));
    case Family::Frank: {
        if (std::abs(theta_) < 1e-10) return u;
        double a = std::expm1(-theta_ * u);
        double b = std::expm1(-theta_ * v);
        return std::clamp(std::exp(-theta_ * v) * a / (frank_em1_ + a * b), 0.0, 1.0);
    }
    default: {
        double h = arch_h<double>(spec_.family, theta_, delta_, bb8_log_eta_, u, v);
        if (!std::isfinite(h)) h = static_cast<double>(arch_h<Real>(spec_.family, theta_, delta_, bb8_log_eta_, u, v));
        if (!std::isfinite(h)) return 0.0;
        return std::clamp(h, 0.0, 1.0);
    }
    }
}

double Bicop::base_hinv(double w, double v) const {
    switch (spec_.family) {
    case Family::Independence: return w;
    case Family::Gaussian: {
        double y = quantile(v);
        return stats::normal_cdf(stats::normal_quantile(w) * std::sqrt(one_minus_rho2_) + rho_ * y);
    }
    case Family::StudentT: {
        double y = quantile(v);
        double scale = std::sqrt((nu_ + y * y) * one_minus_rho2_ / (nu_ + 1.0));
        return stats::student_cdf(stats::student_quantile(w, nu_ + 1.0) * scale + rho_ * y, nu_);
    }
    case Family::Frank: {
        if (std::abs(theta_) < 1e-10) return w;
        double b = std::expm1(-theta_ * v);
        double a = w * frank_em1_ / (std::exp(-theta_ * v) - w * b);
        return -std::log1p(a) / theta_;
    }
    case Family::Clayton: {
        // closed form: u = ((w^{-th/(1+th)} - 1) v^{-th} + 1)^{-1/th}
        double th = theta_;
        double t = std::expm1(-th / (1.0 + th) * std::log(w)) * std::pow(v, -th);
        return std::exp(-std::log1p(t) / th);
    }
    default: return solve_increasing([&](double x) { return base_h(x, v); }, w, kClampLo, kClampHi);
    }
}

double Bicop::cdf(double u1, double u2) const {
    if (u1 <= 0.0 || u2 <= 0.0) return 0.0;
    if (u1 >= 1.0) return std::min(u2, 1.0);
    if (u2 >= 1.0) return u1;
    u1 = clamp_u(u1);
    u2 = clamp_u(u2);
    switch (spec_.rotation) {
    case 0: return base_cdf(u1, u2);
    case 180: return u1 + u2 - 1.0 + base_cdf(1.0 - u1, 1.0 - u2);
    case 90: return u2 - base_cdf(1.0 - u1, u2);
    default: return u1 - base_cdf(u1, 1.0 - u2);
    }
}

double Bicop::log_pdf(double u1, double u2) const {
    u1 = clamp_u(u1);
    u2 = clamp_u(u2);
    switch (spec_.rotation) {
    case 0: return base_log_pdf(u1, u2);
    case 180: return base_log_pdf(1.0 - u1, 1.0 - u2);
    case 90: return base_log_pdf(1.0 - u1, u2);
    default: return base_log_pdf(u1, 1.0 - u2);
    }
}

double Bicop::pdf(double u1, double u2) const { return std::exp(log_pdf(u1, u2)); }

double Bicop::hfunc1(double u1, double u2) const {
    u1 = clamp_u(u1);
    u2 = clamp_u(u2);
    switch (spec_.rotation) {
    case 0: return base_h(u2, u1);
    case 180: return 1.0 - base_h(1.0 - u2, 1.0 - u1);
    case 90: return base_h(u2, 1.0 - u1);
    default: return 1.0 - base_h(1.0 - u2, u1);
    }
}

double Bicop::hfunc2(double u1, double u2) const {
    u1 = clamp_u(u1);
    u2 = clamp_u(u2);
    switch (spec_.rotation) {
    case 0: return base_h(u1, u2);
    case 180: return 1.0 - base_h(1.0 - u1, 1.0 - u2);
    case 90: return 1.0 - base_h(1.0 - u1, u2);
    default: return base_h(u1, 1.0 - u2);
    }
}

double Bicop::hinv1(double w, double u1) const {
    w = clamp_u(w);
    u1 = clamp_u(u1);
    switch (spec_.rotation) {
    case 0: return base_hinv(w, u1);
    case 180: return 1.0 - base_hinv(1.0 - w, 1.0 - u1);
    case 90: return base_hinv(w, 1.0 - u1);
    default: return 1.0 - base_hinv(1.0 - w, u1);
    }
}

double Bicop::hinv2(double w, double u2) const {
    w = clamp_u(w);
    u2 = clamp_u(u2);
    switch (spec_.rotation) {
    case 0: return base_hinv(w, u2);
    case 180: return 1.0 - base_hinv(1.0 - w, 1.0 - u2);
    case 90: return 1.0 - base_hinv(1.0 - w, u2);
    default: return base_hinv(w, 1.0 - u2);
    }
}

double Bicop::loglik(std::span<const double> u1, std::span<const double> u2) const {
    if (u1.size() != u2.size()) throw std::invalid_argument("loglik: length mismatch");
    if (spec_.family == Family::Independence) return 0.0;
    double total = 0.0;
    if (spec_.family == Family::Gaussian || spec_.family == Family::StudentT) {
        for (std::size_t i = 0; i < u1.size(); ++i)
            total += elliptical_log_pdf_q(quantile(clamp_u(u1[i])), quantile(clamp_u(u2[i])));
        return total;
    }
    for (std::size_t i = 0; i < u1.size(); ++i) total += log_pdf(u1[i], u2[i]);
    return total;
}

void Bicop::hfuncs(std::span<const double> u1, std::span<const double> u2, std::span<double> h1,
                   std::span<double> h2) const {
    const std::size_t n = u1.size();
    if (u2.size() != n || (!h1.empty() && h1.size() != n) || (!h2.empty() && h2.size() != n))
        throw std::invalid_argument("hfuncs: length mismatch");
    if (spec_.family == Family::Gaussian || spec_.family == Family::StudentT) {
        for (std::size_t i = 0; i < n; ++i) {
            double x = quantile(clamp_u(u1[i]));
            double y = quantile(clamp_u(u2[i]));
            if (!h1.empty()) h1[i] = elliptical_h_q(y, x);
            if (!h2.empty()) h2[i] = elliptical_h_q(x, y);
        }
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!h1.empty()) h1[i] = hfunc1(u1[i], u2[i]);
        if (!h2.empty()) h2[i] = hfunc2(u1[i], u2[i]);
    }
}

// ---------------------------------------------------------- free functions --

double bicop_cdf(double u1, double u2, const BicopSpec& spec) { return Bicop(spec).cdf(u1, u2); }
double bicop_pdf(double u1, double u2, const BicopSpec& spec) { return Bicop(spec).pdf(u1, u2); }
double hfunc(double u, double v, const BicopSpec& spec) { return Bicop(spec).hfunc2(u, v); }
double hfunc_inv(double w, double v, const BicopSpec& spec) { return Bicop(spec).hinv2(w, v); }

namespace {

double frank_tau(double theta) {
    if (std::abs(theta) < 1e-6) return theta / 9.0;
    auto f = [](double t) { return std::abs(t) < 1e-12 ? 1.0 : t / std::expm1(t); };
    double d1 = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, theta, 10, 1e-14) / theta;
    return 1.0 - 4.0 / theta * (1.0 - d1);
}

double joe_tau(double th) {
    if (std::abs(th - 2.0) < 1e-6) return 2.0 - std::numbers::pi * std::numbers::pi / 6.0;
    return 1.0 + 2.0 / (2.0 - th) * (boost::math::digamma(2.0) - boost::math::digamma(2.0 / th + 1.0));
}

double generator_tau(Family f, double th, double de) {
    const double le = f == Family::BB8 ? std::log(-std::expm1(th * std::log1p(-de))) : 0.0;
    auto ratio = [&](double t) {
        auto j = generator<double, Jet<double>>(f, th, de, le, Jet<double>{t, 1, 0});
        double r = j.v / j.d;
        if (!std::isfinite(r)) {
            auto q = generator<Real, Jet<Real>>(f, th, de, le, Jet<Real>{t, 1, 0});
            r = static_cast<double>(q.v / q.d);
        }
        return std::isfinite(r) ? r : 0.0;
    };
    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    return 1.0 + 4.0 * ts.integrate(ratio, 0.0, 1.0, 1e-12);
}

double base_tau(const BicopSpec& s) {
    double th = s.params[0], de = s.params[1];
    switch (s.family) {
    case Family::Independence: return 0.0;
    case Family::Gaussian:
    case Family::StudentT: return 2.0 / std::numbers::pi * std::asin(th);
    case Family::Clayton: return th / (th + 2.0);
    case Family::Gumbel: return 1.0 - 1.0 / th;
    case Family::Frank: return frank_tau(th);
    case Family::BB1: return 1.0 - 2.0 / (de * (th + 2.0));
    case Family::Joe: return joe_tau(th);
    default: return generator_tau(s.family, th, de);
    }
}

// Monotone root of tau(param) over the family box.
double invert_tau(const std::function<double(double)>& tau_of, double target, double lo, double hi) {
    double tlo = tau_of(lo), thi = tau_of(hi);
    if (target < tlo - 1e-9 || target > thi + 1e-9)
        throw std::domain_error("tau " + std::to_string(target) + " outside the achievable range [" +
                                std::to_string(tlo) + ", " + std::to_string(thi) + "]");
    if (target <= tlo) return lo;
    if (target >= thi) return hi;
    std::uintmax_t iters = 200;
    auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-12 * std::max(1.0, std::abs(a)); };
    auto [a, b] = boost::math::tools::toms748_solve([&](double x) { return tau_of(x) - target; }, lo, hi,
                                                    tlo - target, thi - target, tol, iters);
    return 0.5 * (a + b);
}

} // namespace

double param_to_tau(const BicopSpec& spec) {
    validate(spec);
    double t = base_tau(spec);
    return (spec.rotation == 90 || spec.rotation == 270) ? -t : t;
}

BicopSpec tau_to_param(Family family, int rotation, double tau, double nu) {
    if (!rotation_allowed(family, rotation)) throw std::invalid_argument("illegal rotation for family");
    if (!(tau > -1.0 && tau < 1.0)) throw std::domain_error("tau must lie in (-1, 1)");
    BicopSpec s{family, rotation, {0.0, 0.0}};
    double t = (rotation == 90 || rotation == 270) ? -tau : tau;
    auto box = parameter_box(family);
    auto one = [&](Family f, double lo, double hi) {
        BicopSpec probe{f, 0, {0.0, 0.0}};
        return invert_tau(
            [&](double x) {
                probe.params[0] = x;
                return base_tau(probe);
            },
            t, lo, hi);
    };
    switch (family) {
    case Family::Independence:
        if (std::abs(tau) > 1e-12) throw std::domain_error("independence copula has tau = 0");
        break;
    case Family::Gaussian:
    case Family::StudentT: {
        double rho = std::sin(std::numbers::pi * t / 2.0);
        if (std::abs(rho) > 0.999) throw std::domain_error("tau implies |rho| > 0.999");
        s.params[0] = rho;
        if (family == Family::StudentT) s.params[1] = std::clamp(nu, box.lower[1], box.upper[1]);
        break;
    }
    case Family::Clayton: s.params[0] = one(Family::Clayton, box.lower[0], box.upper[0]); break;
    case Family::Gumbel: s.params[0] = one(Family::Gumbel, box.lower[0], box.upper[0]); break;
    case Family::Frank: s.params[0] = one(Family::Frank, box.lower[0], box.upper[0]); break;
    case Family::Joe: s.params[0] = one(Family::Joe, box.lower[0], box.upper[0]); break;
    case Family::BB1:
        s.params = {one(Family::Clayton, box.lower[0], box.upper[0]), 1.0};
        break;
    case Family::BB6:
        s.params = {1.0, one(Family::Gumbel, box.lower[1], box.upper[1])};
        break;
    case Family::BB7:
        s.params = {1.0, one(Family::Clayton, box.lower[1], box.upper[1])};
        break;
    case Family::BB8:
        s.params = {one(Family::Joe, box.lower[0], box.upper[0]), 1.0};
        break;
    }
    return s;
}

TailDependence tail_dependence(const BicopSpec& spec) {
    validate(spec);
    double th = spec.params[0], de = spec.params[1];
    TailDependence td;
    switch (spec.family) {
    case Family::StudentT: {
        double l = 2.0 * stats::student_cdf(-std::sqrt(de + 1.0) * std::sqrt((1.0 - th) / (1.0 + th)), de + 1.0);
        td = {l, l};
        break;
    }
    case Family::Clayton: td = {std::pow(2.0, -1.0 / th), 0.0}; break;
    case Family::Gumbel:
    case Family::Joe: td = {0.0, 2.0 - std::pow(2.0, 1.0 / th)}; break;
    case Family::BB1: td = {std::pow(2.0, -1.0 / (th * de)), 2.0 - std::pow(2.0, 1.0 / de)}; break;
    case Family::BB6: td = {0.0, 2.0 - std::pow(2.0, 1.0 / (de * th))}; break;
    case Family::BB7: td = {std::pow(2.0, -1.0 / de), 2.0 - std::pow(2.0, 1.0 / th)}; break;
    case Family::BB8: td = {0.0, de >= 1.0 - 1e-12 ? 2.0 - std::pow(2.0, 1.0 / th) : 0.0}; break;
    default: break;
    }
    if (spec.rotation == 180) std::swap(td.lower, td.upper);
    if (spec.rotation == 90 || spec.rotation == 270) td = {0.0, 0.0};
    return td;
}

Eigen::MatrixXd bicop_sample(std::size_t n, const BicopSpec& spec, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("bicop_sample: n must be positive");
    Bicop cop(spec);
    Rng rng(seed);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), 2);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        double w1 = rng.uniform();
        double w2 = rng.uniform();
        out(i, 0) = w1;
        out(i, 1) = cop.hinv1(w2, w1);
    }
    return out;
}

} // namespace vineport
