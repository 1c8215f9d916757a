#include "vineport/gof.hpp"

#include "vineport/parallel.hpp"
#include "vineport/rng.hpp"
#include "vineport/stats.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>

namespace vineport {

EmpiricalCopula::EmpiricalCopula(Eigen::MatrixXd u) : u_(std::move(u)) {
    if (u_.rows() < 1) throw std::invalid_argument("empirical copula needs at least one observation");
}

double EmpiricalCopula::operator()(std::span<const double> t) const {
    if (static_cast<Eigen::Index>(t.size()) != u_.cols()) throw std::invalid_argument("empirical copula: dimension mismatch");
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < u_.rows(); ++i) {
        bool in = true;
        for (Eigen::Index k = 0; k < u_.cols() && in; ++k) in = u_(i, k) <= t[k];
        count += in;
    }
    return static_cast<double>(count) / static_cast<double>(u_.rows());
}

Eigen::VectorXd EmpiricalCopula::evaluate(const Eigen::MatrixXd& points) const {
    auto c = dominance_counts(u_, points);
    Eigen::VectorXd out(points.rows());
    for (Eigen::Index i = 0; i < points.rows(); ++i) out(i) = static_cast<double>(c[i]) / static_cast<double>(u_.rows());
    return out;
}

std::vector<std::size_t> dominance_counts(const Eigen::MatrixXd& sample, const Eigen::MatrixXd& queries) {
    if (sample.cols() != queries.cols()) throw std::invalid_argument("dominance_counts: dimension mismatch");
    const auto m = static_cast<std::size_t>(sample.rows());
    const auto q = static_cast<std::size_t>(queries.rows());
    const std::size_t words = (m + 63) / 64;
    // acc[i] holds the set of sample rows dominated by query i in all dimensions seen so far
    std::vector<std::uint64_t> acc(q * words, ~std::uint64_t{0});
    if (m % 64 != 0)
        for (std::size_t i = 0; i < q; ++i) acc[i * words + words - 1] = (std::uint64_t{1} << (m % 64)) - 1;
    std::vector<std::size_t> ps(m), qs(q);
    std::vector<std::uint64_t> cur(words);
    for (Eigen::Index k = 0; k < sample.cols(); ++k) {
        std::iota(ps.begin(), ps.end(), 0);
        std::iota(qs.begin(), qs.end(), 0);
        std::sort(ps.begin(), ps.end(), [&](std::size_t a, std::size_t b) { return sample(a, k) < sample(b, k); });
        std::sort(qs.begin(), qs.end(), [&](std::size_t a, std::size_t b) { return queries(a, k) < queries(b, k); });
        std::fill(cur.begin(), cur.end(), 0);
        std::size_t p = 0;
        for (std::size_t qi : qs) {
            const double t = queries(static_cast<Eigen::Index>(qi), k);
            while (p < m && sample(static_cast<Eigen::Index>(ps[p]), k) <= t) {
                cur[ps[p] / 64] |= std::uint64_t{1} << (ps[p] % 64);
                ++p;
            }
            std::uint64_t* row = &acc[qi * words];
            for (std::size_t w = 0; w < words; ++w) row[w] &= cur[w];
        }
    }
    std::vector<std::size_t> out(q);
    for (std::size_t i = 0; i < q; ++i) {
        std::size_t c = 0;
        for (std::size_t w = 0; w < words; ++w) c += static_cast<std::size_t>(std::popcount(acc[i * words + w]));
        out[i] = c;
    }
    return out;
}

std::string_view gof_test_name(GofTest t) { return t == GofTest::ECP ? "ECP" : "ECP2"; }
std::string_view gof_statistic_name(GofStatistic s) { return s == GofStatistic::CvM ? "CvM" : "KS"; }

double gof_statistic(const Eigen::VectorXd& empirical, const Eigen::VectorXd& model, GofStatistic s) {
    if (empirical.size() != model.size()) throw std::invalid_argument("gof_statistic: length mismatch");
    const Eigen::VectorXd diff = empirical - model;
    return s == GofStatistic::CvM ? diff.squaredNorm() : diff.cwiseAbs().maxCoeff();
}

namespace {

bool all_independence(const VineModel& m) {
    for (const auto& t : m.specs)
        for (const auto& s : t)
            if (s.family != Family::Independence) return false;
    return true;
}

Eigen::VectorXd model_cdf(const Eigen::MatrixXd& u, const VineModel& model, std::size_t reference, std::uint64_t seed) {
    if (all_independence(model)) return u.rowwise().prod();
    Eigen::MatrixXd ref = vine_simulate(model, reference, seed);
    auto c = dominance_counts(ref, u);
    Eigen::VectorXd out(u.rows());
    for (Eigen::Index i = 0; i < u.rows(); ++i) out(i) = static_cast<double>(c[i]) / static_cast<double>(reference);
    return out;
}

struct Statistics {
    double ecp[2] = {0, 0};
    double ecp2[2] = {0, 0};
};

// `u` are pseudo-observations.
Statistics compute(const Eigen::MatrixXd& u, const VineModel& model, std::size_t reference, std::uint64_t seed,
                   bool want_ecp, bool want_ecp2) {
    Statistics s;
    if (want_ecp) {
        Eigen::VectorXd emp = EmpiricalCopula(u).evaluate(u);
        Eigen::VectorXd mod = model_cdf(u, model, reference, seed);
        s.ecp[0] = gof_statistic(emp, mod, GofStatistic::CvM);
        s.ecp[1] = gof_statistic(emp, mod, GofStatistic::KS);
    }
    if (want_ecp2) {
        Eigen::MatrixXd w = rosenblatt(u, model);
        Eigen::VectorXd emp = EmpiricalCopula(w).evaluate(w);
        Eigen::VectorXd mod = w.rowwise().prod();
        s.ecp2[0] = gof_statistic(emp, mod, GofStatistic::CvM);
        s.ecp2[1] = gof_statistic(emp, mod, GofStatistic::KS);
    }
    return s;
}

std::vector<GofReport> run(const Eigen::MatrixXd& u, const VineModel& model, const GofOptions& opts, bool want_ecp,
                           bool want_ecp2) {
    if (opts.bootstrap < 100) throw std::invalid_argument("gof: bootstrap replications B must be at least 100");
    if (opts.reference < 1000) throw std::invalid_argument("gof: reference sample size M must be at least 1000");
    if (u.cols() != model.dim()) throw std::invalid_argument("gof: data dimension does not match the model");
    const Eigen::MatrixXd pu = stats::pseudo_observations(u);
    const Statistics obs = compute(pu, model, opts.reference, derive_seed(opts.seed, "gof-reference"), want_ecp, want_ecp2);
    const auto B = static_cast<std::size_t>(opts.bootstrap);
    std::vector<Statistics> boot(B);
    parallel_for(B, [&](std::size_t r) {
        Eigen::MatrixXd sim = stats::pseudo_observations(
            vine_simulate(model, static_cast<std::size_t>(u.rows()), derive_seed(opts.seed, "gof-sample", r)));
        VineModel refit = model;
        try {
            refit = refit_parameters(sim, model);
        } catch (const std::exception&) {
        }
        boot[r] = compute(sim, refit, opts.reference, derive_seed(opts.seed, "gof-reference", r + 1), want_ecp, want_ecp2);
    });
    std::vector<GofReport> out;
    auto add = [&](GofTest t, GofStatistic st, double value, auto getter) {
        std::size_t exceed = 0;
        for (const auto& b : boot) exceed += getter(b) >= value;
        out.push_back({t, st, value, static_cast<double>(exceed) / static_cast<double>(B), opts.bootstrap,
                       t == GofTest::ECP ? opts.reference : 0});
    };
    if (want_ecp) {
        add(GofTest::ECP, GofStatistic::CvM, obs.ecp[0], [](const Statistics& b) { return b.ecp[0]; });
        add(GofTest::ECP, GofStatistic::KS, obs.ecp[1], [](const Statistics& b) { return b.ecp[1]; });
    }
    if (want_ecp2) {
        add(GofTest::ECP2, GofStatistic::CvM, obs.ecp2[0], [](const Statistics& b) { return b.ecp2[0]; });
        add(GofTest::ECP2, GofStatistic::KS, obs.ecp2[1], [](const Statistics& b) { return b.ecp2[1]; });
    }
    return out;
}

} // namespace

GofReport ecp_test(const Eigen::MatrixXd& u, const VineModel& model, GofStatistic s, const GofOptions& opts) {
    auto r = run(u, model, opts, true, false);
    return r[s == GofStatistic::CvM ? 0 : 1];
}

GofReport ecp2_test(const Eigen::MatrixXd& u, const VineModel& model, GofStatistic s, const GofOptions& opts) {
    auto r = run(u, model, opts, false, true);
    return r[s == GofStatistic::CvM ? 0 : 1];
}

std::vector<GofReport> gof_suite(const Eigen::MatrixXd& u, const VineModel& model, const GofOptions& opts) {
    return run(u, model, opts, true, true);
}

} // namespace vineport
