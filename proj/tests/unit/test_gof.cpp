#include "vineport/gof.hpp"
#include "vineport/rng.hpp"
#include "vineport/stats.hpp"

#include <gtest/gtest.h>

using namespace vineport;

namespace {

VineModel clayton2(double theta) {
    VineModel m = independence_vine(cvine_structure({0, 1}));
    m.specs[0][0] = {Family::Clayton, 0, {theta, 0}};
    return m;
}

} // namespace

TEST(EmpiricalCopula, DominanceCountsMatchDirectCount) {
    Rng rng(3);
    for (int d : {1, 2, 3, 5}) {
        for (int m : {1, 63, 64, 65, 300}) {
            Eigen::MatrixXd s(m, d), q(40, d);
            // ties on a coarse grid exercise the <= convention
            for (Eigen::Index i = 0; i < s.size(); ++i) s.data()[i] = std::round(rng.uniform() * 10) / 10;
            for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = std::round(rng.uniform() * 10) / 10;
            auto c = dominance_counts(s, q);
            EmpiricalCopula ec(s);
            for (Eigen::Index i = 0; i < q.rows(); ++i) {
                std::size_t n = 0;
                for (Eigen::Index k = 0; k < m; ++k) n += (s.row(k).array() <= q.row(i).array()).all();
                EXPECT_EQ(c[static_cast<std::size_t>(i)], n);
                std::vector<double> t(static_cast<std::size_t>(d));
                for (int k = 0; k < d; ++k) t[static_cast<std::size_t>(k)] = q(i, k);
                EXPECT_DOUBLE_EQ(ec(t), static_cast<double>(n) / m);
            }
        }
    }
}

TEST(GofStatistic, NonNegativeAndZeroOnlyAtEquality) {
    Eigen::VectorXd a(4), b(4);
    a << 0.1, 0.2, 0.5, 0.9;
    b = a;
    EXPECT_EQ(gof_statistic(a, b, GofStatistic::CvM), 0.0);
    EXPECT_EQ(gof_statistic(a, b, GofStatistic::KS), 0.0);
    b(2) = 0.4;
    EXPECT_NEAR(gof_statistic(a, b, GofStatistic::CvM), 0.01, 1e-15);
    EXPECT_NEAR(gof_statistic(a, b, GofStatistic::KS), 0.1, 1e-15);
}

TEST(Gof, RejectsTooFewReplications) {
    auto m = clayton2(2);
    Eigen::MatrixXd u = vine_simulate(m, 200, 1);
    EXPECT_THROW(ecp_test(u, m, GofStatistic::CvM, {50, 10000, 1}), std::invalid_argument);
    EXPECT_THROW(ecp_test(u, m, GofStatistic::CvM, {100, 10, 1}), std::invalid_argument);
}

TEST(Gof, SuiteIsSeededAndOrdered) {
    auto m = clayton2(2);
    Eigen::MatrixXd u = vine_simulate(m, 200, 4);
    GofOptions o{100, 5000, 11};
    auto a = gof_suite(u, m, o);
    auto b = gof_suite(u, m, o);
    ASSERT_EQ(a.size(), 4u);
    EXPECT_EQ(a[0].test, GofTest::ECP);
    EXPECT_EQ(a[1].statistic, GofStatistic::KS);
    EXPECT_EQ(a[2].test, GofTest::ECP2);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].value, b[i].value);
        EXPECT_EQ(a[i].p_value, b[i].p_value);
        EXPECT_GE(a[i].value, 0.0);
        EXPECT_GE(a[i].p_value, 0.0);
        EXPECT_LE(a[i].p_value, 1.0);
    }
    EXPECT_EQ(ecp_test(u, m, GofStatistic::CvM, o).value, a[0].value);
}

TEST(Gof, SeedChangesPvalueOnlyWithinBinomialError) {
    auto m = clayton2(1.5);
    Eigen::MatrixXd u = vine_simulate(m, 250, 8);
    auto a = ecp2_test(u, m, GofStatistic::CvM, {200, 5000, 1});
    auto b = ecp2_test(u, m, GofStatistic::CvM, {200, 5000, 2});
    const double p = 0.5 * (a.p_value + b.p_value);
    const double se = std::sqrt(std::max(p * (1 - p), 0.01) / 200);
    EXPECT_EQ(a.value, b.value);
    EXPECT_LE(std::abs(a.p_value - b.p_value), 4 * std::sqrt(2.0) * se);
}

TEST(Gof, DetectsWrongFamily) {
    auto m = clayton2(5);
    Eigen::MatrixXd u = vine_simulate(m, 400, 2);
    VineFitOptions fo;
    fo.families = {Family::Frank};
    fo.independence_test = false;
    auto wrong = fit_sequential(u, m.structure, fo);
    EXPECT_LT(ecp2_test(u, wrong, GofStatistic::CvM, {100, 5000, 3}).p_value, 0.05);
}
