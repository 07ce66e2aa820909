#include "qkd/photon_stats.hpp"

#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>

using namespace qkd;
using big = boost::multiprecision::cpp_dec_float_50;

TEST(PoissonPmf, ClosedFormPoints)
{
    EXPECT_EQ(poisson_pmf(0.0, 0), 1.0);
    EXPECT_EQ(poisson_pmf(0.0, 3), 0.0);
    EXPECT_NEAR(poisson_pmf(1.0, 1), std::exp(-1.0), 1e-16);
    // mpmath, 40 digits
    EXPECT_NEAR(poisson_pmf(0.5, 3), 0.01263605541067986299, 1e-17);
    EXPECT_THROW(poisson_pmf(-0.1, 1), std::domain_error);
    EXPECT_THROW(poisson_pmf(NAN, 1), std::domain_error);
    EXPECT_EQ(poisson_pmf(2.0, -1), 0.0);
}

TEST(PoissonPmf, LogSpaceBranchMatchesMultiprecision)
{
    for (double mu : {0.3, 5.0, 10.0, 40.0})
        for (int l : {19, 20, 21, 35, 60, 120}) {
            big m(mu), p = exp(-m);
            for (int i = 1; i <= l; ++i)
                p *= m / i;
            double ref = p.convert_to<double>();
            EXPECT_NEAR(poisson_pmf(mu, l), ref, 1e-13 * ref + 1e-300) << mu << " " << l;
        }
}

TEST(PAtLeast, Values)
{
    EXPECT_EQ(p_at_least(0.0, 1), 0.0);
    EXPECT_NEAR(p_at_least(0.1, 2), 0.004678840160444469519, 1e-17);
    EXPECT_EQ(p_at_least(INFINITY, 1), 1.0);
    EXPECT_NEAR(p_at_least(50.0, 1), 1.0, 1e-15);
    EXPECT_THROW(p_at_least(0.1, 3), std::domain_error);
    EXPECT_THROW(p_at_least(-1.0, 1), std::domain_error);
}

TEST(PAtLeast, SmallMuSeriesAgreesWithMultiprecision)
{
    for (double mu : {1e-8, 1e-5, 5e-4, 9.99e-4, 1.01e-3, 0.02}) {
        big m(mu);
        big ref = 1 - exp(-m) * (1 + m);
        double r = ref.convert_to<double>();
        EXPECT_NEAR(p_at_least(mu, 2), r, 1e-13 * r) << mu;
    }
}

TEST(PAtLeast, Properties)
{
    for (double mu = 0.0; mu <= 20.0; mu += 0.137) {
        EXPECT_EQ(p_at_least(mu, 1), -std::expm1(-mu));
        EXPECT_NEAR(p_at_least(mu, 1), 1.0 - poisson_pmf(mu, 0), 1e-15);
        EXPECT_LE(p_at_least(mu, 2), p_at_least(mu, 1));
        EXPECT_EQ(psi_ge1(mu), p_at_least(mu, 1));
        EXPECT_EQ(psi_ge2(mu), p_at_least(mu, 2));
    }
}

static double tail_above(double mu, std::int64_t L)
{
    double t = 0.0;
    for (std::int64_t l = 400; l > L; --l)
        t += poisson_pmf(mu, l);
    return t;
}

TEST(TruncationBound, Examples)
{
    EXPECT_EQ(truncation_bound(0.0, 1e-15), 0);
    auto L = truncation_bound(0.5, 1e-15);
    EXPECT_LE(L, 25);
    EXPECT_LT(tail_above(0.5, L), 1e-15);
    auto L10 = truncation_bound(10.0, 1e-12);
    EXPECT_LT(tail_above(10.0, L10), 1e-12);
    EXPECT_THROW(truncation_bound(1.0, 0.0), std::domain_error);
    EXPECT_THROW(truncation_bound(1.0, 1.0), std::domain_error);
}

TEST(TruncationBound, MinimalAboveFloorAndMassConserved)
{
    for (double mu = 0.01; mu <= 10.0; mu += 0.0731) {
        auto L = truncation_bound(mu, 1e-15);
        auto floor_l = std::max<std::int64_t>(10, static_cast<std::int64_t>(std::ceil(mu + 10 * std::sqrt(mu))));
        EXPECT_GE(L, floor_l);
        EXPECT_LT(tail_above(mu, L), 1e-15);
        if (L > floor_l) // minimal: one fewer term breaks the tolerance
            EXPECT_GE(tail_above(mu, L - 1), 1e-15 * (1 - 1e-9));
        double s = 0.0;
        for (std::int64_t l = 0; l <= L; ++l)
            s += poisson_pmf(mu, l);
        EXPECT_GE(s, 1.0 - 1e-14);
        EXPECT_LE(s, 1.0 + 1e-14);
    }
}

TEST(PoissonExpect, MomentsMatch)
{
    for (double mu : {0.1, 1.0, 4.0}) {
        EXPECT_NEAR(poisson_expect(mu, [](std::int64_t l) { return double(l); }), mu, 1e-13);
        EXPECT_NEAR(poisson_expect(mu, [](std::int64_t l) { return double(l * (l - 1)); }),
                    mu * mu, 1e-12);
        EXPECT_NEAR(poisson_expect(mu, [](std::int64_t) { return 1.0; }, 2), psi_ge2(mu), 1e-14);
    }
}
