#include "qkd/sift_model.hpp"

#include <gtest/gtest.h>

using namespace qkd;

static ChannelParams base()
{
    return {0.1, 0.005, 0.0, 0.5, 0.455, 2e8};
}

TEST(SiftedCount, ReferencePoint)
{
    // mpmath: (m/2)(1 - exp(-0.455*0.5*0.1))
    EXPECT_NEAR(sifted_count(base(), false), 2249317.0063781876, 1e-6);
    EXPECT_NEAR(error_count(base(), false), 11246.585031890938, 1e-7);
}

TEST(SiftedCount, Limits)
{
    ChannelParams p = base();
    p.mu = 0.0;
    EXPECT_EQ(sifted_count(p, false), 0.0);
    EXPECT_EQ(sifted_count(p, true), 0.0);
    p = base();
    p.r_c = 0.0;
    EXPECT_EQ(error_count(p, false), 0.0);
    p = base();
    EXPECT_NEAR(error_count(p, false) / sifted_count(p, false), p.r_c, 1e-15);
    EXPECT_NEAR(error_count(p, true) / sifted_count(p, true), p.r_c, 1e-15);
}

TEST(SiftedCount, McsWithAnyClickKernelRecoversPlainForm)
{
    // swapping the single-click kernel for the any-click one must give psi_ge1(eta mu alpha)
    for (double alpha : {1.0, 0.3})
        for (double mu : {0.1, 0.9, 3.0}) {
            double eta = 0.6;
            double s = poisson_expect(mu, [&](std::int64_t l) {
                double t = 0;
                for (std::int64_t k = 1; k <= l; ++k)
                    t += binom_pmf(l, k, alpha) * any_click(eta, k);
                return t;
            }, 1);
            EXPECT_NEAR(s, psi_ge1(eta * mu * alpha), 1e-13);
        }
}

TEST(SiftedCount, McsNeverExceedsPlain)
{
    for (double eta : {0.1, 0.5, 1.0})
        for (double alpha : {1e-3, 0.1, 1.0})
            for (double mu : {0.01, 0.3, 1.0, 5.0}) {
                ChannelParams p{alpha, 0.02, 1e-7, eta, mu, 1e6};
                EXPECT_LE(sifted_count(p, true), sifted_count(p, false) * (1 + 1e-14));
                EXPECT_LE(error_count(p, true), sifted_count(p, true));
                EXPECT_LE(error_count(p, false), sifted_count(p, false));
            }
}

TEST(SiftedCount, ExactFlagDiffersOnlyAtOrderRd)
{
    ChannelParams p = base();
    p.r_d = 1e-6;
    double a = sifted_count(p, false), b = sifted_count(p, false, true);
    EXPECT_LT(b, a);
    EXPECT_NEAR(a - b, p.m / 2 * p.r_d * click_fraction(p, false), 1e-6);
    EXPECT_LT(error_count(p, false, true), error_count(p, false));
}

TEST(SinglePhoton, Parts)
{
    ChannelParams p = base();
    p.r_c = 0.0;
    SiftOutcome o = single_photon_parts(p);
    double x = p.eta * p.mu * p.alpha;
    EXPECT_NEAR(o.n1, p.m / 2 * x * std::exp(-x), 1e-6);
    EXPECT_EQ(o.e_T1, 0.0);
    p.mu = 0.0;
    p.r_d = 1e-5;
    EXPECT_NEAR(single_photon_parts(p).n1, p.m * p.r_d / 2, 1e-9);
}

TEST(SinglePhoton, BelowTotalsOnGrid)
{
    for (double eta : {0.05, 0.5, 1.0})
        for (double alpha : {1e-4, 0.1, 1.0})
            for (double mu : {0.001, 0.2, 2.0, 8.0})
                for (double rd : {0.0, 1e-6}) {
                    ChannelParams p{alpha, 0.03, rd, eta, mu, 2e8};
                    SiftOutcome s = sift(p, false);
                    EXPECT_LE(s.n1, s.n * (1 + 1e-14));
                    EXPECT_LE(s.e_T1, s.n1);
                    EXPECT_LE(s.e_T, s.n);
                }
}

TEST(NaiveBound, LowerBound)
{
    ChannelParams p{0.9, 0.0, 0.0, 0.9, 1.0, 1e6};
    EXPECT_LT(naive_sifted_lower_bound(p), sifted_count(p, false));
    p = {1.0, 0.0, 0.0, 1.0, 1.3, 1e6};
    EXPECT_NEAR(naive_sifted_lower_bound(p), sifted_count(p, false), 1e-9);
    p = {0.5, 0.0, 0.0, 0.25, 4.0, 1e6};
    double gap = sifted_count(p, false) - naive_sifted_lower_bound(p);
    // (m/2)[(1 - e^-0.5) - 0.125 (1 - e^-4)]
    EXPECT_NEAR(gap, 5e5 * ((1 - std::exp(-0.5)) - 0.125 * (1 - std::exp(-4.0))), 1e-6);
    EXPECT_GT(gap, 0.0);
    for (double mu = 0.05; mu < 10; mu *= 1.5)
        for (double y = 0.01; y <= 1.0; y += 0.07)
            EXPECT_LE(y * psi_ge1(mu), psi_ge1(y * mu) + 1e-15);
}

TEST(ChannelParams, Validation)
{
    ChannelParams p = base();
    p.eta = 1.2;
    EXPECT_THROW(p.validate(), std::domain_error);
    p = base();
    p.m = 0.5;
    EXPECT_THROW(p.validate(), std::domain_error);
}
