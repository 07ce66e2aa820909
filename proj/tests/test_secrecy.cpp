#include "qkd/secrecy.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qkd;

TEST(FFactor, Modes)
{
    EXPECT_EQ(f_factor(0, 0, ErrorMode::discard), 1.0);
    EXPECT_EQ(f_factor(0, 0, ErrorMode::retain), 0.0);
    EXPECT_NEAR(f_factor(9.37, 3.2, ErrorMode::discard), 13.57, 1e-12);
    EXPECT_THROW(f_factor(-1, 0, ErrorMode::discard), std::domain_error);
}

TEST(Rate, Examples)
{
    EXPECT_NEAR(secrecy_rate(5.7e-3, 1e-10), 5.7e7, 1e-3);
    EXPECT_NEAR(secrecy_rate(5.7e-3, 1e-6), 5.7e3, 1e-9);
    EXPECT_EQ(secrecy_rate(0.0, 1e-10), 0.0);
    EXPECT_THROW(secrecy_rate(1.0, 0.0), std::domain_error);
}

TEST(Capacity, ReferencePoint)
{
    SystemParams p; // defaults are the aircraft to LEO reference system
    SecrecyResult r = secrecy_capacity(p);
    // independent 40-digit evaluation of the full expression
    EXPECT_NEAR(r.S, 0.0056139049976193025, 1e-15);
    EXPECT_NEAR(r.terms.Q, 10.5362086214402, 1e-10);
    EXPECT_NEAR(r.terms.T, 8.3905576933305, 1e-9);
    EXPECT_NEAR(r.terms.nu, 891405.296876784, 1e-5);
    EXPECT_EQ(r.region.region, 2);
    EXPECT_NEAR(r.R, 5.6139e7, 1e3);
}

TEST(Capacity, TermsReconstructS)
{
    SystemParams p;
    p.mu = 0.3;
    p.r_c = 0.02;
    SecrecyResult r = secrecy_capacity(p);
    const SecrecyTerms& t = r.terms;
    EXPECT_NEAR(t.f, 1 + t.Q + t.T, 1e-12);
    double S = (t.n - t.f * t.e_T - t.nu - t.g_pa - t.a) / p.m;
    EXPECT_NEAR(r.S, S, 1e-15);
    EXPECT_NEAR(t.nu, p.m / 2 * t.nu_norm, 1e-6);
    EXPECT_NEAR(t.q, t.Q * t.e_T, 1e-6);
}

TEST(Capacity, EmptyChannelIsOverheadOnly)
{
    SystemParams p;
    p.mu = 1e-12;
    p.r_d = 0.0;
    SecrecyResult r = secrecy_capacity(p);
    EXPECT_LT(r.S, 0.0);
    EXPECT_NEAR(r.S, -(p.g_pa) / p.m, 1e-9);
}

TEST(Capacity, NoEnemyLossless)
{
    SystemParams p;
    p.no_enemy = true;
    p.alpha = 1.0;
    p.eta = 1.0;
    p.r_c = 0.0;
    for (double mu : {1e-3, 0.1, 1.0, 3.0}) {
        p.mu = mu;
        SecrecyResult r = secrecy_capacity(p);
        EXPECT_GT(r.S, 0.0) << mu;
        EXPECT_NEAR(r.S, 0.5 * psi_ge1(mu), 1e-14);
    }
    p.error_mode = ErrorMode::retain;
    p.r_c = 0.01;
    p.mu = 0.5;
    EXPECT_NEAR(secrecy_capacity(p).S, 0.5 * psi_ge1(0.5), 1e-14);
}

TEST(Capacity, InfiniteBlockLimit)
{
    SystemParams p;
    p.m = 1e12;
    double S = secrecy_capacity(p).S;
    double Sinf = secrecy_capacity_infinite(p);
    EXPECT_NEAR(S / Sinf, 1.0, 2e-3);
    p.m = 1e16;
    EXPECT_NEAR(secrecy_capacity(p).S / Sinf, 1.0, 2e-5);
    EXPECT_GT(Sinf, secrecy_capacity(p).S);
}

TEST(Capacity, RetainNeverWorseThanDiscard)
{
    SystemParams p;
    for (double mu : {0.1, 0.455, 1.0}) {
        p.mu = mu;
        p.error_mode = ErrorMode::discard;
        double d = secrecy_capacity(p).S;
        p.error_mode = ErrorMode::retain;
        EXPECT_GT(secrecy_capacity(p).S, d);
    }
}

TEST(Capacity, MonotoneInChannelQuality)
{
    SystemParams p;
    double prev = -INFINITY;
    for (double eta : {0.1, 0.2, 0.3, 0.5, 0.8}) {
        p.eta = eta;
        double s = secrecy_capacity(p).S;
        EXPECT_GT(s, prev);
        prev = s;
    }
    p = SystemParams{};
    prev = INFINITY;
    for (double rc : {0.001, 0.005, 0.01, 0.02, 0.05}) {
        p.r_c = rc;
        double s = secrecy_capacity(p).S;
        EXPECT_LT(s, prev);
        prev = s;
    }
}

TEST(Optimize, ReferenceOptima)
{
    SystemParams p;
    MuOptimum o = optimize_mu(p);
    EXPECT_NEAR(o.mu, 0.455, 0.005);
    EXPECT_TRUE(o.viable);
    p.r_c = 0.01;
    EXPECT_NEAR(optimize_mu(p).mu, 0.426, 0.01);
    p.r_c = 0.02;
    EXPECT_NEAR(optimize_mu(p).mu, 0.37, 0.01);
    // y = eta*alpha = 0.005, the ground receiver case
    p.r_c = 0.005;
    p.alpha = 0.01;
    EXPECT_NEAR(optimize_mu(p).mu, 0.131, 0.005);
}

TEST(Optimize, DominatesEveryGridPoint)
{
    SystemParams p;
    p.eta = 0.3;
    p.r_c = 0.01;
    MuOptimum o = optimize_mu(p);
    for (double mu = 0.01; mu < 2.0; mu *= 1.07) {
        p.mu = mu;
        EXPECT_GE(o.S, secrecy_capacity(p).S - 1e-15) << mu;
    }
}

TEST(Optimize, Viability)
{
    SystemParams p;
    EXPECT_TRUE(viability(p));
    p.eta = 0.02;
    EXPECT_FALSE(viability(p));
    MuOptimum o = optimize_mu(p);
    EXPECT_FALSE(o.viable);
    EXPECT_LE(o.S, 0.0);
    EXPECT_THROW(optimize_mu(p, {0.0, 1.0}), std::domain_error);
    EXPECT_THROW(optimize_mu(p, {0.5, 0.1}), std::domain_error);
}

TEST(Params, Validation)
{
    SystemParams p;
    p.tau = 0.0;
    EXPECT_THROW(secrecy_capacity(p), std::domain_error);
    p = SystemParams{};
    p.x = 0.9;
    EXPECT_THROW(secrecy_capacity(p), std::domain_error);
    p = SystemParams{};
    p.epsilon = 1.0;
    EXPECT_THROW(secrecy_capacity(p), std::domain_error);
}
