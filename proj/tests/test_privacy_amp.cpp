#include "qkd/privacy_amp.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <gtest/gtest.h>

#include <cmath>

using namespace qkd;

TEST(Leakage, Examples)
{
    EXPECT_DOUBLE_EQ(Q_factor(1.0, 0.5), 2.0);
    // mpmath: 1.16*2e5*h(0.01)
    EXPECT_NEAR(ec_leakage(1.16, 2e5, 2e3), 18744.00752785139, 1e-6);
    EXPECT_NEAR(binary_entropy(0.01), 0.08079313589591118, 1e-15);
    EXPECT_EQ(ec_leakage(1.16, 2e5, 0.0), 0.0);
    EXPECT_EQ(ec_leakage(1.16, 2e5, 2e5), 0.0);
    EXPECT_THROW(ec_leakage(0.9, 10, 1), std::domain_error);
    EXPECT_LT(Q_factor(1.16, 1e-9) * 1e-9, 1e-6);
}

TEST(Leakage, QTimesZetaMatchesLeakagePerBit)
{
    for (double z : {1e-4, 0.01, 0.1, 0.3})
        EXPECT_NEAR(Q_factor(1.2, z) * z * 1e6, ec_leakage(1.2, 1e6, z * 1e6), 1e-6);
}

TEST(Erfcinv, AgreesWithBoost)
{
    for (double q : {1e-300, 1e-30, 1e-12, 1e-9, 1e-5, 1e-3, 0.01, 0.3, 0.999, 1.0, 1.5, 1.999})
        EXPECT_NEAR(erfcinv(q), boost::math::erfc_inv(q), 1e-12 * std::max(1.0, std::fabs(boost::math::erfc_inv(q))))
            << q;
    for (double y : {-0.99, -0.3, 0.0, 1e-8, 0.4, 0.9, 0.999999})
        EXPECT_NEAR(erfinv(y), boost::math::erf_inv(y), 1e-12) << y;
    EXPECT_THROW(erfcinv(0.0), std::domain_error);
    EXPECT_THROW(erfcinv(2.0), std::domain_error);
}

TEST(Renyi, EndpointsAndShape)
{
    EXPECT_EQ(renyi_max(0.0).value, 0.0);
    EXPECT_NEAR(renyi_max(1.0 / 3.0).value, 1.0, 1e-15);
    EXPECT_FALSE(renyi_max(1.0 / 3.0).saturated);
    EXPECT_TRUE(renyi_max(0.4).saturated);
    EXPECT_EQ(renyi_max(0.4).value, 1.0);
    double prev = 0.0;
    for (double z = 0.001; z < 1.0 / 3.0; z += 0.001) {
        double v = renyi_max(z).value;
        EXPECT_GE(v, prev);
        EXPECT_LE(v, 1.0);
        prev = v;
    }
    // small zeta: 1 + log2(1 - r^2/2) with r = (1-3z)/(1-z)
    double z = 0.01, r = 0.97 / 0.99;
    EXPECT_NEAR(renyi_max(z).value, 1.0 + std::log2(1.0 - 0.5 * r * r), 1e-15);
}

TEST(Frontier, InfiniteBlockLimit)
{
    // the gap closes like xi ~ n1^{-1/2}; 1e-6 needs n1 far beyond any real block
    auto gap = [](double n1, double eps) {
        double eT1 = n1 * 0.005;
        return defense_frontier(n1, eT1, eT1, eps).T / frontier_T_infinity(n1, eT1) - 1.0;
    };
    EXPECT_GT(gap(4e9, 1e-9), 0.0);
    EXPECT_NEAR(gap(4e9, 1e-9) / gap(4e13, 1e-9), 100.0, 1.0);
    EXPECT_LT(gap(4e21, 1e-9), 1e-6);
    EXPECT_LT(gap(4e21, 1e-3), 1e-6);
    EXPECT_GT(gap(4e9, 1e-9), gap(4e9, 1e-3));
}

TEST(Frontier, ExactTUsesTotalErrors)
{
    FrontierResult a = defense_frontier(1e5, 1e3, 600, 1e-9, false);
    FrontierResult b = defense_frontier(1e5, 1e3, 600, 1e-9, true);
    EXPECT_NEAR(a.t, b.t, 0.0);
    EXPECT_NEAR(a.T * 600, b.T * 1e3, 1e-9);
    EXPECT_NEAR(a.xi, boost::math::erfc_inv(1e-9) / std::sqrt(2e5), 1e-15);
}

TEST(Frontier, SaturatesForTinyBlocks)
{
    FrontierResult fr = defense_frontier(20, 5, 5, 1e-9);
    EXPECT_TRUE(fr.saturated);
    EXPECT_THROW(defense_frontier(10, 1, 0, 1e-9), std::domain_error);
    EXPECT_THROW(defense_frontier(10, 1, 1, 0.0), std::domain_error);
}

TEST(NuDirect, ShortPulsesGiveNothing)
{
    auto t = TransparencyFactors::untouched(0.1);
    for (std::int64_t l : {0, 1, 2})
        EXPECT_EQ(nu_direct(0.455, 0.5, t, std::nullopt, false, l), 0.0);
}

TEST(NuDirect, MaximalEqualsAverageSuccess)
{
    auto t = TransparencyFactors::maximal(0.1);
    EXPECT_NEAR(nu_direct(0.455, 0.5, t, std::nullopt, false), z_E_avg(0.455), 1e-15);
    EXPECT_NEAR(nu_direct(0.455, 0.5, t, std::nullopt, true), 0.5 * z_E_avg(0.455), 1e-15);
    // series oracle
    double s = 0.0;
    for (int l = 3; l < 60; ++l)
        s += poisson_pmf(0.455, l) * z_hat_E(l);
    EXPECT_NEAR(z_E_avg(0.455), s, 1e-16);
}

TEST(NuIndirect, TwoPhotonPulse)
{
    auto t = TransparencyFactors::maximal(0.1);
    for (double eta : {0.1, 0.5, 0.9})
        EXPECT_NEAR(nu_indirect(0.455, eta, t, 1, false, 2), psi(0.455, 2) * eta, 1e-15);
    EXPECT_THROW(nu_indirect(0.455, 0.5, t, 2, false, 2), std::domain_error);
    EXPECT_THROW(nu_indirect(0.455, 0.5, t, 0, false), std::domain_error);
}

TEST(NuIndirect, LosslessLimitIsPyrrhic)
{
    auto t = TransparencyFactors::maximal(0.1);
    EXPECT_NEAR(nu_indirect(0.455, 1.0, t, 1, false), psi_ge2(0.455), 1e-14);
    EXPECT_NEAR(nu_pyrrhic(0.455), psi_ge2(0.455), 0.0);
}

TEST(NuIndirect, ThreePhotonRecursion)
{
    // removing one more photon reduces Eve's chance by the factor of the remnant
    TransparencyFactors t = TransparencyFactors::untouched(0.3);
    double eta = 0.6, b = eta * t.aeb();
    double v1 = nu_indirect_coeff(3, eta, t, 1, false);
    double v2 = nu_indirect_coeff(3, eta, t, 2, false);
    EXPECT_NEAR(1.0 - v1, (1.0 - v2) * (1.0 - b), 1e-15);
}

TEST(NuIndirect, ClosedFormMatchesSeries)
{
    // Eve sits at Alice's side, so no per-l coefficient is clipped at zero
    TransparencyFactors t;
    t.alpha_EB = 0.4;
    for (std::int64_t u : {1, 2})
        for (double mu : {0.1, 0.455, 1.5}) {
            double closed = nu_indirect_all_closed(mu, 0.5, t, u);
            double ser = nu_indirect(mu, 0.5, t, u, false);
            EXPECT_NEAR(closed, ser, 1e-14) << mu << " " << u;
        }
    // with a lossy first leg the closed form keeps negative terms the series drops
    t.alpha_AE = 0.5;
    for (double mu : {0.1, 1.5})
        EXPECT_GE(nu_indirect(mu, 0.5, t, 1, false), nu_indirect_all_closed(mu, 0.5, t, 1));
}

TEST(NuIndirect, McsNeverHelpsEve)
{
    auto t = TransparencyFactors::maximal(0.1);
    for (double eta : {0.2, 0.6})
        for (double mu : {0.2, 1.0})
            EXPECT_LE(nu_indirect(mu, eta, t, 1, true), nu_indirect(mu, eta, t, 1, false) + 1e-15);
}

TEST(Regions, DeltaZeros)
{
    double yo = 1.0 - 1.0 / std::sqrt(2.0);
    for (std::int64_t k = 1; k <= 10; ++k)
        EXPECT_NEAR(attack_strength_delta(k, yo, Parity::odd), 0.0, 1e-15) << k;
    EXPECT_NEAR(attack_strength_delta(2, 1.0 - std::cbrt(0.5), Parity::even), 0.0, 1e-15);
    EXPECT_GT(attack_strength_delta(5, 0.5, Parity::even), 0.0);
    EXPECT_THROW(attack_strength_delta(1, 0.5, Parity::even), std::domain_error);
    EXPECT_THROW(attack_strength_delta(0, 0.5, Parity::odd), std::domain_error);
}

TEST(Regions, Boundaries)
{
    EXPECT_EQ(region_classify(0.5).region, 1);
    EXPECT_EQ(region_classify(0.1).region, 2);
    EXPECT_EQ(region_classify(0.25).region, 3);
    EXPECT_NEAR(y_even_boundary(2), 0.2062994740159002, 1e-15);
    EXPECT_NEAR(y_even_boundary(100000), y_odd_boundary(), 1e-5);
    EXPECT_NEAR(y_odd_boundary(), 0.2928932188134524, 1e-15);
    for (std::int64_t k = 2; k < 50; ++k)
        EXPECT_LT(y_even_boundary(k), y_even_boundary(k + 1));
    EXPECT_THROW(region_classify(1.5), std::domain_error);
}

TEST(Regions, SelectorAgreesWithDeltaSign)
{
    EXPECT_EQ(j_selector(4, 0.25), 1);
    for (std::int64_t l = 3; l <= 20; ++l)
        for (double y : {0.01, 0.1, 0.21, 0.25, 0.29, 0.3, 0.6}) {
            double direct = z_hat_E(l), indirect = 1.0 - std::pow(1.0 - y, double(l - 1));
            int expect = indirect >= direct ? 1 : 0;
            EXPECT_EQ(j_selector(l, y), expect) << l << " " << y;
        }
}

TEST(NuMax, VanishesWithMu)
{
    AttackContext ctx;
    for (double y : {0.05, 0.25, 0.6})
        EXPECT_LT(nu_max_total(1e-6, 0.5, y / 0.5, ctx), 1e-11);
}

TEST(NuMax, RegionTwoReference)
{
    AttackContext ctx;
    double v = nu_max_total(0.455, 0.5, 0.1, ctx);
    double oracle = 0.0;
    for (int l = 2; l < 60; ++l)
        oracle += poisson_pmf(0.455, l) * (l == 2 ? 0.05 : z_hat_E(l));
    EXPECT_NEAR(v, oracle, 1e-15);
    EXPECT_NEAR(v, psi(0.455, 2) * 0.05 + z_E_avg(0.455), 1e-16);
}

TEST(NuMax, ClosedFormsMatchSeriesInEveryRegion)
{
    AttackContext ctx;
    for (bool mcs : {false, true}) {
        ctx.mcs = mcs;
        for (double y : {0.001, 0.05, 0.15, 0.21, 0.25, 0.28, 0.3, 0.5, 0.9})
            for (double mu : {0.01, 0.1, 0.455, 1.0, 3.0}) {
                double eta = 0.5, alpha = y / eta;
                if (alpha > 1.0)
                    eta = 1.0, alpha = y;
                double closed = nu_max_total(mu, eta, alpha, ctx);
                double ser = nu_max_series(mu, y, ctx, eta);
                EXPECT_NEAR(closed, ser, 1e-12 + 1e-9 * ser) << y << " " << mu << " " << mcs;
            }
    }
}

TEST(NuMax, BoundedByPyrrhic)
{
    AttackContext ctx;
    for (double y = 0.0; y <= 1.0; y += 0.01)
        for (double mu : {0.05, 0.5, 2.0})
            EXPECT_LE(nu_max_total(mu, 1.0, y, ctx), nu_pyrrhic(mu) * (1 + 1e-12));
}

TEST(NuMax, ContinuousAcrossRegionBoundaries)
{
    AttackContext ctx;
    for (double yb : {y_even_boundary(2), y_odd_boundary()}) {
        double lo = nu_max_total(0.455, 1.0, yb - 1e-10, ctx);
        double hi = nu_max_total(0.455, 1.0, yb + 1e-10, ctx);
        EXPECT_NEAR(lo, hi, 1e-8);
    }
}

TEST(NuMax, FiberTakesTheStrongerOfBothEnds)
{
    AttackContext ctx;
    ctx.medium = Medium::fiber;
    double v = nu_max_total(0.3, 0.5, 0.2, ctx);
    AttackContext fs;
    EXPECT_GE(v, nu_max_total(0.3, 0.5, 0.2, fs) - 1e-16);
    EXPECT_NEAR(v, nu_max_total(0.3, 1.0, 0.5, fs), 1e-15);
}

TEST(NuMax, DirectStrengthFactorScalesDirectTerm)
{
    AttackContext ctx;
    ctx.direct_strength_factor = 1.0 / 3.0;
    double v = nu_max_total(0.455, 0.5, 0.1, ctx);
    EXPECT_NEAR(v, psi(0.455, 2) * 0.05 + z_E_avg(0.455) / 3.0, 1e-16);
    ctx.direct_strength_factor = 0.0;
    EXPECT_THROW(ctx.validate(), std::domain_error);
}

TEST(Combined, EnumerationCountForEightPhotons)
{
    auto list = enumerate_attacks(8);
    EXPECT_EQ(list.size(), 30u);
    int combined = 0;
    for (auto& a : list) {
        EXPECT_EQ(a.l_d + a.l_i, 8);
        combined += a.combined();
    }
    EXPECT_GT(combined, 0);
}

TEST(Combined, EitherPartIsAUnion)
{
    for (std::int64_t l = 5; l <= 10; ++l)
        for (std::int64_t ld = 3; ld <= l - 2; ++ld)
            for (std::int64_t u = 1; u <= l - ld - 1; ++u) {
                CombinedStrength c = combined_attack_strength(l, ld, u, 0.2);
                double e = c.either();
                EXPECT_GE(e, std::max(c.direct_part, c.indirect_part) - 1e-15);
                EXPECT_LE(e, c.direct_part + c.indirect_part + 1e-15);
            }
    EXPECT_THROW(combined_attack_strength(4, 3, 1, 0.2), std::domain_error);
    EXPECT_THROW(combined_attack_strength(6, 3, 3, 0.2), std::domain_error);
}
