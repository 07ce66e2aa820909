#pragma once

#include "photon_stats.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace qkd {

// Binomial C(n,k) p^k (1-p)^(n-k), evaluated in log space for large n.
inline double binom_pmf(std::int64_t n, std::int64_t k, double p)
{
    if (k < 0 || k > n)
        return 0.0;
    if (p <= 0.0)
        return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0)
        return k == n ? 1.0 : 0.0;
    double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    return std::exp(lc + k * std::log(p) + (n - k) * std::log1p(-p));
}

// Eve's best unambiguous discrimination probability for an l-photon pulse.
inline double z_hat_E(std::int64_t l)
{
    if (l <= 2)
        return 0.0;
    if (l % 2 == 0)
        return 1.0 - std::exp2(1.0 - static_cast<double>(l) / 2.0);
    return 1.0 - std::exp2((1.0 - static_cast<double>(l)) / 2.0);
}

// Poisson average of z_hat_E.
inline double z_E_avg(double mu)
{
    if (!(mu >= 0.0))
        throw std::domain_error("z_E_avg: mu must be >= 0");
    if (mu < 0.05) {
        // series: the closed form cancels catastrophically near 0
        return poisson_expect(mu, [](std::int64_t l) { return z_hat_E(l); }, 3);
    }
    const double r2 = std::sqrt(2.0);
    double u = mu / r2;
    return 1.0 - std::exp(-mu) * (r2 * std::sinh(u) + 2.0 * std::cosh(u) - 1.0);
}

// Four detector passive receiver: per photon landing weights in units of eta.
inline constexpr std::array<double, 4> kLandingShare = {0.5, 0.0, 0.25, 0.25};

// Probability that exactly one of Bob's detectors fires for l incident photons.
inline double z_hat_B(double eta, std::int64_t l)
{
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::domain_error("z_hat_B: eta outside [0,1]");
    if (l <= 0)
        return 0.0;
    if (l == 1)
        return eta;
    const double p0 = 1.0 - eta;
    const double p0l = std::pow(p0, static_cast<double>(l));
    double s = 0.0;
    for (double share : kLandingShare) {
        if (share == 0.0)
            continue;
        s += std::pow(share * eta + p0, static_cast<double>(l)) - p0l;
    }
    return s;
}

// sum_{l'=min_l}^{l} C(l,l') a^l' (1-a)^(l-l') z_hat_B(eta,l')
inline double Z_kernel(double eta, double a, std::int64_t l, int min_l)
{
    if (!(a >= 0.0 && a <= 1.0))
        throw std::domain_error("Z_kernel: a outside [0,1]");
    if (min_l != 1 && min_l != 2)
        throw std::domain_error("Z_kernel: min_l must be 1 or 2");
    double s = 0.0;
    for (std::int64_t lp = min_l; lp <= l; ++lp)
        s += binom_pmf(l, lp, a) * z_hat_B(eta, lp);
    return s;
}

// Any-click counterpart, used for the sum rule tests.
inline double any_click(double eta, std::int64_t l)
{
    return 1.0 - std::pow(1.0 - eta, static_cast<double>(l));
}

struct SurrogateDistribution {
    enum class Kind { poisson, tabulated };
    Kind kind = Kind::poisson;
    double mu_E = 0.0;
    std::vector<double> pmf; // pmf[l] for tabulated

    static SurrogateDistribution poisson(double mu_E)
    {
        if (!(mu_E >= 0.0))
            throw std::domain_error("surrogate: mu_E must be >= 0");
        SurrogateDistribution s;
        s.mu_E = mu_E;
        return s;
    }
    static SurrogateDistribution tabulated(std::vector<double> p)
    {
        double tot = 0.0;
        for (double v : p) {
            if (!(v >= 0.0))
                throw std::domain_error("surrogate: negative probability");
            tot += v;
        }
        if (std::fabs(tot - 1.0) > 1e-12)
            throw std::domain_error("surrogate: pmf does not sum to 1");
        SurrogateDistribution s;
        s.kind = Kind::tabulated;
        s.pmf = std::move(p);
        return s;
    }

    template <class F>
    double expect(F&& f) const
    {
        if (kind == Kind::poisson)
            return poisson_expect(mu_E, f);
        double s = 0.0;
        for (std::size_t l = 0; l < pmf.size(); ++l)
            s += pmf[l] * f(static_cast<std::int64_t>(l));
        return s;
    }
};

// Partial transmissions on the Alice-Eve and Eve-Bob legs and Eve's
// enhancement factors.
struct TransparencyFactors {
    double alpha_AE = 1.0;
    double alpha_EB = 1.0;
    double rho_AE = 1.0;
    double rho_EB = 1.0;

    double aae() const { return alpha_AE * rho_AE; }
    double aeb() const { return alpha_EB * rho_EB; }
    double alpha() const { return alpha_AE * alpha_EB; }

    void validate() const
    {
        auto in01 = [](double v) { return v >= 0.0 && v <= 1.0 + 1e-12; };
        if (!in01(alpha_AE) || !in01(alpha_EB))
            throw std::domain_error("transparency: partial attenuations outside [0,1]");
        if (!(rho_AE >= 0.0 && rho_EB >= 0.0) || !in01(aae()) || !in01(aeb()))
            throw std::domain_error("transparency: alpha*rho must lie in [0,1]");
    }

    // Eve at Alice's side, channel untouched.
    static TransparencyFactors untouched(double alpha)
    {
        TransparencyFactors t;
        t.alpha_EB = alpha;
        t.validate();
        return t;
    }
    // Worst case: Eve removes all line loss on both legs.
    static TransparencyFactors maximal(double alpha, double split = 1.0)
    {
        TransparencyFactors t;
        t.alpha_AE = split;
        t.alpha_EB = alpha / split;
        t.rho_AE = 1.0 / t.alpha_AE;
        t.rho_EB = 1.0 / t.alpha_EB;
        t.validate();
        return t;
    }
    bool is_maximal() const
    {
        return std::fabs(aae() - 1.0) < 1e-12 && std::fabs(aeb() - 1.0) < 1e-12;
    }
};

// Chance that a surrogate pulse produces an accepted click at Bob.
inline double surrogate_detect_factor(const SurrogateDistribution& xi, double eta, double aeb,
                                      bool mcs)
{
    if (!(aeb >= 0.0 && aeb <= 1.0))
        throw std::domain_error("surrogate_detect_factor: aeb outside [0,1]");
    if (!mcs)
        return xi.expect([&](std::int64_t lE) { return any_click(eta * aeb, lE); });
    return xi.expect([&](std::int64_t lE) { return Z_kernel(eta, aeb, lE, 1); });
}

// Click pattern bit d set iff detector d+1 fired.
using ClickPattern = unsigned;

inline std::map<ClickPattern, double> enumerate_detection_outcomes(std::int64_t l, double eta)
{
    if (l > 12)
        throw std::domain_error("enumerate_detection_outcomes: l > 12, use Monte Carlo");
    if (l < 0)
        throw std::domain_error("enumerate_detection_outcomes: l < 0");
    std::array<double, 5> p{}; // p[0] lost, p[d+1] detector d
    p[0] = 1.0 - eta;
    for (int d = 0; d < 4; ++d)
        p[d + 1] = kLandingShare[d] * eta;

    std::map<ClickPattern, double> out;
    std::vector<double> lf(l + 1);
    for (std::int64_t i = 0; i <= l; ++i)
        lf[i] = std::lgamma(i + 1.0);
    std::array<std::int64_t, 5> k{};
    // walk all compositions k0+..+k4 = l
    for (k[1] = 0; k[1] <= l; ++k[1])
        for (k[2] = 0; k[1] + k[2] <= l; ++k[2])
            for (k[3] = 0; k[1] + k[2] + k[3] <= l; ++k[3])
                for (k[4] = 0; k[1] + k[2] + k[3] + k[4] <= l; ++k[4]) {
                    k[0] = l - k[1] - k[2] - k[3] - k[4];
                    double lp = lf[l];
                    bool zero = false;
                    for (int j = 0; j < 5; ++j) {
                        lp -= lf[k[j]];
                        if (k[j] > 0) {
                            if (p[j] == 0.0) {
                                zero = true;
                                break;
                            }
                            lp += k[j] * std::log(p[j]);
                        }
                    }
                    ClickPattern pat = 0;
                    for (int d = 0; d < 4; ++d)
                        if (k[d + 1] > 0)
                            pat |= 1u << d;
                    out[pat] += zero ? 0.0 : std::exp(lp);
                }
    return out;
}

inline double single_click_probability(const std::map<ClickPattern, double>& dist)
{
    double s = 0.0;
    for (auto [pat, pr] : dist)
        if (pat != 0 && (pat & (pat - 1)) == 0)
            s += pr;
    return s;
}

} // namespace qkd
