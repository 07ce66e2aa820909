#pragma once

#include "detector_model.hpp"
#include "photon_stats.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qkd {

// ---------------------------------------------------------------------------
// information-theoretic pieces

inline double binary_entropy(double z)
{
    if (z <= 0.0 || z >= 1.0)
        return 0.0;
    return -z * std::log2(z) - (1.0 - z) * std::log2(1.0 - z);
}

// Q(x, zeta) = x h(zeta) / zeta
inline double Q_factor(double x, double zeta)
{
    if (zeta <= 0.0 || zeta >= 1.0)
        return 0.0;
    return x * binary_entropy(zeta) / zeta;
}

// Bits leaked by reconciliation with Shannon deficit x.
inline double ec_leakage(double x, double n, double e_T)
{
    if (x < 1.0)
        throw std::domain_error("ec_leakage: x must be >= 1");
    if (e_T <= 0.0 || e_T >= n)
        return 0.0;
    return x * n * binary_entropy(e_T / n);
}

namespace detail {
inline constexpr double kInvSqrtPi = 0.56418958354775628695;

// Winitzki's closed approximation, about 2e-3 relative.
inline double erfinv_guess(double y)
{
    const double a = 0.147;
    const double pi = 3.14159265358979323846;
    double ln = std::log1p(-y * y);
    double t = 2.0 / (pi * a) + ln / 2.0;
    double r = std::sqrt(std::sqrt(t * t - ln / a) - t);
    return y < 0 ? -r : r;
}
} // namespace detail

// erf^{-1}(1 - q) for small q, without forming 1 - q.
inline double erfcinv(double q)
{
    if (!(q > 0.0 && q < 2.0))
        throw std::domain_error("erfcinv: argument outside (0,2)");
    if (q > 1.0)
        return -erfcinv(2.0 - q);
    double x;
    if (q > 1e-3) {
        x = detail::erfinv_guess(1.0 - q);
    } else {
        // asymptotic start: erfc(x) ~ e^{-x^2} / (x sqrt(pi))
        double l = -std::log(q * std::sqrt(3.14159265358979323846));
        x = std::sqrt(l - 0.5 * std::log(l));
    }
    for (int it = 0; it < 60; ++it) {
        double f = std::erfc(x) - q;
        double df = -2.0 * detail::kInvSqrtPi * std::exp(-x * x);
        double dx = f / df;
        // Halley correction, f'' = -2x f'
        dx = dx / (1.0 + x * dx);
        x -= dx;
        if (std::fabs(dx) < 1e-12 * std::max(1.0, std::fabs(x)))
            break;
    }
    return x;
}

inline double erfinv(double y)
{
    if (!(y > -1.0 && y < 1.0))
        throw std::domain_error("erfinv: argument outside (-1,1)");
    if (std::fabs(y) > 0.5)
        return y > 0 ? erfcinv(1.0 - y) : -erfcinv(1.0 + y);
    double x = detail::erfinv_guess(y);
    for (int it = 0; it < 60; ++it) {
        double f = std::erf(x) - y;
        double df = 2.0 * detail::kInvSqrtPi * std::exp(-x * x);
        double dx = f / df;
        dx = dx / (1.0 - x * dx);
        x -= dx;
        if (std::fabs(dx) < 1e-12 * std::max(1.0, std::fabs(x)))
            break;
    }
    return x;
}

// Maximal average Renyi information per single-photon error fraction zeta.
struct RenyiValue {
    double value = 0.0;
    bool saturated = false;
};

inline RenyiValue renyi_max(double zeta)
{
    if (zeta >= 1.0 / 3.0)
        return {1.0, zeta > 1.0 / 3.0};
    if (zeta <= 0.0)
        return {0.0, false};
    double r = (1.0 - 3.0 * zeta) / (1.0 - zeta);
    return {1.0 + std::log2(1.0 - 0.5 * r * r), false};
}

inline double xi_width(double n1, double epsilon)
{
    return erfcinv(epsilon) / std::sqrt(2.0 * n1);
}

struct FrontierResult {
    double t = 0.0; // bits
    double T = 0.0; // t / e_T1 (default) or t / e_T (exact)
    double xi = 0.0;
    bool saturated = false;
};

// Defense frontier for single photon pulses.
inline FrontierResult defense_frontier(double n1, double e_T, double e_T1, double epsilon,
                                       bool exact_T = false)
{
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::domain_error("defense_frontier: epsilon outside (0,1)");
    if (!(e_T1 > 0.0 && e_T1 < n1))
        throw std::domain_error("defense_frontier: need 0 < e_T1 < n1");
    FrontierResult r;
    r.xi = xi_width(n1, epsilon);
    RenyiValue iv = renyi_max(e_T1 / n1 + r.xi);
    r.saturated = iv.saturated;
    r.t = (n1 - e_T1) * iv.value + r.xi * std::sqrt(n1 * (n1 - e_T1));
    r.T = exact_T ? r.t / e_T : r.t / e_T1;
    return r;
}

// The m -> infinity frontier ratio.
inline double frontier_T_infinity(double n1, double e_T1)
{
    return (n1 / e_T1 - 1.0) * renyi_max(e_T1 / n1).value;
}

// ---------------------------------------------------------------------------
// multi-photon attack calculus; every nu below is normalized, nu~ = 2 nu / m

// nullopt scope means "all multi-photon pulses"
using PulseScope = std::optional<std::int64_t>;

namespace detail {
template <class F>
double sum_scope(double mu, const PulseScope& scope, F&& per_l, std::int64_t lmin)
{
    if (scope)
        return *scope < lmin ? 0.0 : psi(mu, *scope) * per_l(*scope);
    return poisson_expect(mu, per_l, lmin);
}

// Binomial thinning of l photons to Eve's station, averaged with g(l').
template <class G>
double thin(std::int64_t l, double a, G&& g)
{
    if (a >= 1.0)
        return g(l);
    double s = 0.0;
    for (std::int64_t lp = 0; lp <= l; ++lp)
        s += binom_pmf(l, lp, a) * g(lp);
    return s;
}
} // namespace detail

// Direct (unambiguous discrimination) attack. xi = nullopt means Eve picks
// the surrogate that is best for her: factor 1 without click monitoring,
// eta with it.
inline double nu_direct(double mu, double eta, const TransparencyFactors& t,
                        const std::optional<SurrogateDistribution>& xi, bool mcs,
                        const PulseScope& scope = std::nullopt)
{
    t.validate();
    double F;
    if (xi)
        F = surrogate_detect_factor(*xi, eta, t.aeb(), mcs);
    else
        F = mcs ? eta : 1.0;
    double aae = t.aae();
    auto per_l = [&](std::int64_t l) {
        return detail::thin(l, aae, [](std::int64_t lp) { return z_hat_E(lp); });
    };
    return F * detail::sum_scope(mu, scope, per_l, 3);
}

// Indirect (photon number splitting) attack with u photons kept by Eve.
inline double nu_indirect_coeff(std::int64_t l, double eta, const TransparencyFactors& t,
                                std::int64_t u, bool mcs)
{
    if (l < 2)
        return 0.0;
    double aae = t.aae(), aeb = t.aeb();
    if (mcs) {
        // remnant of l' - u photons must give exactly one accepted click
        return detail::thin(l, aae, [&](std::int64_t lp) {
            return lp - u < 1 ? 0.0 : Z_kernel(eta, aeb, lp - u, 1);
        });
    }
    double b = eta * aeb;
    double c = eta * aae * aeb;
    double rest;
    if (aae >= 1.0) {
        rest = std::pow(1.0 - b, static_cast<double>(l - u));
    } else if (b < 1.0) {
        rest = std::pow(1.0 - c, static_cast<double>(l)) / std::pow(1.0 - b, static_cast<double>(u));
    } else {
        rest = 1.0; // degenerate algebraic extension, no credit
    }
    double v = 1.0 - rest;
    return v < 0.0 ? 0.0 : v;
}

inline double nu_indirect(double mu, double eta, const TransparencyFactors& t, std::int64_t u,
                          bool mcs, const PulseScope& scope = std::nullopt)
{
    t.validate();
    if (u < 1)
        throw std::domain_error("nu_indirect: u must be >= 1");
    if (scope && u >= *scope)
        throw std::domain_error("nu_indirect: need u <= l - 1");
    return detail::sum_scope(
        mu, scope, [&](std::int64_t l) { return nu_indirect_coeff(l, eta, t, u, mcs); }, 2);
}

// Closed form for all pulses without click monitoring.
inline double nu_indirect_all_closed(double mu, double eta, const TransparencyFactors& t,
                                     std::int64_t u)
{
    double b = eta * t.aeb();
    double c = eta * t.aae() * t.aeb();
    if (b >= 1.0)
        throw std::domain_error("nu_indirect_all_closed: eta*aeb = 1 needs the limit form");
    double inner = std::exp(-mu * c) - std::exp(-mu) * (1.0 + mu * (1.0 - c));
    return psi_ge2(mu) - std::pow(1.0 - b, -static_cast<double>(u)) * inner;
}

inline double nu_pyrrhic(double mu) { return psi_ge2(mu); }

// ---------------------------------------------------------------------------
// region logic in y = eta*alpha (free space) or eta (fiber)

enum class Parity { even, odd };

inline double attack_strength_delta(std::int64_t k, double y, Parity parity)
{
    double kk = static_cast<double>(k);
    if (parity == Parity::even) {
        if (k < 2)
            throw std::domain_error("attack_strength_delta: even branch needs k >= 2");
        return std::exp2(1.0 - kk) - std::pow(1.0 - y, 2.0 * kk - 1.0);
    }
    if (k < 1)
        throw std::domain_error("attack_strength_delta: odd branch needs k >= 1");
    return std::exp2(-kk) - std::pow(1.0 - y, 2.0 * kk);
}

// Delta for a pulse of l >= 3 photons.
inline double attack_strength_delta_l(std::int64_t l, double y)
{
    return l % 2 == 0 ? attack_strength_delta(l / 2, y, Parity::even)
                      : attack_strength_delta((l - 1) / 2, y, Parity::odd);
}

inline double y_odd_boundary() { return 1.0 - 1.0 / std::sqrt(2.0); }

inline double y_even_boundary(std::int64_t k)
{
    if (k < 2)
        throw std::domain_error("y_even_boundary: k >= 2");
    double kk = static_cast<double>(k);
    return 1.0 - std::exp2(-(1.0 - kk) / (1.0 - 2.0 * kk));
}

struct RegionClass {
    int region = 2;
    double y = 0.0;
};

inline RegionClass region_classify(double y)
{
    if (!(y >= 0.0 && y <= 1.0))
        throw std::domain_error("region_classify: y outside [0,1]");
    if (y > y_odd_boundary())
        return {1, y};
    if (y < y_even_boundary(2))
        return {2, y};
    return {3, y};
}

inline double sigma_ratio(std::int64_t k, double y, Parity parity)
{
    double kk = static_cast<double>(k);
    if (parity == Parity::even) {
        if (k < 2)
            throw std::domain_error("sigma_ratio: even branch needs k >= 2");
        return (1.0 - std::pow(1.0 - y, 2.0 * kk - 1.0)) / (1.0 - std::exp2(1.0 - kk));
    }
    if (k < 1)
        throw std::domain_error("sigma_ratio: odd branch needs k >= 1");
    return (1.0 - std::pow(1.0 - y, 2.0 * kk)) / (1.0 - std::exp2(-kk));
}

// 1 when the maximal indirect attack is at least as strong as the direct one.
inline int j_selector(std::int64_t l, double y)
{
    if (l <= 2)
        return 1;
    if (l % 2 == 0)
        return sigma_ratio(l / 2, y, Parity::even) >= 1.0 ? 1 : 0;
    return sigma_ratio((l - 1) / 2, y, Parity::odd) >= 1.0 ? 1 : 0;
}

enum class Medium { free_space, fiber };

struct AttackContext {
    TransparencyFactors transparency;
    std::int64_t u = 1;
    std::optional<SurrogateDistribution> xi; // nullopt: Eve's best surrogate
    std::map<std::int64_t, int> j;           // empty: automatic selection
    bool mcs = false;
    Medium medium = Medium::free_space;
    double direct_strength_factor = 1.0;

    void validate() const
    {
        if (u < 1)
            throw std::domain_error("AttackContext: u >= 1");
        if (!(direct_strength_factor > 0.0 && direct_strength_factor <= 1.0))
            throw std::domain_error("AttackContext: direct_strength_factor outside (0,1]");
        for (auto [l, v] : j)
            if (v != 0 && v != 1)
                throw std::domain_error("AttackContext: j_l must be 0 or 1");
        transparency.validate();
    }
};

namespace detail {
inline double direct_scale(const AttackContext& ctx, double eta)
{
    return ctx.direct_strength_factor * (ctx.mcs ? eta : 1.0);
}

// Region closed forms at a single y value.
inline double nu_region_closed(int region, double mu, double y, double dscale)
{
    const double r2 = std::sqrt(2.0);
    switch (region) {
    case 1: {
        if (1.0 - y < 1e-9)
            return psi_ge2(mu);
        double inner = std::exp(-mu * y) - std::exp(-mu) * (1.0 + mu * (1.0 - y));
        return psi_ge2(mu) - inner / (1.0 - y);
    }
    case 2:
        return psi(mu, 2) * y + z_E_avg(mu) * dscale;
    default: {
        double odd = std::exp(-mu) * (std::sinh(mu) - r2 * std::sinh(mu / r2));
        if (mu < 0.05) // series, the closed form cancels near 0
            odd = poisson_expect(
                mu, [](std::int64_t l) { return l % 2 ? z_hat_E(l) : 0.0; }, 3);
        // Sigma_e over even l = 2k >= 4
        std::int64_t L = truncation_bound(mu);
        double se = 0.0;
        for (std::int64_t k = 2; 2 * k <= L; ++k) {
            double c = sigma_ratio(k, y, Parity::even) >= 1.0
                           ? 1.0 - std::pow(1.0 - y, 2.0 * k - 1.0)
                           : (1.0 - std::exp2(1.0 - static_cast<double>(k))) * dscale;
            se += psi(mu, 2 * k) * c;
        }
        return psi(mu, 2) * y + odd * dscale + se;
    }
    }
}
} // namespace detail

// Per-l maximal coefficient: nu~^max = sum_l psi_l(mu) c_l.
inline double nu_max_coeff(std::int64_t l, double y, const AttackContext& ctx, double eta)
{
    if (l < 2)
        return 0.0;
    if (l == 2)
        return y;
    int j;
    auto it = ctx.j.find(l);
    j = it != ctx.j.end() ? it->second : j_selector(l, y);
    if (j)
        return 1.0 - std::pow(1.0 - y, static_cast<double>(l - 1));
    return z_hat_E(l) * detail::direct_scale(ctx, eta);
}

inline double nu_max_series(double mu, double y, const AttackContext& ctx, double eta)
{
    return poisson_expect(mu, [&](std::int64_t l) { return nu_max_coeff(l, y, ctx, eta); }, 2);
}

// Practical maximal subtraction for multi-photon pulses.
inline double nu_max_total(double mu, double eta, double alpha, const AttackContext& ctx)
{
    double ds = detail::direct_scale(ctx, eta);
    auto at = [&](double y) {
        if (!ctx.j.empty())
            return nu_max_series(mu, y, ctx, eta);
        return detail::nu_region_closed(region_classify(y).region, mu, y, ds);
    };
    if (ctx.medium == Medium::free_space)
        return at(eta * alpha);
    // fiber: Eve may have made the cable lossless
    int r_lo = region_classify(eta * alpha).region;
    int r_hi = region_classify(eta).region;
    if (r_lo == r_hi)
        return at(eta);
    return std::max(at(eta * alpha), at(eta));
}

// Region of the effective y for a context.
inline RegionClass effective_region(double eta, double alpha, Medium medium)
{
    return region_classify(medium == Medium::free_space ? eta * alpha : eta);
}

// ---------------------------------------------------------------------------
// combined attacks: l_d photons to the direct part, the rest to the indirect
// part with u kept in memory

struct AttackSymbol {
    std::int64_t l = 0;
    std::int64_t l_d = 0; // photons taken for the direct part
    std::int64_t l_i = 0; // photons taken for the indirect part
    std::int64_t u = 0;   // 0 when there is no indirect part
    bool direct_active() const { return l_d >= 3; }
    bool indirect_active() const { return l_i >= 2 && u >= 1; }
    bool combined() const { return direct_active() && indirect_active(); }
};

// Every distinct attack on an l-photon pulse.
inline std::vector<AttackSymbol> enumerate_attacks(std::int64_t l)
{
    std::vector<AttackSymbol> out;
    for (std::int64_t ld = l; ld >= 0; --ld) {
        std::int64_t li = l - ld;
        if (ld >= 3 && li < 2) {
            out.push_back({l, ld, li, 0});
            continue;
        }
        if (li >= 2)
            for (std::int64_t u = 1; u <= li - 1; ++u)
                out.push_back({l, ld, li, u});
    }
    return out;
}

struct CombinedStrength {
    double direct_part = 0.0;
    double indirect_part = 0.0;
    // chance that at least one of the two parts succeeds
    double either() const { return 1.0 - (1.0 - direct_part) * (1.0 - indirect_part); }
};

inline CombinedStrength combined_attack_strength(std::int64_t l, std::int64_t l_d, std::int64_t u,
                                                 double y)
{
    if (l < 5 || l_d < 3 || l_d > l - 2 || u < 1 || u > l - l_d - 1)
        throw std::domain_error("combined_attack_strength: kinematic constraint violated");
    CombinedStrength c;
    c.direct_part = z_hat_E(l_d);
    c.indirect_part = 1.0 - std::pow(1.0 - y, static_cast<double>(l - l_d - u));
    return c;
}

} // namespace qkd
