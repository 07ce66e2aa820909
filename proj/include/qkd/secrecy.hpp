#pragma once

#include "auth_cost.hpp"
#include "privacy_amp.hpp"
#include "sift_model.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace qkd {

enum class ErrorMode { discard, retain };

struct SystemParams {
    double eta = 0.5;
    double mu = 0.455;
    double alpha = 0.1;
    double r_c = 0.005;
    double r_d = 4.25e-18;
    double m = 2e8;
    double g_pa = 30;
    AuthParams auth;
    double epsilon = 1e-9;
    double x = 1.16;
    double tau = 1e-10; // s per pulse
    AttackContext attack;

    // model switches
    ErrorMode error_mode = ErrorMode::discard;
    bool exact_T = false;
    bool exact_counts = false;
    bool no_enemy = false;

    bool mcs() const { return attack.mcs; }

    ChannelParams channel() const { return {alpha, r_c, r_d, eta, mu, m}; }

    void validate() const
    {
        channel().validate();
        attack.validate();
        auth.validate();
        if (!(tau > 0.0))
            throw std::domain_error("SystemParams: tau must be > 0");
        if (!(x >= 1.0))
            throw std::domain_error("SystemParams: x must be >= 1");
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw std::domain_error("SystemParams: epsilon outside (0,1)");
        if (!(g_pa >= 0.0))
            throw std::domain_error("SystemParams: g_pa < 0");
    }
};

// All quantities in bits per block unless noted.
struct SecrecyTerms {
    double n = 0, e_T = 0, n1 = 0, e_T1 = 0;
    double Q = 0, T = 0, f = 1;
    double q = 0;       // Q e_T
    double t = 0;       // T e_T
    double nu = 0;      // multi-photon subtraction
    double nu_norm = 0; // 2 nu / m
    double g_pa = 0, a = 0;
    bool frontier_saturated = false;
};

struct SecrecyResult {
    double S = 0; // bits per pulse
    double R = 0; // bits per second
    SecrecyTerms terms;
    RegionClass region;

    // name of the largest subtraction, used by reports
    std::string dominant_loss() const
    {
        double fe = terms.f * terms.e_T, oh = terms.g_pa + terms.a;
        if (fe >= terms.nu && fe >= oh)
            return "error correction and defense frontier (f*e_T)";
        if (terms.nu >= oh)
            return "multi-photon subtraction (nu)";
        return "security overhead (g_pa + a)";
    }
};

inline double f_factor(double Q, double T, ErrorMode mode)
{
    if (Q < 0.0 || T < 0.0)
        throw std::domain_error("f_factor: Q and T must be >= 0");
    return mode == ErrorMode::discard ? 1.0 + Q + T : Q + T;
}

inline double secrecy_rate(double S, double tau)
{
    if (!(tau > 0.0))
        throw std::domain_error("secrecy_rate: tau must be > 0");
    return S / tau;
}

inline SecrecyResult secrecy_capacity(const SystemParams& p)
{
    p.validate();
    ChannelParams cp = p.channel();
    SecrecyTerms tm;
    tm.n = sifted_count(cp, p.mcs(), p.exact_counts);
    tm.e_T = error_count(cp, p.mcs(), p.exact_counts);
    SiftOutcome one = single_photon_parts(cp);
    tm.n1 = one.n1;
    tm.e_T1 = one.e_T1;

    SecrecyResult r;
    r.region = effective_region(p.eta, p.alpha, p.attack.medium);
    if (!p.no_enemy) {
        tm.Q = tm.n > 0.0 ? Q_factor(p.x, tm.e_T / tm.n) : 0.0;
        if (tm.e_T1 > 0.0 && tm.e_T1 < tm.n1) {
            FrontierResult fr = defense_frontier(tm.n1, tm.e_T, tm.e_T1, p.epsilon, p.exact_T);
            tm.T = fr.T;
            tm.frontier_saturated = fr.saturated;
        }
        tm.nu_norm = nu_max_total(p.mu, p.eta, p.alpha, p.attack);
        tm.nu = p.m / 2.0 * tm.nu_norm;
        tm.g_pa = p.g_pa;
        tm.a = tm.n >= 4.0 ? auth_total(tm.n, p.m, p.auth) : 0.0; // w() needs c >= 4
    }
    tm.f = p.no_enemy && p.error_mode == ErrorMode::retain ? 0.0
                                                           : f_factor(tm.Q, tm.T, p.error_mode);
    tm.q = tm.Q * tm.e_T;
    tm.t = tm.T * tm.e_T;
    r.S = (tm.n - tm.f * tm.e_T - tm.nu - tm.g_pa - tm.a) / p.m;
    r.R = secrecy_rate(r.S, p.tau);
    r.terms = tm;
    return r;
}

// m -> infinity capacity at the same mu.
inline double secrecy_capacity_infinite(const SystemParams& p)
{
    p.validate();
    ChannelParams cp = p.channel();
    cp.m = 2.0; // counts are linear in m; only ratios matter here
    double n = sifted_count(cp, p.mcs(), p.exact_counts);
    double eT = error_count(cp, p.mcs(), p.exact_counts);
    SiftOutcome one = single_photon_parts(cp);
    double Q = Q_factor(p.x, eT / n);
    double T = one.e_T1 > 0.0 ? frontier_T_infinity(one.n1, one.e_T1) : 0.0;
    if (p.exact_T && eT > 0.0)
        T *= one.e_T1 / eT;
    double f = f_factor(Q, T, p.error_mode);
    double nu = nu_max_total(p.mu, p.eta, p.alpha, p.attack);
    return (n - f * eT - nu) / 2.0;
}

struct MuOptimum {
    double mu = 0.0;
    double S = 0.0;
    double R = 0.0;
    bool viable = false;
};

inline constexpr std::pair<double, double> kDefaultMuBracket{1e-4, 2.0};

// Grid scan, then Brent (golden section with parabolic steps) on the best cell.
inline MuOptimum optimize_mu(SystemParams p, std::pair<double, double> bracket = kDefaultMuBracket)
{
    auto [lo, hi] = bracket;
    if (!(lo > 0.0 && hi <= 5.0 && lo < hi))
        throw std::domain_error("optimize_mu: bracket must lie in (0,5]");
    auto S_at = [&](double mu) {
        SystemParams q = p;
        q.mu = mu;
        return secrecy_capacity(q).S;
    };
    const int N = 96;
    std::vector<double> grid(N + 1);
    double best_S = -std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i <= N; ++i) {
        grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / N);
        double s = S_at(grid[i]);
        if (s > best_S) {
            best_S = s;
            best_i = i;
        }
    }
    double a = grid[std::max(best_i - 1, 0)];
    double b = grid[std::min(best_i + 1, N)];
    std::uintmax_t iters = 500;
    auto res = boost::math::tools::brent_find_minima([&](double mu) { return -S_at(mu); }, a, b,
                                                     std::numeric_limits<double>::digits / 2 + 4,
                                                     iters);
    MuOptimum o;
    o.mu = res.first;
    o.S = -res.second;
    if (best_S > o.S) { // endpoint maximum
        o.mu = grid[best_i];
        o.S = best_S;
    }
    o.R = secrecy_rate(o.S, p.tau);
    o.viable = o.S > 0.0;
    return o;
}

inline bool viability(const SystemParams& p, std::pair<double, double> bracket = kDefaultMuBracket)
{
    return optimize_mu(p, bracket).viable;
}

} // namespace qkd
