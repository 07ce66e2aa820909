#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace qkd {

// Poisson weights for weak coherent pulses.

inline constexpr double kDefaultTruncTol = 1e-15;

inline double poisson_pmf(double mu, std::int64_t l)
{
    if (!(mu >= 0.0) || !std::isfinite(mu))
        throw std::domain_error("poisson_pmf: mu must be finite and >= 0");
    if (l < 0)
        return 0.0;
    if (mu == 0.0)
        return l == 0 ? 1.0 : 0.0;
    if (l <= 20) {
        double p = std::exp(-mu);
        for (std::int64_t i = 1; i <= l; ++i)
            p *= mu / static_cast<double>(i);
        return p;
    }
    // log space past l = 20 so l! cannot overflow
    double ll = static_cast<double>(l);
    return std::exp(-mu + ll * std::log(mu) - std::lgamma(ll + 1.0));
}

// psi_l(mu): alias of the Poisson weight used by the attack bounds.
inline double psi(double mu, std::int64_t l) { return poisson_pmf(mu, l); }

inline double p_at_least(double mu, int k)
{
    if (!(mu >= 0.0))
        throw std::domain_error("p_at_least: mu must be >= 0");
    if (std::isinf(mu))
        return 1.0;
    switch (k) {
    case 1:
        return -std::expm1(-mu);
    case 2:
        // 1 - e^-mu (1 + mu), written to keep precision at small mu
        if (mu < 1e-3) {
            // sum over j >= 2 of (-1)^j (j-1) mu^j / j!
            double s = 0.0, term = mu * mu / 2.0;
            for (int j = 2; j < 12; ++j) {
                s += (j - 1) * term;
                term *= -mu / (j + 1);
            }
            return s;
        }
        return -std::expm1(-mu) - mu * std::exp(-mu);
    default:
        throw std::domain_error("p_at_least: k must be 1 or 2");
    }
}

inline double psi_ge1(double mu) { return p_at_least(mu, 1); }
inline double psi_ge2(double mu) { return p_at_least(mu, 2); }

// Smallest L with sum_{l>L} pmf < tol, but never below max(10, ceil(mu + 10 sqrt(mu))).
inline std::int64_t truncation_bound(double mu, double tol = kDefaultTruncTol)
{
    if (!(tol > 0.0 && tol < 1.0))
        throw std::domain_error("truncation_bound: tol must be in (0,1)");
    if (!(mu >= 0.0))
        throw std::domain_error("truncation_bound: mu must be >= 0");
    if (mu == 0.0)
        return 0;
    // tail(L) = 1 - cdf(L); accumulate the tail from above so it is not
    // lost to cancellation when it is far below machine epsilon
    std::int64_t hi = static_cast<std::int64_t>(std::ceil(mu + 40.0 * std::sqrt(mu) + 60.0));
    double tail = 0.0;
    for (std::int64_t l = hi + 200; l > hi; --l)
        tail += poisson_pmf(mu, l);
    std::int64_t L = hi;
    while (L > 0) {
        double next = tail + poisson_pmf(mu, L);
        if (next >= tol)
            break;
        tail = next;
        --L;
    }
    // floor keeps short sums from being cut inside the bulk
    auto floor_l = static_cast<std::int64_t>(std::ceil(mu + 10.0 * std::sqrt(mu)));
    if (floor_l < 10)
        floor_l = 10;
    return L < floor_l ? floor_l : L;
}

// Generic helper: sum_{l=lmin}^{L} pmf(mu,l) * f(l)
template <class F>
double poisson_expect(double mu, F&& f, std::int64_t lmin = 0, double tol = kDefaultTruncTol)
{
    std::int64_t L = truncation_bound(mu, tol);
    if (L < lmin)
        L = lmin;
    double s = 0.0;
    for (std::int64_t l = lmin; l <= L; ++l)
        s += poisson_pmf(mu, l) * f(l);
    return s;
}

} // namespace qkd
