#pragma once

#include "detector_model.hpp"
#include "photon_stats.hpp"

#include <stdexcept>

namespace qkd {

struct ChannelParams {
    double alpha = 1.0; // linear line transmission
    double r_c = 0.0;
    double r_d = 0.0;
    double eta = 1.0;
    double mu = 0.0;
    double m = 1.0; // raw pulses per block

    void validate() const
    {
        auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (!prob(alpha) || !prob(r_c) || !prob(r_d) || !prob(eta))
            throw std::domain_error("ChannelParams: probability outside [0,1]");
        if (!(mu >= 0.0))
            throw std::domain_error("ChannelParams: mu < 0");
        if (!(m >= 1.0))
            throw std::domain_error("ChannelParams: m < 1");
    }
};

struct SiftOutcome {
    double n = 0.0;
    double e_T = 0.0;
    double n1 = 0.0;
    double e_T1 = 0.0;
};

// Fraction of pulses giving an accepted single click under click monitoring:
// eta psi_1(mu alpha) + <chi Z_{>=2}(eta, alpha, l)>
inline double mcs_click_fraction(double eta, double alpha, double mu)
{
    return poisson_expect(mu, [&](std::int64_t l) { return Z_kernel(eta, alpha, l, 1); }, 1);
}

inline double click_fraction(const ChannelParams& p, bool mcs)
{
    return mcs ? mcs_click_fraction(p.eta, p.alpha, p.mu) : psi_ge1(p.eta * p.mu * p.alpha);
}

// `exact` keeps the (1 - r_d) factors that the usual r_d << 1 form drops.
inline double sifted_count(const ChannelParams& p, bool mcs, bool exact = false)
{
    double c = click_fraction(p, mcs);
    if (exact)
        return p.m / 2.0 * ((1.0 - p.r_d) * c + p.r_d);
    return p.m / 2.0 * (c + p.r_d);
}

inline double error_count(const ChannelParams& p, bool mcs, bool exact = false)
{
    double c = click_fraction(p, mcs);
    if (exact)
        return p.m / 2.0 * ((1.0 - p.r_d / 2.0) * p.r_c * c + p.r_d / 2.0);
    return p.m / 2.0 * (p.r_c * c + p.r_d / 2.0);
}

inline SiftOutcome single_photon_parts(const ChannelParams& p)
{
    double s1 = psi(p.eta * p.mu * p.alpha, 1);
    SiftOutcome o;
    o.n1 = p.m / 2.0 * (s1 + p.r_d);
    o.e_T1 = p.m / 2.0 * (p.r_c * s1 + p.r_d / 2.0);
    return o;
}

inline SiftOutcome sift(const ChannelParams& p, bool mcs)
{
    SiftOutcome o = single_photon_parts(p);
    o.n = sifted_count(p, mcs);
    o.e_T = error_count(p, mcs);
    return o;
}

// The naive eta*alpha*psi_{>=1}(mu) form; only a lower bound.
inline double naive_sifted_lower_bound(const ChannelParams& p)
{
    return p.m / 2.0 * (p.eta * psi_ge1(p.mu) * p.alpha + p.r_d);
}

} // namespace qkd
