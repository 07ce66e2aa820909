#pragma once

#include "auth_cost.hpp"
#include "privacy_amp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace qkd {

struct ECParams {
    double rho = 0.5; // target errors per block
    double N2 = 30;   // clean validation streak
    double n = 2e5;
    double e_T0 = 2e3;

    void validate() const
    {
        if (!(rho > 0.0 && rho <= 2.0))
            throw std::domain_error("ECParams: rho outside (0,2]");
        if (!(N2 >= 1.0))
            throw std::domain_error("ECParams: N2 < 1");
        if (!(e_T0 >= 0.0 && e_T0 < n))
            throw std::domain_error("ECParams: need 0 <= e_T0 < n");
    }
};

struct CommParams {
    double m_p = 1000; // packet payload bits
    double f_o = 400;  // frame overhead bits
    double chi_EC = 2; // coding expansion

    void validate(double max_tag = 0.0) const
    {
        if (!(m_p >= 1.0 && f_o >= 0.0 && chi_EC >= 1.0))
            throw std::domain_error("CommParams: invalid packet parameters");
        if (m_p < 2.0 * chi_EC * max_tag)
            throw std::domain_error("CommParams: tags must fit in one packet");
    }
};

struct ComputeParams {
    int w = 64;        // word size
    double L0 = 1e6;   // non-iterative ops per block
    double per_bit = 25;
    double hash_op = 110;
    double pa_linear = 43;
    double pa_quadratic = 46;

    void validate() const
    {
        if (w != 32 && w != 64)
            throw std::domain_error("ComputeParams: w must be 32 or 64");
    }
};

struct ECIteration {
    double J = 0;   // blocks
    double k = 0;   // block size
    double e_T = 0; // errors left after the iteration
    double e_f = 0; // errors found in the iteration
};

struct ECStatistics {
    double beta = 0;
    int N1 = 0;
    std::vector<ECIteration> iter;
    double e_Tr = 0;
    double N2n = 0;
    double N2f = 0;
    double p_resid_bound = 0;
};

inline double ec_beta(double rho)
{
    return (2.0 * rho - 1.0 + std::exp(-2.0 * rho)) / (2.0 * rho);
}

inline ECStatistics ec_statistics(const ECParams& p)
{
    p.validate();
    ECStatistics s;
    s.beta = ec_beta(p.rho);
    if (p.e_T0 > 2.0 * p.rho)
        s.N1 = static_cast<int>(std::ceil(std::log2(2.0 * p.rho / p.e_T0) / std::log2(s.beta)));
    double prev = p.e_T0;
    for (int i = 1; i <= s.N1; ++i) {
        ECIteration it;
        it.J = std::ceil(prev / p.rho);
        it.k = p.n / it.J;
        it.e_f = (1.0 - s.beta) * prev;
        it.e_T = s.beta * prev;
        prev = it.e_T;
        s.iter.push_back(it);
    }
    s.e_Tr = 2.0 * p.rho;
    s.N2n = p.N2 + 2.0 * p.rho;
    s.N2f = 2.0 * p.rho;
    s.p_resid_bound = std::exp(2.0 * p.rho) * std::exp2(-p.N2);
    return s;
}

// Bits in a bisective search over n/2 validation bits.
inline double validation_search_bits(double n) { return std::ceil(1.0 + std::log2(n / 2.0)); }

// Parity bits disclosed by reconciliation.
inline double ec_parity_leakage(const ECParams& p, bool explicit_sums = false)
{
    ECStatistics s = ec_statistics(p);
    double tail = s.N2n + s.N2f * validation_search_bits(p.n);
    if (s.N1 == 0)
        return tail;
    if (explicit_sums) {
        double sum = 0.0;
        for (const auto& it : s.iter)
            sum += it.J + std::log2(it.k) * it.e_f;
        return sum + tail;
    }
    double b = s.beta, lb = std::log2(b), N1 = s.N1;
    double sumJ = 2.0 * (p.e_T0 - 2.0 * p.rho) / (1.0 - std::exp(-2.0 * p.rho));
    double sumlog =
        p.e_T0 * (std::log2(p.rho * p.n / p.e_T0) * (1.0 - std::pow(b, N1)) -
                  (b * lb / (1.0 - b)) *
                      (1.0 - N1 * std::pow(b, N1 - 1.0) + (N1 - 1.0) * std::pow(b, N1)));
    return sumJ + sumlog + tail;
}

inline double ec_leakage_minimum(double n, double e_T0) { return n * binary_entropy(e_T0 / n); }

enum class PackMode { exact, approx };

inline double packetized_size(double message_bits, const CommParams& c, PackMode mode)
{
    if (!(message_bits >= 1.0))
        throw std::domain_error("packetized_size: empty message");
    double bits = c.chi_EC * message_bits;
    if (mode == PackMode::approx)
        return (1.0 + c.f_o / c.m_p) * bits;
    double full = std::floor(bits / c.m_p);
    double rest = bits - full * c.m_p;
    return (c.m_p + c.f_o) * full + rest + (rest > 0.0 ? c.f_o : 0.0);
}

struct CommLoad {
    double C_BA = 0, C_AB = 0; // bits per block
    double R_BA = 0, R_AB = 0; // bits per second
};

inline CommLoad comm_load(double n, double m, double tau, const ECParams& ep, const CommParams& c,
                          const AuthParams& tags)
{
    tags.validate();
    c.validate(std::max({tags.g_auth, tags.g_EC, tags.g_EC_tilde}));
    if (!(tau > 0.0))
        throw std::domain_error("comm_load: tau must be > 0");
    ECParams p = ep;
    p.n = n;
    ECStatistics s = ec_statistics(p);
    double pk = 1.0 + c.f_o / c.m_p;
    double x = c.chi_EC;
    double ec = 0.0;
    for (const auto& it : s.iter)
        ec += pk * x * it.J + std::ceil(std::log2(it.k)) * pk * x * it.e_f;
    ec += s.N2n * (x + c.f_o) + s.N2f * validation_search_bits(n) * (x + c.f_o);
    double common = (x * tags.g_auth + c.f_o) + ec + c.f_o;
    CommLoad r;
    r.C_BA = pk * x * 2.0 * n * (1.0 + std::log2(m)) + common + x * (tags.g_EC + tags.g_auth);
    r.C_AB = pk * x * 2.0 * n + common + x * (tags.g_EC_tilde + tags.g_auth);
    r.R_BA = r.C_BA / (m * tau);
    r.R_AB = r.C_AB / (m * tau);
    return r;
}

struct CompLoad {
    double ops = 0;       // per block
    double quadratic = 0; // 46 n^2 / w^2
    double rate = 0;      // ops per second
};

// Collected upper bound by default; `exact` keeps every term with its
// double-log denominators.
inline CompLoad comp_load(double n, double m, double tau, const ECParams& ep,
                          const ComputeParams& cp, const AuthParams& tags, bool exact = false)
{
    cp.validate();
    tags.validate();
    if (!(tau > 0.0))
        throw std::domain_error("comp_load: tau must be > 0");
    CompLoad r;
    r.quadratic = cp.pa_quadratic * (n / cp.w) * (n / cp.w);
    if (n <= 0.0) {
        r.ops = cp.L0;
        r.rate = r.ops / (m * tau);
        return r;
    }
    ECParams p = ep;
    p.n = n;
    ECStatistics s = ec_statistics(p);
    double N1 = s.N1, b = cp.per_bit, H = cp.hash_op;
    double decay = 1.0 - std::exp(-2.0 * p.rho);
    double sift = 2.0 * n * (1.0 + std::log2(m));
    double ops;
    if (exact) {
        auto ll = [](double c) { return std::log2(std::log2(c)); };
        ops = cp.L0 + b * sift + H * sift / (tags.g_auth + ll(sift)) + b * 2.0 * n +
              H * 2.0 * n / (tags.g_auth + ll(2.0 * n)) + b * 2.0 * n + b * n + N1 * b * n +
              0.5 * b * decay * N1 * n + (s.N2n + s.N2f) * b * n +
              (s.N2n + s.N2f) * b * n / 2.0 + s.e_Tr * b * n / 2.0 + b * n +
              H * n / (tags.g_EC + ll(n)) + b * 2.0 * n + cp.pa_linear * n / cp.w + r.quadratic;
    } else {
        ops = cp.L0 + (2.0 * b + 2.0 * H / tags.g_auth) * n * (1.0 + std::log2(m)) +
              (8.0 * b + b * N1 + 0.5 * b * decay * N1 + b * p.rho + 1.5 * b * (s.N2n + s.N2f) +
               cp.pa_linear / cp.w + 2.0 * H / tags.g_auth + H / tags.g_EC) *
                  n +
              r.quadratic;
    }
    r.ops = ops;
    r.rate = ops / (m * tau);
    return r;
}

struct MultiplexPlan {
    double B_ceiling = 0;
    double copies = 0;
    double r = 0;
    double R_single = 0;
    double R_multiplexed = 0;
};

inline MultiplexPlan multiplex_plan(double C_ceiling, double a1,
                                    const std::function<double(double)>& R_of_B, double b)
{
    if (!(b > 0.0 && b < 1.0))
        throw std::domain_error("multiplex_plan: b outside (0,1)");
    if (!(C_ceiling > 0.0 && a1 > 0.0))
        throw std::domain_error("multiplex_plan: need positive budget and a1");
    MultiplexPlan p;
    p.B_ceiling = std::sqrt(C_ceiling / a1);
    p.copies = std::floor(1.0 / (b * b) + 1e-12);
    p.R_single = R_of_B(p.B_ceiling);
    p.r = p.R_single != 0.0 ? R_of_B(b * p.B_ceiling) / p.R_single : 0.0;
    p.R_multiplexed = p.r * p.R_single / (b * b);
    return p;
}

} // namespace qkd
