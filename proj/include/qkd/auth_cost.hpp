#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qkd {

struct AuthParams {
    double g_auth = 30;
    double g_EC = 30;
    double g_EC_tilde = 30;

    void validate() const
    {
        if (g_auth < 2 || g_EC < 2 || g_EC_tilde < 2)
            throw std::domain_error("AuthParams: tag lengths must be >= 2");
    }
};

// Secret index length for a g-bit tag on a c-bit message.
inline double wegman_carter_w(double g, double c)
{
    if (c < 4.0)
        throw std::domain_error("wegman_carter_w: message shorter than 4 bits");
    if (g < 1.0)
        throw std::domain_error("wegman_carter_w: g < 1");
    double lc = std::log2(c);
    return 4.0 * (g + std::log2(lc)) * lc;
}

struct AuthMessages {
    double c1 = 0, c2 = 0, c3 = 0, c4 = 0, c5 = 0;
};

inline AuthMessages auth_message_costs(double n, double m, const AuthParams& p)
{
    if (n < 1.0 || m < 2.0)
        throw std::domain_error("auth_message_costs: need n >= 1, m >= 2");
    AuthMessages c;
    c.c1 = 2.0 * n * (1.0 + std::log2(m)); // Bob's click indices
    c.c2 = 2.0 * n;                        // Alice's basis reply
    c.c3 = n;                              // error-correction traffic
    c.c4 = p.g_EC;
    c.c5 = p.g_EC_tilde;
    return c;
}

inline double auth_total(double n, double m, const AuthParams& p)
{
    p.validate();
    AuthMessages c = auth_message_costs(n, m, p);
    return p.g_EC_tilde + wegman_carter_w(p.g_auth, c.c1) + wegman_carter_w(p.g_auth, c.c2) +
           wegman_carter_w(p.g_EC, c.c3) + wegman_carter_w(p.g_auth, c.c4) +
           wegman_carter_w(p.g_auth, c.c5);
}

// Returns the largest a/m over the grid; throws if the grid is not increasing.
template <class NofM>
double auth_over_m_limit_check(NofM&& n_of_m, const std::vector<double>& m_grid,
                               const AuthParams& p = {})
{
    double best = 0.0;
    for (std::size_t i = 0; i < m_grid.size(); ++i) {
        if (i > 0 && !(m_grid[i] > m_grid[i - 1]))
            throw std::domain_error("auth_over_m_limit_check: m grid must increase");
        double v = auth_total(n_of_m(m_grid[i]), m_grid[i], p) / m_grid[i];
        if (v > best)
            best = v;
    }
    return best;
}

// d a / d n for equal tag lengths g, from the closed form:
// 4/(n ln2) [3g + 3/ln2 + log2(L1 L2 L3)], L_i = log2 c_i.
inline double auth_dn_common_g(double n, double m, double g)
{
    const double ln2 = std::log(2.0);
    double L1 = std::log2(2.0 * n * (1.0 + std::log2(m)));
    double L2 = std::log2(2.0 * n);
    double L3 = std::log2(n);
    return 4.0 / (n * ln2) * (3.0 * g + 3.0 / ln2 + std::log2(L1 * L2 * L3));
}

} // namespace qkd
