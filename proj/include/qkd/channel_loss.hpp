#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkd {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLightSpeed = 2.99792458e8;
inline constexpr double kFeet = 0.3048;
inline constexpr double kLeoAltitude = 300e3;
inline constexpr double kGeoAltitude = 35783e3;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double a) { return 10.0 * std::log10(a); }

// ---------------------------------------------------------------------------
// quadrature

struct QuadResult {
    double value = 0.0;
    bool converged = true;
};

namespace detail {
template <class F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth, bool& ok)
{
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double diff = left + right - whole;
    if (std::fabs(diff) <= 15.0 * tol)
        return left + right + diff / 15.0;
    if (depth <= 0) {
        ok = false;
        return left + right + diff / 15.0;
    }
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1, ok) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1, ok);
}
} // namespace detail

// Adaptive Simpson over [a,b] with interior breakpoints, relative tolerance.
template <class F>
QuadResult adaptive_simpson(F&& f, double a, double b, double rel_tol = 1e-6,
                            std::vector<double> breaks = {}, int max_depth = 40)
{
    std::vector<double> pts{a};
    for (double p : breaks)
        if (p > a && p < b)
            pts.push_back(p);
    pts.push_back(b);
    // coarse pass fixes the absolute scale
    double scale = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const int N = 64;
        double h = (pts[i + 1] - pts[i]) / N;
        for (int j = 0; j <= N; ++j)
            scale += std::fabs(f(pts[i] + j * h)) * h;
    }
    QuadResult r;
    if (scale == 0.0)
        return r;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double lo = pts[i], hi = pts[i + 1];
        // one-sided values, so a jump sitting on a breakpoint stays outside the segment
        double nudge = 1e-12 * (hi - lo);
        double fa = f(lo + nudge), fb = f(hi - nudge), fm = f(0.5 * (lo + hi));
        double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        double tol = rel_tol * scale * (hi - lo) / (b - a);
        bool ok = true;
        r.value += detail::simpson_rec(f, lo, hi, fa, fm, fb, whole, tol, max_depth, ok);
        r.converged = r.converged && ok;
    }
    return r;
}

// ---------------------------------------------------------------------------
// geometry and turbulence

struct FreeSpaceGeometry {
    double wavelength = 1550e-9;
    double L = kLeoAltitude; // path length, m
    double D_A = 0.3;
    double D_B = 0.3;
    double zenith_angle = 0.0; // rad
    double h_bob = 0.0;
    double h_alice = kLeoAltitude;

    double k() const { return 2.0 * kPi / wavelength; }

    void validate() const
    {
        if (!(wavelength > 0 && L > 0 && D_A > 0 && D_B > 0))
            throw std::domain_error("FreeSpaceGeometry: lengths must be positive");
        if (!(h_bob >= 0 && h_alice > h_bob))
            throw std::domain_error("FreeSpaceGeometry: need 0 <= h_bob < h_alice");
        if (!(zenith_angle >= 0 && zenith_angle < kPi / 2))
            throw std::domain_error("FreeSpaceGeometry: zenith angle outside [0, pi/2)");
    }

    // LEO pass: Alice at 300 km, the path length is the vertical separation
    static FreeSpaceGeometry leo(double D_B, double zenith_deg = 0.0, double h_bob = 0.0)
    {
        FreeSpaceGeometry g;
        g.D_B = D_B;
        g.zenith_angle = zenith_deg * kPi / 180.0;
        g.h_bob = h_bob;
        g.h_alice = kLeoAltitude;
        g.L = kLeoAltitude - h_bob;
        return g;
    }
    static FreeSpaceGeometry geo(double D_B, double h_bob)
    {
        FreeSpaceGeometry g;
        g.D_B = D_B;
        g.h_bob = h_bob;
        g.h_alice = kGeoAltitude;
        g.L = kGeoAltitude - h_bob;
        return g;
    }
};

class TurbulenceModel {
public:
    enum class Kind { vacuum, HV57, CLEAR1, custom };

    static TurbulenceModel vacuum() { return TurbulenceModel(Kind::vacuum); }
    static TurbulenceModel hv57(double wind = 21.0, double A = 1.7e-14)
    {
        TurbulenceModel t(Kind::HV57);
        t.wind_ = wind;
        t.A_ = A;
        return t;
    }
    static TurbulenceModel clear1() { return TurbulenceModel(Kind::CLEAR1); }
    // profile given as (altitude m, C_n^2) pairs, log-linear between nodes, 0 outside
    static TurbulenceModel custom(std::vector<std::pair<double, double>> table)
    {
        for (std::size_t i = 0; i < table.size(); ++i) {
            if (!(table[i].second >= 0.0))
                throw std::domain_error("TurbulenceModel: negative C_n^2");
            if (i > 0 && !(table[i].first > table[i - 1].first))
                throw std::domain_error("TurbulenceModel: altitudes must increase");
        }
        TurbulenceModel t(Kind::custom);
        t.table_ = std::move(table);
        return t;
    }

    Kind kind() const { return kind_; }
    bool is_vacuum() const { return kind_ == Kind::vacuum; }

    double cn2(double h) const
    {
        if (h < 0.0)
            throw std::domain_error("cn2: altitude < 0");
        switch (kind_) {
        case Kind::vacuum:
            return 0.0;
        case Kind::HV57: {
            double w = wind_ / 27.0;
            return 0.00594 * w * w * std::pow(1e-5 * h, 10.0) * std::exp(-h / 1000.0) +
                   2.7e-16 * std::exp(-h / 1500.0) + A_ * std::exp(-h / 100.0);
        }
        case Kind::CLEAR1: {
            // night profile, defined from 1.23 km; held constant below
            double x = std::max(h / 1000.0, 1.23);
            double lg;
            if (x <= 2.13)
                lg = -10.7025 - 4.3507 * x + 0.8141 * x * x;
            else if (x <= 10.34)
                lg = -16.2897 + 0.0335 * x - 0.0134 * x * x;
            else {
                double u = (x - 15.5617) / 3.4666;
                lg = -17.0577 - 0.0449 * x - 0.0005 * x * x + 0.6181 * std::exp(-0.5 * u * u);
            }
            return std::pow(10.0, lg);
        }
        case Kind::custom: {
            if (table_.empty() || h < table_.front().first || h > table_.back().first)
                return 0.0;
            for (std::size_t i = 1; i < table_.size(); ++i) {
                if (h <= table_[i].first) {
                    auto [h0, c0] = table_[i - 1];
                    auto [h1, c1] = table_[i];
                    double s = (h - h0) / (h1 - h0);
                    if (c0 <= 0.0 || c1 <= 0.0)
                        return c0 + s * (c1 - c0);
                    return std::exp(std::log(c0) + s * (std::log(c1) - std::log(c0)));
                }
            }
            return table_.back().second;
        }
        }
        return 0.0;
    }

    // altitudes where the profile changes character
    std::vector<double> breakpoints() const
    {
        switch (kind_) {
        case Kind::HV57:
            return {100, 500, 1000, 3000, 6000, 10000, 15000};
        case Kind::CLEAR1:
            return {1230, 2130, 10340, 15561.7};
        case Kind::custom: {
            std::vector<double> b;
            for (auto& p : table_)
                b.push_back(p.first);
            return b;
        }
        default:
            return {};
        }
    }

private:
    explicit TurbulenceModel(Kind k) : kind_(k) {}
    Kind kind_;
    double wind_ = 21.0;
    double A_ = 1.7e-14;
    std::vector<std::pair<double, double>> table_;
};

// Which terminal the coherence-length weight (1 - eta/L)^{5/3} is anchored to.
enum class PathOrigin { ground, transmitter };

inline constexpr double kTurbulenceCeiling = 30e3;

struct TurbulenceOptions {
    double rel_tol = 1e-6;
    double ceiling = kTurbulenceCeiling; // altitude cap
    PathOrigin origin = PathOrigin::ground;
    int max_depth = 40;
};

namespace detail {
// Integration variable: altitude above Bob, s in [0, min(L, ceiling - h_bob)].
inline std::vector<double> shifted_breaks(const TurbulenceModel& t, double h_bob)
{
    std::vector<double> b;
    for (double h : t.breakpoints())
        if (h > h_bob)
            b.push_back(h - h_bob);
    return b;
}
inline double upper_limit(const FreeSpaceGeometry& g, const TurbulenceOptions& o)
{
    return std::max(0.0, std::min(g.L, o.ceiling - g.h_bob));
}
} // namespace detail

inline double diffraction_radius(const FreeSpaceGeometry& g)
{
    g.validate();
    double kd = g.k() * g.D_A;
    return std::sqrt(4.0 * g.L * g.L / (kd * kd) + g.D_A * g.D_A / 4.0);
}

struct CoherenceLength {
    double rho0 = std::numeric_limits<double>::infinity();
    double integral = 0.0; // the C_n^2 path integral, m^{1/3}
    bool converged = true;
    bool valid = true; // rho0 << D_A < L_o
};

inline CoherenceLength coherence_length_rho0(const FreeSpaceGeometry& g, const TurbulenceModel& t,
                                             const TurbulenceOptions& o = {}, double L_o = 100.0)
{
    g.validate();
    CoherenceLength c;
    if (t.is_vacuum())
        return c;
    double top = detail::upper_limit(g, o);
    auto f = [&](double s) {
        double w = o.origin == PathOrigin::ground ? 1.0 - s / g.L : s / g.L;
        return t.cn2(g.h_bob + s) * std::pow(std::max(w, 0.0), 5.0 / 3.0);
    };
    QuadResult q = adaptive_simpson(f, 0.0, top, o.rel_tol, detail::shifted_breaks(t, g.h_bob),
                                    o.max_depth);
    if (!q.converged)
        throw std::runtime_error("coherence_length_rho0: quadrature did not converge");
    c.integral = q.value;
    if (q.value <= 0.0)
        return c;
    double k = g.k();
    c.rho0 = std::pow(1.46 * k * k / std::cos(g.zenith_angle) * q.value, -3.0 / 5.0);
    c.valid = c.rho0 < g.D_A && g.D_A < L_o;
    return c;
}

// Loss in dB, never a gain.
inline double aperture_loss_db(double D_B, double radius2)
{
    if (radius2 <= 0.0)
        return 0.0;
    return std::min(0.0, linear_to_db(D_B * D_B / (4.0 * radius2)));
}

struct BeamSpread {
    double rho_d = 0.0;
    double rho_s2 = 0.0;
    double loss_db = 0.0;
    bool turbulence_applied = false;
};

// The turbulence term is applied only where its derivation holds (rho0 < D_A);
// otherwise the spot is diffraction limited.
inline BeamSpread beam_spread_loss(const FreeSpaceGeometry& g, const TurbulenceModel& t,
                                   const TurbulenceOptions& o = {})
{
    BeamSpread b;
    b.rho_d = diffraction_radius(g);
    b.rho_s2 = b.rho_d * b.rho_d;
    CoherenceLength c = coherence_length_rho0(g, t, o);
    if (std::isfinite(c.rho0) && c.rho0 < g.D_A) {
        double kr = g.k() * c.rho0;
        double br = 1.0 - 0.62 * std::cbrt(c.rho0 / g.D_A);
        b.rho_s2 += 4.0 * g.L * g.L / (kr * kr) * std::pow(br, 6.0 / 5.0);
        b.turbulence_applied = true;
    }
    b.loss_db = aperture_loss_db(g.D_B, b.rho_s2);
    return b;
}

inline constexpr double kDefaultWanderMitigationDb = 30.0;

struct BeamWander {
    double rho_c2 = 0.0;
    double raw_db = 0.0;
    double residual_db = 0.0;
};

inline BeamWander beam_wander_loss(const FreeSpaceGeometry& g, const TurbulenceModel& t,
                                   double mitigation_db = kDefaultWanderMitigationDb,
                                   const TurbulenceOptions& o = {})
{
    if (mitigation_db < 0.0)
        throw std::domain_error("beam_wander_loss: mitigation must be >= 0 dB");
    BeamWander w;
    CoherenceLength c = coherence_length_rho0(g, t, o);
    if (!std::isfinite(c.rho0))
        return w;
    double k = g.k();
    w.rho_c2 = 2.97 * g.L * g.L / (k * k * std::pow(c.rho0, 5.0 / 3.0) * std::cbrt(g.D_A));
    w.raw_db = aperture_loss_db(g.D_B, w.rho_c2);
    w.residual_db = std::min(0.0, w.raw_db + mitigation_db);
    return w;
}

struct Scintillation {
    double sigma_chi2 = 0.0;
    double sigma_I2 = 0.0;
    double loss_db = 0.0;
    bool rytov_ok = true;
    bool defined = true; // false when sigma_I^2 >= 1
};

inline Scintillation scintillation_loss(const FreeSpaceGeometry& g, const TurbulenceModel& t,
                                        const TurbulenceOptions& o = {})
{
    g.validate();
    Scintillation s;
    if (t.is_vacuum())
        return s;
    double top = detail::upper_limit(g, o);
    auto f = [&](double z) { return t.cn2(g.h_bob + z) * std::pow(z, 5.0 / 6.0); };
    QuadResult q = adaptive_simpson(f, 0.0, top, o.rel_tol, detail::shifted_breaks(t, g.h_bob),
                                    o.max_depth);
    if (!q.converged)
        throw std::runtime_error("scintillation_loss: quadrature did not converge");
    s.sigma_chi2 = 0.56 * std::pow(g.k(), 7.0 / 6.0) * q.value;
    s.sigma_I2 = 4.0 * s.sigma_chi2;
    s.rytov_ok = s.sigma_I2 <= 0.3;
    if (s.sigma_I2 >= 1.0) {
        s.defined = false;
        s.loss_db = -std::numeric_limits<double>::infinity();
        return s;
    }
    s.loss_db = linear_to_db(1.0 - std::sqrt(s.sigma_I2));
    return s;
}

inline constexpr double kFanteThreshold = 0.1; // reading of "<< 1"

struct PulseGate {
    bool ok = true;
    double min_pulse_width = 0.0; // s
    double max_bandwidth = std::numeric_limits<double>::infinity(); // rad/s
    double cn2_path = 0.0; // path-averaged C_n^2
};

// Both spectral-preservation inequalities with C_n^2 taken as its path average.
inline PulseGate pulse_distortion_gate(double bandwidth, const FreeSpaceGeometry& g,
                                       const TurbulenceModel& t, double L_o = 100.0,
                                       double l_o = 1e-3, const TurbulenceOptions& o = {})
{
    if (!(L_o > l_o && l_o > 0.0))
        throw std::domain_error("pulse_distortion_gate: need L_o > l_o > 0");
    g.validate();
    PulseGate p;
    if (t.is_vacuum())
        return p;
    double top = detail::upper_limit(g, o);
    QuadResult q = adaptive_simpson([&](double z) { return t.cn2(g.h_bob + z); }, 0.0, top,
                                    o.rel_tol, detail::shifted_breaks(t, g.h_bob), o.max_depth);
    p.cn2_path = q.value / g.L;
    if (p.cn2_path <= 0.0)
        return p;
    double c = kLightSpeed, L = g.L;
    double w1 = kFanteThreshold * c * std::cbrt(l_o) / (0.91 * p.cn2_path * L * L);
    double w2 = std::sqrt(kFanteThreshold * c * c / (0.39 * p.cn2_path * std::pow(L_o, 5.0 / 3.0) * L));
    p.max_bandwidth = std::min(w1, w2);
    p.min_pulse_width = 1.0 / p.max_bandwidth;
    p.ok = bandwidth <= p.max_bandwidth;
    return p;
}

// ---------------------------------------------------------------------------
// static atmosphere lookup (values quoted for FASCODE runs; see data/)

enum class Weather { clear, light_rain, moderate_rain };

inline std::string to_string(Weather w)
{
    switch (w) {
    case Weather::clear:
        return "clear";
    case Weather::light_rain:
        return "light_rain";
    default:
        return "moderate_rain";
    }
}

Weather weather_from_string(const std::string& s);

struct StaticAtmosEntry {
    std::string key;
    Weather weather;
    double zenith_deg;
    double db;
    std::string source;
};

class StaticAtmosTable {
public:
    static StaticAtmosTable parse(const std::string& text);
    static StaticAtmosTable load(const std::string& path);
    // table shipped with the library
    static const StaticAtmosTable& builtin();

    // nearest angle bin for (key, weather); throws when the pair is absent
    const StaticAtmosEntry& lookup(const std::string& key, Weather w, double zenith_deg) const;
    const std::vector<StaticAtmosEntry>& entries() const { return entries_; }
    std::string version;

private:
    std::vector<StaticAtmosEntry> entries_;
};

inline double static_atmos_loss(const std::string& key, Weather w, double zenith_deg)
{
    return StaticAtmosTable::builtin().lookup(key, w, zenith_deg).db;
}

// ---------------------------------------------------------------------------
// total free-space line attenuation

inline constexpr double kOpticsPackageDb = -5.0;

struct LossBudget {
    double static_db = 0;
    double beam_spread = 0;
    double beam_wander = 0;
    double spatial_coh = 0;
    double quantum_coh = 0;
    double scintillation = 0;
    double pulse_distortion = 0;
    double optics_package = 0;
    double alpha_linear = 1;
    bool pulse_ok = true;
    bool scint_rytov_ok = true;
    std::string static_source;

    double total_db() const
    {
        return static_db + beam_spread + beam_wander + spatial_coh + quantum_coh + scintillation +
               pulse_distortion + optics_package;
    }
};

struct FreeSpaceLink {
    FreeSpaceGeometry geometry;
    // beam spread and wander profile; scintillation and pulse gate profile
    TurbulenceModel turbulence = TurbulenceModel::clear1();
    TurbulenceModel scint_turbulence = TurbulenceModel::hv57();
    std::string static_key = "ground_LEO";
    Weather weather = Weather::clear;
    double optics_package_db = kOpticsPackageDb;
    double wander_mitigation_db = kDefaultWanderMitigationDb;
    double pulse_width = 100e-12; // s
    TurbulenceOptions options;
};

inline LossBudget total_free_space_alpha(const FreeSpaceLink& link)
{
    const auto& g = link.geometry;
    LossBudget b;
    const auto& e = StaticAtmosTable::builtin().lookup(link.static_key, link.weather,
                                                        g.zenith_angle * 180.0 / kPi);
    b.static_db = e.db;
    b.static_source = e.source;
    b.beam_spread = beam_spread_loss(g, link.turbulence, link.options).loss_db;
    b.beam_wander =
        beam_wander_loss(g, link.turbulence, link.wander_mitigation_db, link.options).residual_db;
    Scintillation s = scintillation_loss(g, link.scint_turbulence, link.options);
    if (!s.defined)
        throw std::domain_error("total_free_space_alpha: scintillation loss undefined");
    b.scintillation = s.loss_db;
    b.scint_rytov_ok = s.rytov_ok;
    PulseGate p =
        pulse_distortion_gate(1.0 / link.pulse_width, g, link.scint_turbulence, 100.0, 1e-3,
                              link.options);
    b.pulse_ok = p.ok;
    b.optics_package = std::min(0.0, link.optics_package_db);
    b.alpha_linear = db_to_linear(b.total_db());
    return b;
}

// ---------------------------------------------------------------------------
// fiber

struct FiberParams {
    double L_fiber = 10.0;       // km
    double A = 0.2;              // dB/km
    double kappa = 5.0;          // dB, bulk
    double d_CD = 4.0;           // ps/(nm km)
    double delta_lambda = 0.8;   // nm
    double d_PMD = 0.1;          // ps/sqrt(km)

    void validate() const
    {
        if (!(A >= 0.0 && kappa >= 0.0 && L_fiber >= 0.0))
            throw std::domain_error("FiberParams: A, kappa, L must be >= 0");
    }
};

inline double fiber_alpha(const FiberParams& f)
{
    f.validate();
    return std::pow(10.0, -(f.A * f.L_fiber + f.kappa) / 10.0);
}

struct DispersionGates {
    double tau_CD = 0;  // s
    double tau_PMD = 0; // s
    bool cd_ok = true;
    bool pmd_ok = true;
};

inline DispersionGates dispersion_gates(const FiberParams& f, double tau, double tau_coh)
{
    f.validate();
    DispersionGates d;
    d.tau_CD = f.d_CD * f.L_fiber * f.delta_lambda * 1e-12;
    d.tau_PMD = f.d_PMD * std::sqrt(f.L_fiber) * 1e-12;
    d.cd_ok = d.tau_CD < tau && d.tau_CD < tau_coh;
    d.pmd_ok = d.tau_PMD < tau && d.tau_PMD < tau_coh;
    return d;
}

// ---------------------------------------------------------------------------
// polarizer misalignment

inline double misalignment_rc(double delta)
{
    double s = std::sin(delta);
    return s * s;
}

struct PolarizerProbs {
    double p_detect = 0;      // Prob(detect)
    double p_keep = 0;        // Prob(keep | detect)
    double p_error = 0;       // Prob(error | keep)
    double p_keep_joint = 0;  // Prob(keep)
    double p_error_joint = 0; // Prob(error)
};

// Index order 0, 45, 90, 135 degrees nominal; classes {0,2} and {1,3}.
inline PolarizerProbs appendixA_probs(const std::array<double, 4>& theta_e,
                                      const std::array<double, 4>& theta_r,
                                      const std::array<double, 4>& p_e,
                                      const std::array<double, 4>& p_r)
{
    double se = 0, sr = 0;
    for (int i = 0; i < 4; ++i) {
        se += p_e[i];
        sr += p_r[i];
    }
    if (std::fabs(se - 1.0) > 1e-12 || std::fabs(sr - 1.0) > 1e-12)
        throw std::domain_error("appendixA_probs: probabilities must sum to 1");
    auto cls = [](int i) { return i % 2; };
    PolarizerProbs r;
    for (int i = 0; i < 4; ++i) {
        double det = 0, keep = 0;
        for (int j = 0; j < 4; ++j) {
            double c = std::cos(theta_e[j] - theta_r[i]);
            det += p_e[j] * c * c;
            keep += cls(i) == cls(j) ? p_e[j] : 0.0;
        }
        double cx = std::cos(theta_r[i] - theta_e[(i + 2) % 4]);
        r.p_detect += p_r[i] * det;
        r.p_keep_joint += p_r[i] * keep * det;
        r.p_error_joint += p_r[i] * cx * cx * keep * det;
    }
    r.p_keep = r.p_keep_joint / r.p_detect;
    r.p_error = r.p_error_joint / r.p_keep_joint;
    return r;
}

} // namespace qkd
