#include "qkd/scenario.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qkd {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> kKeys{
    {"scenario", {"name", "description", "kind", "note", "base"}},
    {"link",
     {"wavelength_m", "L_m", "D_A_m", "D_B_m", "zenith_deg", "h_bob_m", "h_alice_m", "turbulence",
      "scint_turbulence", "static_key", "weather", "optics_package_db", "wander_mitigation_db",
      "pulse_width_s", "alpha_db"}},
    {"fiber",
     {"L_fiber_km", "A_db_per_km", "kappa_db", "d_CD_ps_per_nm_km", "delta_lambda_nm",
      "d_PMD_ps_per_sqrt_km", "replaced"}},
    {"system",
     {"eta", "mu", "r_c", "r_d", "m_bits", "g_pa_bits", "g_auth_bits", "g_EC_bits",
      "g_EC_tilde_bits", "epsilon", "x", "tau_s", "error_mode", "exact_T", "exact_counts",
      "no_enemy", "fixed_mu", "mu_from", "mu_lo", "mu_hi"}},
    {"attack",
     {"mcs", "u", "direct_strength_factor", "alpha_AE", "alpha_EB", "rho_AE", "rho_EB"}},
    {"loads",
     {"rho", "N2", "m_p_bits", "f_o_bits", "chi_EC", "word_bits", "L0_ops", "per_bit_ops",
      "hash_ops", "pa_linear_ops", "pa_quadratic_ops"}},
    {"expected", {"R_bps", "mu"}},
};

std::string g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& sec, const std::string& key, const std::string& v)
{
    std::size_t pos = 0;
    double d;
    try {
        d = std::stod(v, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != v.size())
        throw std::invalid_argument("config: " + sec + "." + key + " is not a number: '" + v + "'");
    return d;
}

bool to_bool(const std::string& sec, const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw std::invalid_argument("config: " + sec + "." + key + " is not a boolean: '" + v + "'");
}

TurbulenceModel turbulence_from(const std::string& v)
{
    if (v == "vacuum")
        return TurbulenceModel::vacuum();
    if (v == "hv57")
        return TurbulenceModel::hv57();
    if (v == "clear1")
        return TurbulenceModel::clear1();
    throw std::invalid_argument("config: unknown turbulence profile '" + v + "'");
}

std::string turbulence_name(const TurbulenceModel& t)
{
    switch (t.kind()) {
    case TurbulenceModel::Kind::vacuum:
        return "vacuum";
    case TurbulenceModel::Kind::HV57:
        return "hv57";
    case TurbulenceModel::Kind::CLEAR1:
        return "clear1";
    default:
        throw std::invalid_argument("config: tabulated turbulence profiles cannot be written");
    }
}

} // namespace

Scenario parse_config(const std::string& text)
{
    pt::ptree tree;
    std::istringstream in(text);
    pt::read_ini(in, tree);

    for (const auto& [sec, body] : tree) {
        auto it = kKeys.find(sec);
        if (it == kKeys.end())
            throw std::invalid_argument("config: unknown section [" + sec + "]");
        for (const auto& kv : body)
            if (!it->second.count(kv.first))
                throw std::invalid_argument("config: unknown key " + sec + "." + kv.first);
    }

    Scenario s;
    if (auto base = tree.get_optional<std::string>("scenario.base"))
        s = find_scenario(*base);

    auto each = [&](const std::string& sec, auto&& fn) {
        if (auto b = tree.get_child_optional(sec))
            for (const auto& kv : *b)
                fn(kv.first, kv.second.data());
    };
    each("scenario", [&](const std::string& k, const std::string& v) {
        if (k == "name")
            s.name = v;
        else if (k == "description")
            s.description = v;
        else if (k == "note")
            s.note = v;
        else if (k == "kind") {
            if (v == "free_space")
                s.kind = LinkKind::free_space;
            else if (v == "fiber")
                s.kind = LinkKind::fiber;
            else
                throw std::invalid_argument("config: scenario.kind must be free_space or fiber");
        }
    });
    each("link", [&](const std::string& k, const std::string& v) {
        auto& g = s.link.geometry;
        auto d = [&] { return to_double("link", k, v); };
        if (k == "wavelength_m")
            g.wavelength = d();
        else if (k == "L_m")
            g.L = d();
        else if (k == "D_A_m")
            g.D_A = d();
        else if (k == "D_B_m")
            g.D_B = d();
        else if (k == "zenith_deg")
            g.zenith_angle = d() * kPi / 180.0;
        else if (k == "h_bob_m")
            g.h_bob = d();
        else if (k == "h_alice_m")
            g.h_alice = d();
        else if (k == "turbulence")
            s.link.turbulence = turbulence_from(v);
        else if (k == "scint_turbulence")
            s.link.scint_turbulence = turbulence_from(v);
        else if (k == "static_key")
            s.link.static_key = v;
        else if (k == "weather")
            s.link.weather = weather_from_string(v);
        else if (k == "optics_package_db")
            s.link.optics_package_db = d();
        else if (k == "wander_mitigation_db")
            s.link.wander_mitigation_db = d();
        else if (k == "pulse_width_s")
            s.link.pulse_width = d();
        else if (k == "alpha_db") {
            if (v == "model")
                s.alpha_db.reset();
            else
                s.alpha_db = d();
        }
    });
    each("fiber", [&](const std::string& k, const std::string& v) {
        auto d = [&] { return to_double("fiber", k, v); };
        if (k == "L_fiber_km")
            s.fiber.L_fiber = d();
        else if (k == "A_db_per_km")
            s.fiber.A = d();
        else if (k == "kappa_db")
            s.fiber.kappa = d();
        else if (k == "d_CD_ps_per_nm_km")
            s.fiber.d_CD = d();
        else if (k == "delta_lambda_nm")
            s.fiber.delta_lambda = d();
        else if (k == "d_PMD_ps_per_sqrt_km")
            s.fiber.d_PMD = d();
        else if (k == "replaced")
            s.fiber_replaced = to_bool("fiber", k, v);
    });
    each("system", [&](const std::string& k, const std::string& v) {
        auto& p = s.sys;
        auto d = [&] { return to_double("system", k, v); };
        auto b = [&] { return to_bool("system", k, v); };
        if (k == "eta")
            p.eta = d();
        else if (k == "mu")
            p.mu = d();
        else if (k == "r_c")
            p.r_c = d();
        else if (k == "r_d")
            p.r_d = d();
        else if (k == "m_bits")
            p.m = d();
        else if (k == "g_pa_bits")
            p.g_pa = d();
        else if (k == "g_auth_bits")
            p.auth.g_auth = d();
        else if (k == "g_EC_bits")
            p.auth.g_EC = d();
        else if (k == "g_EC_tilde_bits")
            p.auth.g_EC_tilde = d();
        else if (k == "epsilon")
            p.epsilon = d();
        else if (k == "x")
            p.x = d();
        else if (k == "tau_s")
            p.tau = d();
        else if (k == "error_mode") {
            if (v == "discard")
                p.error_mode = ErrorMode::discard;
            else if (v == "retain")
                p.error_mode = ErrorMode::retain;
            else
                throw std::invalid_argument("config: system.error_mode must be discard or retain");
        } else if (k == "exact_T")
            p.exact_T = b();
        else if (k == "exact_counts")
            p.exact_counts = b();
        else if (k == "no_enemy")
            p.no_enemy = b();
        else if (k == "fixed_mu") {
            if (v == "none")
                s.fixed_mu.reset();
            else
                s.fixed_mu = d();
        } else if (k == "mu_from") {
            if (v == "none")
                s.mu_from.reset();
            else
                s.mu_from = v;
        } else if (k == "mu_lo")
            s.bracket.first = d();
        else if (k == "mu_hi")
            s.bracket.second = d();
    });
    each("attack", [&](const std::string& k, const std::string& v) {
        auto& a = s.sys.attack;
        auto d = [&] { return to_double("attack", k, v); };
        if (k == "mcs")
            a.mcs = to_bool("attack", k, v);
        else if (k == "u")
            a.u = static_cast<std::int64_t>(d());
        else if (k == "direct_strength_factor")
            a.direct_strength_factor = d();
        else if (k == "alpha_AE")
            a.transparency.alpha_AE = d();
        else if (k == "alpha_EB")
            a.transparency.alpha_EB = d();
        else if (k == "rho_AE")
            a.transparency.rho_AE = d();
        else if (k == "rho_EB")
            a.transparency.rho_EB = d();
    });
    each("loads", [&](const std::string& k, const std::string& v) {
        double x = to_double("loads", k, v);
        if (k == "rho")
            s.ec.rho = x;
        else if (k == "N2")
            s.ec.N2 = x;
        else if (k == "m_p_bits")
            s.comm.m_p = x;
        else if (k == "f_o_bits")
            s.comm.f_o = x;
        else if (k == "chi_EC")
            s.comm.chi_EC = x;
        else if (k == "word_bits")
            s.compute.w = static_cast<int>(x);
        else if (k == "L0_ops")
            s.compute.L0 = x;
        else if (k == "per_bit_ops")
            s.compute.per_bit = x;
        else if (k == "hash_ops")
            s.compute.hash_op = x;
        else if (k == "pa_linear_ops")
            s.compute.pa_linear = x;
        else if (k == "pa_quadratic_ops")
            s.compute.pa_quadratic = x;
    });
    each("expected", [&](const std::string& k, const std::string& v) {
        if (!s.expected)
            s.expected = ExpectedResult{};
        if (k == "R_bps")
            s.expected->R = to_double("expected", k, v);
        else
            s.expected->mu = to_double("expected", k, v);
    });

    if (s.name.empty())
        throw std::invalid_argument("config: scenario.name is required");
    resolve_system(s); // validates
    return s;
}

Scenario load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

void write_config(std::ostream& os, const Scenario& s)
{
    auto b = [](bool v) { return v ? "true" : "false"; };
    os << "[scenario]\n";
    os << "name = " << s.name << "\n";
    if (!s.description.empty())
        os << "description = " << s.description << "\n";
    if (!s.note.empty())
        os << "note = " << s.note << "\n";
    os << "kind = " << (s.kind == LinkKind::fiber ? "fiber" : "free_space") << "\n";

    const auto& g = s.link.geometry;
    os << "\n[link]\n";
    os << "wavelength_m = " << g17(g.wavelength) << "\n";
    os << "L_m = " << g17(g.L) << "\n";
    os << "D_A_m = " << g17(g.D_A) << "\n";
    os << "D_B_m = " << g17(g.D_B) << "\n";
    os << "zenith_deg = " << g17(g.zenith_angle * 180.0 / kPi) << "\n";
    os << "h_bob_m = " << g17(g.h_bob) << "\n";
    os << "h_alice_m = " << g17(g.h_alice) << "\n";
    os << "turbulence = " << turbulence_name(s.link.turbulence) << "\n";
    os << "scint_turbulence = " << turbulence_name(s.link.scint_turbulence) << "\n";
    os << "static_key = " << s.link.static_key << "\n";
    os << "weather = " << to_string(s.link.weather) << "\n";
    os << "optics_package_db = " << g17(s.link.optics_package_db) << "\n";
    os << "wander_mitigation_db = " << g17(s.link.wander_mitigation_db) << "\n";
    os << "pulse_width_s = " << g17(s.link.pulse_width) << "\n";
    os << "alpha_db = " << (s.alpha_db ? g17(*s.alpha_db) : std::string("model")) << "\n";

    os << "\n[fiber]\n";
    os << "L_fiber_km = " << g17(s.fiber.L_fiber) << "\n";
    os << "A_db_per_km = " << g17(s.fiber.A) << "\n";
    os << "kappa_db = " << g17(s.fiber.kappa) << "\n";
    os << "d_CD_ps_per_nm_km = " << g17(s.fiber.d_CD) << "\n";
    os << "delta_lambda_nm = " << g17(s.fiber.delta_lambda) << "\n";
    os << "d_PMD_ps_per_sqrt_km = " << g17(s.fiber.d_PMD) << "\n";
    os << "replaced = " << b(s.fiber_replaced) << "\n";

    const auto& p = s.sys;
    os << "\n[system]\n";
    os << "eta = " << g17(p.eta) << "\n";
    os << "mu = " << g17(p.mu) << "\n";
    os << "r_c = " << g17(p.r_c) << "\n";
    os << "r_d = " << g17(p.r_d) << "\n";
    os << "m_bits = " << g17(p.m) << "\n";
    os << "g_pa_bits = " << g17(p.g_pa) << "\n";
    os << "g_auth_bits = " << g17(p.auth.g_auth) << "\n";
    os << "g_EC_bits = " << g17(p.auth.g_EC) << "\n";
    os << "g_EC_tilde_bits = " << g17(p.auth.g_EC_tilde) << "\n";
    os << "epsilon = " << g17(p.epsilon) << "\n";
    os << "x = " << g17(p.x) << "\n";
    os << "tau_s = " << g17(p.tau) << "\n";
    os << "error_mode = " << (p.error_mode == ErrorMode::retain ? "retain" : "discard") << "\n";
    os << "exact_T = " << b(p.exact_T) << "\n";
    os << "exact_counts = " << b(p.exact_counts) << "\n";
    os << "no_enemy = " << b(p.no_enemy) << "\n";
    os << "fixed_mu = " << (s.fixed_mu ? g17(*s.fixed_mu) : std::string("none")) << "\n";
    os << "mu_from = " << (s.mu_from ? *s.mu_from : std::string("none")) << "\n";
    os << "mu_lo = " << g17(s.bracket.first) << "\n";
    os << "mu_hi = " << g17(s.bracket.second) << "\n";

    const auto& a = p.attack;
    os << "\n[attack]\n";
    os << "mcs = " << b(a.mcs) << "\n";
    os << "u = " << a.u << "\n";
    os << "direct_strength_factor = " << g17(a.direct_strength_factor) << "\n";
    os << "alpha_AE = " << g17(a.transparency.alpha_AE) << "\n";
    os << "alpha_EB = " << g17(a.transparency.alpha_EB) << "\n";
    os << "rho_AE = " << g17(a.transparency.rho_AE) << "\n";
    os << "rho_EB = " << g17(a.transparency.rho_EB) << "\n";

    os << "\n[loads]\n";
    os << "rho = " << g17(s.ec.rho) << "\n";
    os << "N2 = " << g17(s.ec.N2) << "\n";
    os << "m_p_bits = " << g17(s.comm.m_p) << "\n";
    os << "f_o_bits = " << g17(s.comm.f_o) << "\n";
    os << "chi_EC = " << g17(s.comm.chi_EC) << "\n";
    os << "word_bits = " << s.compute.w << "\n";
    os << "L0_ops = " << g17(s.compute.L0) << "\n";
    os << "per_bit_ops = " << g17(s.compute.per_bit) << "\n";
    os << "hash_ops = " << g17(s.compute.hash_op) << "\n";
    os << "pa_linear_ops = " << g17(s.compute.pa_linear) << "\n";
    os << "pa_quadratic_ops = " << g17(s.compute.pa_quadratic) << "\n";

    if (s.expected) {
        os << "\n[expected]\n";
        os << "R_bps = " << g17(s.expected->R) << "\n";
        os << "mu = " << g17(s.expected->mu) << "\n";
    }
}

} // namespace qkd
