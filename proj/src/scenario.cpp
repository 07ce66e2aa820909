#include "qkd/scenario.hpp"
#include "qkd/csv.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qkd {

namespace {

Scenario leo_base(const std::string& name, double D_B, double zenith_deg, double h_bob,
                  const std::string& key)
{
    Scenario s;
    s.name = name;
    s.link.geometry = FreeSpaceGeometry::leo(D_B, zenith_deg, h_bob);
    s.link.static_key = key;
    return s;
}

Scenario fiber_base(const std::string& name, double A, bool replaced)
{
    Scenario s;
    s.name = name;
    s.kind = LinkKind::fiber;
    s.fiber.A = A;
    s.fiber.L_fiber = 10.0;
    s.fiber_replaced = replaced;
    s.sys.r_c = 0.01;
    s.fixed_mu = replaced ? 0.1 : 0.4;
    return s;
}

std::vector<Scenario> build_presets()
{
    std::vector<Scenario> v;

    Scenario a = leo_base("aircraft_leo_clear", 0.58, 0.0, 35000 * kFeet, "35000ft_LEO");
    a.description = "aircraft at 35000 ft to LEO, 58 cm receiver, clear";
    a.alpha_db = -10.0;
    a.expected = ExpectedResult{57e6, 0.455};
    v.push_back(a);

    Scenario c = a;
    c.name = "aircraft_leo_commercial";
    c.description = "aircraft to LEO with a 1 MHz commercial detector";
    c.sys.tau = 1e-6;
    c.sys.r_d = 1e-6;
    c.mu_from = "aircraft_leo_clear";
    c.expected = ExpectedResult{5700, 0.455};
    v.push_back(c);

    Scenario g = leo_base("ground_leo_clear", 0.5, 0.0, 0.0, "ground_LEO");
    g.description = "sea level to LEO at zenith, 50 cm receiver, clear";
    g.alpha_db = -20.0;
    g.expected = ExpectedResult{1.3e6, 0.131};
    v.push_back(g);

    Scenario g2 = leo_base("ground_leo_clear_1p6m", 1.6, 0.0, 0.0, "ground_LEO");
    g2.description = "sea level to LEO at zenith, 1.6 m receiver, clear";
    g2.alpha_db = -10.0;
    g2.mu_from = "aircraft_leo_clear";
    g2.expected = ExpectedResult{57e6, 0.455};
    v.push_back(g2);

    auto rain = [](Scenario s) {
        s.sys.attack.mcs = true;
        s.sys.attack.direct_strength_factor = 1.0 / 3.0;
        s.sys.m = 2e15;
        s.bracket = {1e-5, 0.5};
        s.note = "modified attack model: mcs on, direct attack at 1/3 strength, m = 2e15";
        return s;
    };
    Scenario r = rain(leo_base("ground_leo_light_rain", 0.43, 45.0, 0.0, "ground_LEO"));
    r.description = "sea level to LEO at 45 deg, 43 cm receiver, light rain";
    r.link.weather = Weather::light_rain;
    r.alpha_db = -60.0;
    r.expected = ExpectedResult{5.0, 0.00328};
    v.push_back(r);

    Scenario r2 = rain(leo_base("ground_leo_light_rain_1p4m", 1.4, 45.0, 0.0, "ground_LEO"));
    r2.description = "sea level to LEO at 45 deg, 1.4 m receiver, light rain";
    r2.link.weather = Weather::light_rain;
    r2.alpha_db = -50.0;
    r2.expected = ExpectedResult{164.0, 0.0106};
    v.push_back(r2);

    Scenario mr = leo_base("ground_leo_moderate_rain", 1.6, 0.0, 0.0, "ground_LEO");
    mr.description = "sea level to LEO at zenith, 1.6 m receiver, moderate rain";
    mr.link.weather = Weather::moderate_rain;
    mr.alpha_db = -76.0;
    mr.expected = ExpectedResult{0.0, 0.0};
    v.push_back(mr);

    Scenario geo;
    geo.name = "earth_geo_clear";
    geo.description = "13500 ft ground station to GEO, 10 m receiver, clear";
    geo.link.geometry = FreeSpaceGeometry::geo(10.0, 13500 * kFeet);
    geo.link.static_key = "13500ft_GEO";
    geo.alpha_db = -26.4;
    geo.sys.m = 2e9;
    geo.sys.attack.mcs = true;
    geo.expected = ExpectedResult{240e3, 0.0891};
    v.push_back(geo);

    Scenario x;
    x.name = "geo_geo_crosslink";
    x.description = "GEO to GEO crosslink over 48683 km, 10 m receiver, vacuum";
    x.link.geometry.D_B = 10.0;
    x.link.geometry.L = 48683e3;
    x.link.geometry.h_bob = kGeoAltitude;
    x.link.geometry.h_alice = kGeoAltitude + 1.0;
    x.link.turbulence = TurbulenceModel::vacuum();
    x.link.scint_turbulence = TurbulenceModel::vacuum();
    x.link.static_key = "space";
    x.sys.m = 2e9;
    x.sys.attack.mcs = true;
    v.push_back(x);

    Scenario f2 = fiber_base("fiber_10km_02", 0.2, false);
    f2.description = "10 km of 0.2 dB/km fiber, cable untouched";
    f2.expected = ExpectedResult{115e6, 0.4};
    v.push_back(f2);
    Scenario f3 = fiber_base("fiber_10km_03", 0.3, false);
    f3.description = "10 km of 0.3 dB/km fiber, cable untouched";
    f3.expected = ExpectedResult{88e6, 0.4};
    v.push_back(f3);
    Scenario f2r = fiber_base("fiber_10km_02_replaced", 0.2, true);
    f2r.description = "10 km of 0.2 dB/km fiber, lossless replacement allowed";
    f2r.expected = ExpectedResult{29e6, 0.1};
    v.push_back(f2r);
    Scenario f3r = fiber_base("fiber_10km_03_replaced", 0.3, true);
    f3r.description = "10 km of 0.3 dB/km fiber, lossless replacement allowed";
    f3r.expected = ExpectedResult{20e6, 0.1};
    v.push_back(f3r);
    return v;
}

double resolve_mu(const Scenario& s, int depth);

MuOptimum optimum_for(const Scenario& s, const SystemParams& p, int depth)
{
    if (s.fixed_mu || s.mu_from) {
        SystemParams q = p;
        q.mu = resolve_mu(s, depth);
        SecrecyResult r = secrecy_capacity(q);
        return {q.mu, r.S, r.R, r.S > 0.0};
    }
    return optimize_mu(p, s.bracket);
}

double resolve_mu(const Scenario& s, int depth)
{
    if (s.fixed_mu)
        return *s.fixed_mu;
    if (s.mu_from) {
        if (depth > 8)
            throw std::runtime_error("mu_from chain too deep at " + s.name);
        const Scenario& o = find_scenario(*s.mu_from);
        return optimum_for(o, resolve_system(o), depth + 1).mu;
    }
    return optimize_mu(resolve_system(s), s.bracket).mu;
}

} // namespace

const std::vector<Scenario>& scenario_presets()
{
    static const std::vector<Scenario> v = build_presets();
    return v;
}

const Scenario& find_scenario(const std::string& name)
{
    for (const auto& s : scenario_presets())
        if (s.name == name)
            return s;
    throw std::out_of_range("unknown scenario '" + name + "'");
}

SystemParams resolve_system(const Scenario& s, std::optional<LossBudget>* loss)
{
    SystemParams p = s.sys;
    if (s.kind == LinkKind::fiber) {
        p.alpha = fiber_alpha(s.fiber);
        p.attack.medium = s.fiber_replaced ? Medium::fiber : Medium::free_space;
    } else {
        p.attack.medium = Medium::free_space;
        std::optional<LossBudget> b;
        try {
            b = total_free_space_alpha(s.link);
        } catch (const std::exception&) {
            if (!s.alpha_db)
                throw;
        }
        p.alpha = s.alpha_db ? db_to_linear(*s.alpha_db) : b->alpha_linear;
        if (loss)
            *loss = b;
    }
    if (s.fixed_mu)
        p.mu = *s.fixed_mu;
    p.validate();
    return p;
}

ScenarioResult run_scenario(const Scenario& s)
{
    ScenarioResult r;
    r.name = s.name;
    r.note = s.note;
    SystemParams p = resolve_system(s, &r.loss);
    r.alpha = p.alpha;
    r.alpha_db = linear_to_db(p.alpha);
    r.alpha_preset = s.kind == LinkKind::free_space && s.alpha_db.has_value();
    r.region_basis = p.attack.medium == Medium::fiber ? "y = eta" : "y = eta*alpha";
    r.mu_fixed = s.fixed_mu.has_value() || s.mu_from.has_value();

    r.opt = optimum_for(s, p, 0);
    p.mu = r.opt.mu;
    r.at_opt = secrecy_capacity(p);
    r.viable = r.opt.viable;

    const auto& t = r.at_opt.terms;
    if (t.n >= 4.0 && t.e_T < t.n) {
        r.auth_bits = auth_total(t.n, p.m, p.auth);
        ECParams ep = s.ec;
        ep.n = t.n;
        ep.e_T0 = std::min(t.e_T, t.n * 0.5);
        r.comm = comm_load(t.n, p.m, p.tau, ep, s.comm, p.auth);
        r.comp = comp_load(t.n, p.m, p.tau, ep, s.compute, p.auth);
    }
    return r;
}

SweepVar sweep_var_from_string(const std::string& s)
{
    static const std::map<std::string, SweepVar> m{
        {"tau", SweepVar::tau},         {"mu", SweepVar::mu},   {"D_B", SweepVar::D_B},
        {"L_fiber", SweepVar::L_fiber}, {"r_c", SweepVar::r_c}, {"eta", SweepVar::eta},
        {"alpha_db", SweepVar::alpha_db}};
    auto it = m.find(s);
    if (it == m.end())
        throw std::invalid_argument("unknown sweep variable '" + s + "'");
    return it->second;
}

std::string to_string(SweepVar v)
{
    switch (v) {
    case SweepVar::tau:
        return "tau";
    case SweepVar::mu:
        return "mu";
    case SweepVar::D_B:
        return "D_B";
    case SweepVar::L_fiber:
        return "L_fiber";
    case SweepVar::r_c:
        return "r_c";
    case SweepVar::eta:
        return "eta";
    default:
        return "alpha_db";
    }
}

static std::string column_name(SweepVar v)
{
    switch (v) {
    case SweepVar::tau:
        return "tau_s";
    case SweepVar::D_B:
        return "D_B_m";
    case SweepVar::L_fiber:
        return "L_fiber_km";
    default:
        return to_string(v);
    }
}

void SweepSpec::validate() const
{
    if (grid.empty())
        throw std::invalid_argument("sweep grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]))
            throw std::invalid_argument("sweep grid has a non-finite value");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw std::invalid_argument("sweep grid must be strictly increasing");
    }
}

static Scenario apply_sweep_value(Scenario s, SweepVar v, double x)
{
    bool fiber = s.kind == LinkKind::fiber;
    switch (v) {
    case SweepVar::tau:
        s.sys.tau = x;
        break;
    case SweepVar::mu:
        s.fixed_mu = x;
        s.mu_from.reset();
        break;
    case SweepVar::D_B:
        if (fiber)
            throw std::invalid_argument("D_B sweep needs a free-space scenario");
        s.link.geometry.D_B = x;
        s.alpha_db.reset();
        break;
    case SweepVar::L_fiber:
        if (!fiber)
            throw std::invalid_argument("L_fiber sweep needs a fiber scenario");
        s.fiber.L_fiber = x;
        break;
    case SweepVar::r_c:
        s.sys.r_c = x;
        break;
    case SweepVar::eta:
        s.sys.eta = x;
        break;
    case SweepVar::alpha_db:
        if (fiber)
            throw std::invalid_argument("alpha_db sweep needs a free-space scenario");
        s.alpha_db = x;
        break;
    }
    return s;
}

std::vector<SweepRow> sweep(const Scenario& s, const SweepSpec& spec)
{
    spec.validate();
    // mu_from is resolved once, not per point
    Scenario base = s;
    if (base.mu_from && spec.variable != SweepVar::mu) {
        base.fixed_mu = resolve_mu(base, 0);
        base.mu_from.reset();
    }
    std::vector<std::future<SweepRow>> jobs;
    for (double x : spec.grid) {
        Scenario pt = apply_sweep_value(base, spec.variable, x);
        jobs.push_back(std::async(std::launch::async, [pt, x] {
            SystemParams p = resolve_system(pt);
            MuOptimum o = optimum_for(pt, p, 0);
            SweepRow row;
            row.value = x;
            row.mu_opt = o.mu;
            row.S_opt = o.S;
            row.R_opt = o.R;
            row.alpha_db = linear_to_db(p.alpha);
            row.viable = o.viable;
            return row;
        }));
    }
    std::vector<SweepRow> rows;
    rows.reserve(jobs.size());
    for (auto& j : jobs)
        rows.push_back(j.get());
    return rows;
}

std::vector<double> parse_grid(const std::string& text)
{
    std::vector<double> g;
    auto num = [&](const std::string& t) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &pos);
        } catch (const std::logic_error&) {
            pos = 0;
        }
        if (pos == 0 || pos != t.size())
            throw std::invalid_argument("bad number '" + t + "' in grid");
        return v;
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ':'))
            parts.push_back(tok);
        if (parts.size() != 3)
            throw std::invalid_argument("grid range must be lo:hi:step");
        double lo = num(parts[0]), hi = num(parts[1]), step = num(parts[2]);
        if (!(step > 0.0) || hi < lo)
            throw std::invalid_argument("grid range needs step > 0 and hi >= lo");
        long count = std::lround(std::floor((hi - lo) / step + 1e-9));
        for (long i = 0; i <= count; ++i)
            g.push_back(lo + static_cast<double>(i) * step);
        return g;
    }
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        g.push_back(num(tok));
    if (g.empty())
        throw std::invalid_argument("empty grid");
    return g;
}

void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows)
{
    os << column_name(spec.variable) << ",mu_opt,S_opt_bits_per_pulse,R_opt_bps,alpha_db,viable\n";
    for (const auto& r : rows)
        os << fmt9(r.value) << ',' << fmt9(r.mu_opt) << ',' << fmt9(r.S_opt) << ','
           << fmt9(r.R_opt) << ',' << fmt9(r.alpha_db) << ',' << (r.viable ? 1 : 0) << '\n';
}

void write_result_csv(std::ostream& os, const ScenarioResult& r)
{
    const auto& t = r.at_opt.terms;
    os << "scenario,alpha_db,mu_opt,mu_fixed,S_opt_bits_per_pulse,R_opt_bps,viable,n_bits,e_T_bits,"
          "n1_bits,e_T1_bits,Q,T,f,nu_bits,g_pa_bits,a_bits,region,y,C_BA_bps,C_AB_bps,"
          "comp_ops_per_s\n";
    os << r.name << ',' << fmt9(r.alpha_db) << ',' << fmt9(r.opt.mu) << ',' << (r.mu_fixed ? 1 : 0)
       << ',' << fmt9(r.opt.S) << ',' << fmt9(r.opt.R) << ',' << (r.viable ? 1 : 0) << ','
       << fmt9(t.n) << ',' << fmt9(t.e_T) << ',' << fmt9(t.n1) << ',' << fmt9(t.e_T1) << ','
       << fmt9(t.Q) << ',' << fmt9(t.T) << ',' << fmt9(t.f) << ',' << fmt9(t.nu) << ','
       << fmt9(t.g_pa) << ',' << fmt9(t.a) << ',' << r.at_opt.region.region << ','
       << fmt9(r.at_opt.region.y) << ',' << fmt9(r.comm.R_BA) << ',' << fmt9(r.comm.R_AB) << ','
       << fmt9(r.comp.rate) << '\n';
}

static std::string si(double v, const char* unit)
{
    const char* pre[] = {"", "k", "M", "G", "T"};
    int i = 0;
    double a = std::fabs(v);
    while (a >= 1000.0 && i < 4) {
        a /= 1000.0;
        v /= 1000.0;
        ++i;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g %s%s", v, pre[i], unit);
    return buf;
}

void write_report(std::ostream& os, const Scenario& s, const ScenarioResult& r)
{
    char buf[256];
    auto line = [&](const char* label, double v, const char* unit = "") {
        std::snprintf(buf, sizeof buf, "  %-34s %14.6g %s\n", label, v, unit);
        os << buf;
    };
    os << "scenario " << r.name << "\n";
    if (!s.description.empty())
        os << "  " << s.description << "\n";
    if (!r.note.empty())
        os << "  note: " << r.note << "\n";

    os << "\nline attenuation\n";
    if (s.kind == LinkKind::fiber) {
        line("fiber length", s.fiber.L_fiber, "km");
        line("attenuation", -s.fiber.A * s.fiber.L_fiber, "dB");
        line("bulk loss", -s.fiber.kappa, "dB");
        os << "  cable " << (s.fiber_replaced ? "may be replaced by a lossless one" : "untouched")
           << "\n";
    } else if (r.loss) {
        const auto& b = *r.loss;
        line("static atmosphere", b.static_db, "dB");
        os << "    source: " << b.static_source << "\n";
        line("beam spread", b.beam_spread, "dB");
        line("beam wander (residual)", b.beam_wander, "dB");
        line("scintillation", b.scintillation, "dB");
        line("spatial coherence", b.spatial_coh, "dB");
        line("quantum coherence", b.quantum_coh, "dB");
        line("pulse distortion", b.pulse_distortion, "dB");
        line("optics package", b.optics_package, "dB");
        line("loss model total", b.total_db(), "dB");
        if (!b.pulse_ok)
            os << "  warning: pulse width below the turbulence distortion threshold\n";
        if (!b.scint_rytov_ok)
            os << "  warning: Rytov variance outside the weak-fluctuation range\n";
    }
    line("alpha used", r.alpha_db, "dB");
    if (r.alpha_preset)
        os << "    (preset value; the loss model above is informational)\n";

    const auto& t = r.at_opt.terms;
    os << "\nsecrecy at mu = " << fmt9(r.opt.mu) << (r.mu_fixed ? " (fixed)" : " (optimal)")
       << "\n";
    line("sifted bits n", t.n);
    line("errors e_T", t.e_T);
    line("single-photon n1", t.n1);
    line("single-photon errors e_T1", t.e_T1);
    line("Q", t.Q);
    line("T", t.T);
    line("f", t.f);
    line("nu (multi-photon)", t.nu, "bits");
    line("g_pa", t.g_pa, "bits");
    line("authentication a", t.a, "bits");
    std::snprintf(buf, sizeof buf, "  region %d, %s = %.6g\n", r.at_opt.region.region,
                  r.region_basis.c_str(), r.at_opt.region.y);
    os << buf;
    line("S", r.opt.S, "bits/pulse");
    os << "  R = " << si(r.opt.R, "bps") << "\n";

    if (!r.viable) {
        os << "\nnonviable: S <= 0; largest subtraction is " << r.at_opt.dominant_loss() << "\n";
    } else {
        os << "\nloads\n";
        line("authentication cost", r.auth_bits, "bits/block");
        line("authentication rate", r.auth_bits / (s.sys.m * s.sys.tau), "bits/s");
        os << "  Bob to Alice " << si(r.comm.R_BA, "bps") << ", Alice to Bob "
           << si(r.comm.R_AB, "bps") << "\n";
        line("computation", r.comp.ops, "ops/block");
        os << "  computation rate " << si(r.comp.rate, "op/s") << "\n";
    }
    if (s.expected && s.expected->R > 0.0) {
        std::snprintf(buf, sizeof buf, "\nreference: R = %s, mu = %.4g\n",
                      si(s.expected->R, "bps").c_str(), s.expected->mu);
        os << buf;
    }
}

} // namespace qkd
