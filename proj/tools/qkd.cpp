#include "qkd/csv.hpp"
#include "qkd/ec_sim.hpp"
#include "qkd/scenario.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

using namespace qkd;

namespace {

struct Inputs {
    std::string scenario;
    std::string config;
    std::optional<double> eta, alpha_db, rc, rd, tau, m, mu;
    bool mcs = false;
};

void add_inputs(CLI::App* cmd, Inputs& in)
{
    cmd->add_option("--scenario", in.scenario, "preset name (see 'scenario list')");
    cmd->add_option("--config", in.config, "config file; bare names are also looked up in $QKD_CONFIG_DIR");
    cmd->add_option("--eta", in.eta, "detector efficiency");
    cmd->add_option("--alpha-db", in.alpha_db, "line attenuation, dB");
    cmd->add_option("--rc", in.rc, "intrinsic channel error fraction");
    cmd->add_option("--rd", in.rd, "dark count per bit cell");
    cmd->add_option("--tau", in.tau, "bit cell period, s");
    cmd->add_option("--m", in.m, "raw block size, bits");
    cmd->add_option("--mu", in.mu, "fix the mean photon number");
    cmd->add_flag("--mcs", in.mcs, "Bob monitors click statistics");
}

std::string find_config(const std::string& name)
{
    namespace fs = std::filesystem;
    if (fs::exists(name))
        return name;
    if (const char* dir = std::getenv("QKD_CONFIG_DIR")) {
        for (const std::string& cand : {name, name + ".ini"}) {
            fs::path p = fs::path(dir) / cand;
            if (fs::exists(p))
                return p.string();
        }
    }
    throw std::runtime_error("config '" + name + "' not found");
}

Scenario resolve_inputs(const Inputs& in)
{
    if (in.scenario.empty() == in.config.empty())
        throw CLI::ValidationError("give exactly one of --scenario or --config");
    Scenario s = in.config.empty() ? find_scenario(in.scenario) : load_config(find_config(in.config));
    if (in.eta)
        s.sys.eta = *in.eta;
    if (in.alpha_db) {
        if (s.kind == LinkKind::fiber)
            throw CLI::ValidationError("--alpha-db applies to free-space scenarios");
        s.alpha_db = *in.alpha_db;
    }
    if (in.rc)
        s.sys.r_c = *in.rc;
    if (in.rd)
        s.sys.r_d = *in.rd;
    if (in.tau)
        s.sys.tau = *in.tau;
    if (in.m)
        s.sys.m = *in.m;
    if (in.mcs)
        s.sys.attack.mcs = true;
    if (in.mu) {
        s.fixed_mu = *in.mu;
        s.mu_from.reset();
    }
    return s;
}

// --out file or stdout
struct Sink {
    std::unique_ptr<std::ofstream> file;
    std::ostream& get(const std::string& path)
    {
        if (path.empty())
            return std::cout;
        file = std::make_unique<std::ofstream>(path);
        if (!*file)
            throw std::runtime_error("cannot write " + path);
        return *file;
    }
};

FreeSpaceLink link_for(const std::string& geometry, double D_B)
{
    FreeSpaceLink l;
    if (geometry == "leo_zenith") {
        l.geometry = FreeSpaceGeometry::leo(D_B);
    } else if (geometry == "leo_45") {
        l.geometry = FreeSpaceGeometry::leo(D_B, 45.0);
    } else if (geometry == "aircraft_leo") {
        l.geometry = FreeSpaceGeometry::leo(D_B, 0.0, 35000 * kFeet);
        l.static_key = "35000ft_LEO";
    } else if (geometry == "geo") {
        l.geometry = FreeSpaceGeometry::geo(D_B, 0.0);
        l.static_key = "13500ft_GEO";
        l.turbulence = TurbulenceModel::vacuum();
        l.scint_turbulence = TurbulenceModel::vacuum();
    } else if (geometry == "geo_13500ft") {
        l.geometry = FreeSpaceGeometry::geo(D_B, 13500 * kFeet);
        l.static_key = "13500ft_GEO";
    } else {
        throw CLI::ValidationError("unknown geometry '" + geometry + "'");
    }
    return l;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Secrecy rate, loss and load calculator for weak-pulse BB84 links"};
    app.require_subcommand(1);
    std::string out;
    int exit_code = 0;

    Inputs rate_in;
    bool rate_csv = false;
    auto* rate = app.add_subcommand("rate", "report the optimal secrecy rate of a scenario");
    add_inputs(rate, rate_in);
    rate->add_flag("--csv", rate_csv, "emit a CSV row instead of the text report");
    rate->add_option("--out", out, "output file");

    Inputs opt_in;
    std::string curve;
    auto* optmu = app.add_subcommand("optimize-mu", "optimal mu, optionally with the S(mu) curve");
    add_inputs(optmu, opt_in);
    optmu->add_option("--curve", curve, "mu grid lo:hi:step or list; prints S(mu) rows");
    optmu->add_option("--out", out, "output file");

    std::string geometry = "leo_zenith", db_grid = "0.3:1.6:0.05", weather = "clear";
    double zenith = -1;
    auto* loss = app.add_subcommand("loss", "free-space loss budget over receiver diameters");
    loss->add_option("--geometry", geometry, "leo_zenith | leo_45 | aircraft_leo | geo | geo_13500ft");
    loss->add_option("--db", db_grid, "D_B grid in metres, lo:hi:step or list");
    loss->add_option("--weather", weather, "clear | light_rain | moderate_rain");
    loss->add_option("--zenith", zenith, "override zenith angle, degrees");
    loss->add_option("--out", out, "output file");

    double ln = 2e5, lm = 2e8, ltau = 1e-10, lrho = 0.5, lN2 = 30, le0 = -1;
    bool lexact = false;
    auto* loads = app.add_subcommand("loads", "communication, computation and authentication loads");
    loads->add_option("--n", ln, "sifted bits per block");
    loads->add_option("--m", lm, "raw bits per block");
    loads->add_option("--tau", ltau, "bit cell period, s");
    loads->add_option("--rho", lrho, "target errors per reconciliation block");
    loads->add_option("--N2", lN2, "clean validation rounds");
    loads->add_option("--e0", le0, "initial error count (default n/100)");
    loads->add_flag("--exact", lexact, "uncollected computation count");
    loads->add_option("--out", out, "output file");

    Inputs sw_in;
    std::string var = "L_fiber", grid;
    auto* sw = app.add_subcommand("sweep", "optimal rate over a parameter grid");
    add_inputs(sw, sw_in);
    sw->add_option("--var", var, "tau | mu | D_B | L_fiber | r_c | eta | alpha_db");
    sw->add_option("--grid", grid, "lo:hi:step or comma list")->required();
    sw->add_option("--out", out, "output file");

    double sm = 1e6, seta = 0.5, salpha_db = -10, src = 0.005, srd = 4.25e-18, smu = 0.455;
    double srho = 0.5, sN2 = 30;
    std::uint64_t seed = 1, trials = 1;
    bool smcs = false;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo transmission and reconciliation trace");
    sim->add_option("--m", sm, "pulses per trial");
    sim->add_option("--eta", seta, "detector efficiency");
    sim->add_option("--alpha-db", salpha_db, "line attenuation, dB");
    sim->add_option("--rc", src, "intrinsic channel error fraction");
    sim->add_option("--rd", srd, "dark count per bit cell");
    sim->add_option("--mu", smu, "mean photon number");
    sim->add_option("--rho", srho, "target errors per reconciliation block");
    sim->add_option("--N2", sN2, "clean validation rounds");
    sim->add_option("--seed", seed, "RNG seed");
    sim->add_option("--trials", trials, "independent trials");
    sim->add_flag("--mcs", smcs, "discard multi-click cells");
    sim->add_option("--out", out, "output file");

    auto* scen = app.add_subcommand("scenario", "scenario presets");
    scen->require_subcommand(1);
    auto* list = scen->add_subcommand("list", "list presets");

    Inputs rep_in;
    bool emit = false;
    auto* rep = app.add_subcommand("report", "full report, or the equivalent config file");
    add_inputs(rep, rep_in);
    rep->add_flag("--emit-config", emit, "write the resolved scenario as a config file");
    rep->add_option("--out", out, "output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    Sink sink;
    try {
        if (*rate) {
            Scenario s = resolve_inputs(rate_in);
            ScenarioResult r = run_scenario(s);
            std::ostream& os = sink.get(out);
            if (rate_csv)
                write_result_csv(os, r);
            else
                write_report(os, s, r);
            exit_code = r.viable ? 0 : 2;
        } else if (*optmu) {
            Scenario s = resolve_inputs(opt_in);
            SystemParams p = resolve_system(s);
            std::ostream& os = sink.get(out);
            if (!curve.empty()) {
                os << "mu,S_bits_per_pulse,R_bps\n";
                for (double mu : parse_grid(curve)) {
                    SystemParams q = p;
                    q.mu = mu;
                    SecrecyResult r = secrecy_capacity(q);
                    os << fmt9(mu) << ',' << fmt9(r.S) << ',' << fmt9(r.R) << '\n';
                }
            } else {
                MuOptimum o = optimize_mu(p, s.bracket);
                os << "mu_opt,S_opt_bits_per_pulse,R_opt_bps,viable\n";
                os << fmt9(o.mu) << ',' << fmt9(o.S) << ',' << fmt9(o.R) << ','
                   << (o.viable ? 1 : 0) << '\n';
                exit_code = o.viable ? 0 : 2;
            }
        } else if (*loss) {
            Weather w = weather_from_string(weather);
            std::ostream& os = sink.get(out);
            os << "D_B_m,static_db,beam_spread_db,beam_wander_db,scintillation_db,optics_db,"
                  "total_db,alpha,pulse_ok\n";
            for (double d : parse_grid(db_grid)) {
                FreeSpaceLink l = link_for(geometry, d);
                l.weather = w;
                if (zenith >= 0)
                    l.geometry.zenith_angle = zenith * kPi / 180.0;
                LossBudget b = total_free_space_alpha(l);
                os << fmt9(d) << ',' << fmt9(b.static_db) << ',' << fmt9(b.beam_spread) << ','
                   << fmt9(b.beam_wander) << ',' << fmt9(b.scintillation) << ','
                   << fmt9(b.optics_package) << ',' << fmt9(b.total_db()) << ','
                   << fmt9(b.alpha_linear) << ',' << (b.pulse_ok ? 1 : 0) << '\n';
            }
        } else if (*loads) {
            ECParams ep;
            ep.rho = lrho;
            ep.N2 = lN2;
            ep.n = ln;
            ep.e_T0 = le0 >= 0 ? le0 : ln / 100.0;
            AuthParams tags;
            CommLoad c = comm_load(ln, lm, ltau, ep, CommParams{}, tags);
            CompLoad k = comp_load(ln, lm, ltau, ep, ComputeParams{}, tags, lexact);
            double a = auth_total(ln, lm, tags);
            ECStatistics st = ec_statistics(ep);
            std::ostream& os = sink.get(out);
            os << "quantity,value,unit\n";
            os << "comm_bob_to_alice," << fmt9(c.R_BA) << ",bps\n";
            os << "comm_alice_to_bob," << fmt9(c.R_AB) << ",bps\n";
            os << "comp_per_block," << fmt9(k.ops) << ",ops\n";
            os << "comp_quadratic_term," << fmt9(k.quadratic) << ",ops\n";
            os << "comp_rate," << fmt9(k.rate) << ",ops_per_s\n";
            os << "auth_per_block," << fmt9(a) << ",bits\n";
            os << "auth_rate," << fmt9(a / (lm * ltau)) << ",bps\n";
            os << "ec_N1," << st.N1 << ",rounds\n";
            os << "ec_parity_leakage," << fmt9(ec_parity_leakage(ep)) << ",bits\n";
            os << "ec_leakage_minimum," << fmt9(ec_leakage_minimum(ln, ep.e_T0)) << ",bits\n";
        } else if (*sw) {
            Scenario s = resolve_inputs(sw_in);
            SweepSpec spec{sweep_var_from_string(var), parse_grid(grid)};
            auto rows = sweep(s, spec);
            write_sweep_csv(sink.get(out), spec, rows);
        } else if (*sim) {
            ChannelParams cp{db_to_linear(salpha_db), src, srd, seta, smu, sm};
            cp.validate();
            std::vector<TrialTrace> rows;
            for (std::uint64_t t = 0; t < trials; ++t) {
                std::uint64_t s = seed + t * 0x9E3779B97F4A7C15ull;
                SimResult r = simulate_transmission(cp, s, {smcs, false, true});
                TrialTrace tr;
                tr.trial = t;
                tr.n_emp = r.n_emp;
                tr.e_emp = r.e_emp;
                if (r.e_emp >= 1 && r.e_emp < r.n_emp) {
                    ECParams ep;
                    ep.rho = srho;
                    ep.N2 = sN2;
                    ep.n = r.n_emp;
                    ep.e_T0 = r.e_emp;
                    ECRun ec = run_error_correction(r.alice_sifted, r.bob_sifted, ep, s ^ 0xEC);
                    tr.parity_bits = ec.parity_bits;
                    tr.N1_obs = ec.N1_obs;
                    tr.N2n_obs = ec.N2n_obs;
                    tr.N2f_obs = ec.N2f_obs;
                    tr.residual = ec.residual_errors;
                }
                rows.push_back(tr);
            }
            write_trace_csv(sink.get(out), rows);
        } else if (*list) {
            for (const auto& s : scenario_presets())
                std::cout << s.name << "  " << s.description << "\n";
        } else if (*rep) {
            Scenario s = resolve_inputs(rep_in);
            std::ostream& os = sink.get(out);
            if (emit) {
                write_config(os, s);
            } else {
                ScenarioResult r = run_scenario(s);
                write_report(os, s, r);
                write_result_csv(os, r);
                exit_code = r.viable ? 0 : 2;
            }
        }
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
