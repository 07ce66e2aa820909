#include "qkd/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace qkd;

TEST(Presets, AllResolveAndRun)
{
    for (const auto& s : scenario_presets()) {
        ScenarioResult r;
        ASSERT_NO_THROW(r = run_scenario(s)) << s.name;
        EXPECT_EQ(r.name, s.name);
        EXPECT_EQ(r.viable, r.opt.S > 0.0) << s.name;
        if (s.expected && r.viable)
            EXPECT_NEAR(r.opt.R / s.expected->R, 1.0, 0.05) << s.name;
    }
}

TEST(Presets, LookupByName)
{
    EXPECT_EQ(find_scenario("aircraft_leo_clear").name, "aircraft_leo_clear");
    EXPECT_THROW(find_scenario("no_such_preset"), std::out_of_range);
}

TEST(Presets, ReferenceSystem)
{
    ScenarioResult r = run_scenario(find_scenario("aircraft_leo_clear"));
    EXPECT_NEAR(r.opt.mu, 0.455, 0.005);
    EXPECT_NEAR(r.opt.R, 57e6, 0.05 * 57e6);
    EXPECT_TRUE(r.alpha_preset);
    ASSERT_TRUE(r.loss.has_value());
    EXPECT_NEAR(r.loss->total_db(), -10.0, 0.5);
    EXPECT_EQ(r.region_basis, "y = eta*alpha");
}

TEST(Presets, ModerateRainIsNotViable)
{
    ScenarioResult r = run_scenario(find_scenario("ground_leo_moderate_rain"));
    EXPECT_FALSE(r.viable);
    std::ostringstream os;
    write_report(os, find_scenario("ground_leo_moderate_rain"), r);
    EXPECT_NE(os.str().find("nonviable"), std::string::npos);
}

TEST(Presets, ReplacedFiberUsesEtaForRegion)
{
    ScenarioResult r = run_scenario(find_scenario("fiber_10km_02_replaced"));
    EXPECT_EQ(r.region_basis, "y = eta");
    EXPECT_TRUE(r.mu_fixed);
    ScenarioResult u = run_scenario(find_scenario("fiber_10km_02"));
    EXPECT_GT(u.opt.R, r.opt.R);
}

TEST(Grid, Parsing)
{
    EXPECT_EQ(parse_grid("1,2,3.5"), (std::vector<double>{1, 2, 3.5}));
    auto g = parse_grid("0:1:0.25");
    ASSERT_EQ(g.size(), 5u);
    EXPECT_NEAR(g.back(), 1.0, 1e-12);
    EXPECT_THROW(parse_grid("a,b"), std::exception);
    EXPECT_THROW(parse_grid("1:0:0.1"), std::exception);
    EXPECT_THROW(parse_grid(""), std::exception);
}

TEST(Sweep, FiberLengthLowersRate)
{
    SweepSpec spec{SweepVar::L_fiber, {5, 10, 20, 30, 40}};
    auto rows = sweep(find_scenario("fiber_10km_02"), spec);
    ASSERT_EQ(rows.size(), 5u);
    for (std::size_t i = 0; i < rows.size(); ++i)
        EXPECT_EQ(rows[i].value, spec.grid[i]);
    for (std::size_t i = 1; i < rows.size(); ++i)
        EXPECT_LT(rows[i].R_opt, rows[i - 1].R_opt);
    std::ostringstream os;
    write_sweep_csv(os, spec, rows);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
              "L_fiber_km,mu_opt,S_opt_bits_per_pulse,R_opt_bps,alpha_db,viable");
}

TEST(Sweep, RateScalesWithClock)
{
    SweepSpec spec{SweepVar::tau, {1e-10, 1e-9, 1e-6}};
    auto rows = sweep(find_scenario("aircraft_leo_clear"), spec);
    EXPECT_NEAR(rows[0].R_opt / rows[1].R_opt, 10.0, 1e-9);
    EXPECT_NEAR(rows[0].S_opt, rows[2].S_opt, 1e-18);
}

TEST(Sweep, Validation)
{
    SweepSpec bad{SweepVar::eta, {0.5, 0.4}};
    EXPECT_THROW(bad.validate(), std::exception);
    SweepSpec wrong{SweepVar::L_fiber, {10}};
    EXPECT_THROW(sweep(find_scenario("aircraft_leo_clear"), wrong), std::exception);
    EXPECT_EQ(sweep_var_from_string("D_B"), SweepVar::D_B);
    EXPECT_EQ(to_string(SweepVar::r_c), "r_c");
    EXPECT_THROW(sweep_var_from_string("banana"), std::exception);
}

TEST(Config, RoundTripPreservesResults)
{
    for (const char* name : {"aircraft_leo_clear", "ground_leo_light_rain", "earth_geo_clear",
                             "fiber_10km_03_replaced"}) {
        const Scenario& s = find_scenario(name);
        std::ostringstream os;
        write_config(os, s);
        Scenario t = parse_config(os.str());
        EXPECT_EQ(t.name, s.name);
        EXPECT_NEAR(t.link.geometry.zenith_angle, s.link.geometry.zenith_angle, 1e-15) << name;
        EXPECT_EQ(t.sys.mcs(), s.sys.mcs());
        EXPECT_EQ(t.fiber_replaced, s.fiber_replaced);
        ScenarioResult a = run_scenario(s), b = run_scenario(t);
        EXPECT_NEAR(b.opt.R / a.opt.R, 1.0, 1e-12) << name;
    }
}

TEST(Config, MinimalFileUsesDefaults)
{
    Scenario s = parse_config("[scenario]\nname = mine\nbase = aircraft_leo_clear\n[system]\neta = 0.3\n");
    EXPECT_EQ(s.name, "mine");
    EXPECT_EQ(s.sys.eta, 0.3);
    EXPECT_TRUE(run_scenario(s).viable);
}

TEST(Config, RejectsUnknownKeysAndSections)
{
    EXPECT_THROW(parse_config("[scenario]\nname = x\n[system]\netta = 0.3\n"), std::exception);
    EXPECT_THROW(parse_config("[scenario]\nname = x\n[bogus]\na = 1\n"), std::exception);
    EXPECT_THROW(parse_config("[system]\neta = 0.3\n"), std::exception);
    EXPECT_THROW(parse_config("[scenario]\nname = x\nbase = nope\n"), std::exception);
    EXPECT_THROW(load_config("/nonexistent/file.ini"), std::exception);
}

TEST(ResultCsv, Header)
{
    std::ostringstream os;
    write_result_csv(os, run_scenario(find_scenario("fiber_10km_02")));
    std::string head = os.str().substr(0, os.str().find('\n'));
    EXPECT_EQ(head, "scenario,alpha_db,mu_opt,mu_fixed,S_opt_bits_per_pulse,R_opt_bps,viable,"
                    "n_bits,e_T_bits,n1_bits,e_T1_bits,Q,T,f,nu_bits,g_pa_bits,a_bits,region,y,"
                    "C_BA_bps,C_AB_bps,comp_ops_per_s");
}
