#pragma once

#include "auth_cost.hpp"
#include "channel_loss.hpp"
#include "loads.hpp"
#include "secrecy.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qkd {

enum class LinkKind { free_space, fiber };

struct ExpectedResult {
    double R = 0;  // bits/s
    double mu = 0; // may be 0 when not quoted
};

struct Scenario {
    std::string name;
    std::string description;
    LinkKind kind = LinkKind::free_space;

    // free space: the loss model runs for the report; alpha_db, when set,
    // is the value used for the rate
    FreeSpaceLink link;
    std::optional<double> alpha_db;

    FiberParams fiber;
    bool fiber_replaced = false; // Eve may have swapped in lossless cable

    SystemParams sys;
    std::optional<double> fixed_mu;
    std::optional<std::string> mu_from; // take mu_opt of another preset
    std::pair<double, double> bracket = kDefaultMuBracket;

    // load model inputs
    ECParams ec;
    CommParams comm;
    ComputeParams compute;

    std::optional<ExpectedResult> expected;
    std::string note;
};

struct ScenarioResult {
    std::string name;
    double alpha = 1;
    double alpha_db = 0;
    std::optional<LossBudget> loss;
    bool alpha_preset = false; // alpha_db given, loss model reported only
    MuOptimum opt;
    SecrecyResult at_opt;
    bool viable = false;
    bool mu_fixed = false;
    double auth_bits = 0;
    CommLoad comm;
    CompLoad comp;
    std::string note;
    std::string region_basis; // "y = eta*alpha" or "y = eta"
};

// presets
const std::vector<Scenario>& scenario_presets();
const Scenario& find_scenario(const std::string& name);

// Fill sys.alpha and sys.attack.medium from the link description.
SystemParams resolve_system(const Scenario& s, std::optional<LossBudget>* loss = nullptr);

ScenarioResult run_scenario(const Scenario& s);

enum class SweepVar { tau, mu, D_B, L_fiber, r_c, eta, alpha_db };

SweepVar sweep_var_from_string(const std::string& s);
std::string to_string(SweepVar v);

struct SweepSpec {
    SweepVar variable = SweepVar::L_fiber;
    std::vector<double> grid;
    void validate() const;
};

struct SweepRow {
    double value = 0;
    double mu_opt = 0, S_opt = 0, R_opt = 0;
    double alpha_db = 0;
    bool viable = false;
};

// Grid points run in parallel; rows come back in grid order.
std::vector<SweepRow> sweep(const Scenario& s, const SweepSpec& spec);

// "lo:hi:step" or comma separated list
std::vector<double> parse_grid(const std::string& text);

void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const std::vector<SweepRow>& rows);
void write_report(std::ostream& os, const Scenario& s, const ScenarioResult& r);
void write_result_csv(std::ostream& os, const ScenarioResult& r);

// config files: INI style sections, units in key names
Scenario load_config(const std::string& path);
Scenario parse_config(const std::string& text);
void write_config(std::ostream& os, const Scenario& s);

} // namespace qkd
