#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "railsim/engine.hpp"
#include "railsim/metrics.hpp"
#include "railsim/refdata.hpp"

namespace railsim {

inline constexpr const char* kVersion = "railsim 0.1.0";

struct ScenarioSpec {
    double width_m = 1.30;
    double het_pct = 0.0;
    ExitType exit = ExitType::Platform;
    int n = 46;
    std::string id;

    ScenarioKey key() const { return {width_m, het_pct, exit}; }
};

struct CampaignConfig {
    std::vector<double> widths{0.65, 0.75, 0.90, 1.10, 1.34};
    std::vector<double> hets{0.0, 28.0};
    std::vector<ExitType> exits{ExitType::Platform, ExitType::Stairs, ExitType::Jump};
    int runs = 30;
    int n = 46;
    uint64_t master_seed = 20180620;  // experiment day
    double dt = 0.05;
    std::string out_dir;

    void apply_preset(const std::string& name);
    void validate() const;
    std::string to_json() const;
    static CampaignConfig from_json(const std::string& text);
};

std::vector<ScenarioSpec> make_scenarios(const CampaignConfig& config);

// master seed -> scenario seed -> run seed; any single run is reproducible
// from (master seed, scenario id, run index) alone.
uint64_t scenario_seed(uint64_t master_seed, const std::string& scenario_id);
uint64_t run_seed(uint64_t scenario_seed_value, int run_index);

struct ScenarioResult {
    ScenarioSpec spec;
    std::vector<double> tets;
    std::vector<double> flows;
    int max_gate_occupancy = 0;   // across all runs
    bool conservation_ok = true;  // per-step phase-count identity held
};

using ProgressFn = std::function<void(const std::string& scenario, int run)>;

// In-memory Monte Carlo batch over the scenario grid.
std::vector<ScenarioResult> run_campaign(const CampaignConfig& config, int threads = 1,
                                         const ProgressFn& progress = {});

std::map<ScenarioKey, std::vector<double>> batch_tets(const std::vector<ScenarioResult>& results);

// --- file formats ----------------------------------------------------------

std::string egress_log_csv(const EgressLog& log);
std::string run_header_json(const EgressLog& log, const ScenarioSpec& spec);
EgressLog parse_egress_log_csv(const std::string& text);

struct MetricsRow {
    std::string scenario_id;
    uint64_t seed = 0;
    int n = 0;
    double tet = 0.0;
    double tet_46 = 0.0;
    double tet_corr = 0.0;
    double flow = 0.0;
};

MetricsRow metrics_row(const EgressLog& log, const std::string& scenario_id, int target_n = 46);
std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::string curves_csv(const std::vector<std::pair<std::string, OccupantCurve>>& curves);

uint64_t campaign_manifest_hash(const CampaignConfig& config);

}  // namespace railsim
