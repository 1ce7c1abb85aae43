#pragma once

#include <map>
#include <string>
#include <vector>

#include "railsim/geometry.hpp"

namespace railsim {

// One experimental trial with measured and corrected evacuation times.
struct ReferenceTrial {
    std::string id;       // e.g. "4A"
    ExitType exit = ExitType::Platform;
    std::string group;    // HOM / HET
    double het_pct = 0.0;
    double width_m = 0.0;
    int n = 0;
    double tet = 0.0;
    double tet_46 = 0.0;
    double delay = 0.0;
    double tet_corr = 0.0;
    bool first_trial = false;  // first trial for the exit type
};

struct ReferenceFlow {
    ExitType exit;
    std::string group;
    double width_m;
    double flow_pps;  // persons per second
};

struct JumpDelayRow {
    std::string agent_type;
    double before_s;
    double after_s;
};

struct SpeedSummary {
    double aisle_mean = 0.35;          // congested, all observations
    double stair_mean = 0.41;          // congested, all trials
    double stair_unimpeded = 0.96;     // adults, flow not limited
    double aisle_unrestricted = 0.94;  // adults, outside trials
};

struct ReferenceData {
    std::vector<ReferenceTrial> trials;  // 30
    std::vector<ReferenceFlow> flows;    // 30
    std::vector<JumpDelayRow> jump_delays;
    SpeedSummary speeds;

    const ReferenceTrial& trial(const std::string& id) const;
    std::string trials_csv() const;
};

// Embedded fixture; checksum-verified on load.
ReferenceData load_reference();

struct ScenarioKey {
    double width_m;
    double het_pct;
    ExitType exit;

    bool operator<(const ScenarioKey& o) const;
    std::string str() const;
};

struct ScenarioValidation {
    ScenarioKey key;
    std::string trial_id;
    double experimental = 0.0;  // TET corr
    double band_min = 0.0;
    double band_max = 0.0;
    double sim_mean = 0.0;
    bool contained = false;     // experimental in [0.9*min, 1.1*max]
    double relative_deviation = 0.0;
};

struct ValidationReport {
    std::vector<ScenarioValidation> scenarios;
    double containment_rate = 0.0;

    std::string to_json() const;
    std::string table() const;
};

// Per-scenario simulated TETs (>= 30 runs each) against the reference.
ValidationReport validate_batch(const std::map<ScenarioKey, std::vector<double>>& batch,
                                const ReferenceData& ref);

}  // namespace railsim
