#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "railsim/rng.hpp"

namespace railsim {

enum class AgentType {
    WithoutLimitations = 0,
    Child = 1,
    ToddlerCarrier = 2,
    Senior = 3,
    Disabled = 4,
};

const char* to_string(AgentType t);
AgentType agent_type_from_string(const std::string& s);

// Movement parameters of one agent with its concrete drawn values.
struct Agent {
    int id = -1;
    std::string seat_id;
    AgentType type = AgentType::WithoutLimitations;
    double max_speed = 0.0;       // m/s
    double shoulder_width = 0.0;  // m (body disk diameter)
    double squeeze = 0.7;         // body compressibility in conflicts
    double min_diameter = 0.33;   // m, lower bound on the compressed disk
    bool sfpe_coupled = false;
    double delay_before_jump = 0.0;  // s
    double delay_after_jump = 0.0;   // s

    double radius() const { return shoulder_width / 2.0; }
    double squeezed_radius() const {
        double d = std::min(shoulder_width, std::max(squeeze * shoulder_width, min_diameter));
        return d / 2.0;
    }
};

struct Crowd {
    int n = 0;
    double heterogeneity_pct = 0.0;
    std::string group_label;  // HOM / HET
    std::vector<Agent> agents;

    std::string to_json() const;
    static Crowd from_json(const std::string& text);
    uint64_t fixture_hash() const;
};

// Where each passenger type sits; drawn once and frozen for a campaign.
struct SeatPlan {
    std::vector<std::string> occupied;         // canonical order, 46 seats
    std::vector<std::string> senior_seats;
    std::vector<std::string> disabled_seats;
    std::vector<std::string> toddler_seats;
    std::vector<std::string> child_seats;
};

SeatPlan default_seat_plan();

// Counts per type (WithoutLimitations, Child, ToddlerCarrier, Senior,
// Disabled). The published compositions are pinned; other (n, het)
// combinations fall back to largest-remainder apportionment at 5:3:4:1.
std::array<int, 5> crowd_composition(int n, double het_pct);

// Normal conditioned on [lo, hi], sampled by rejection (documented choice);
// degenerate sd clamps the mean into the bounds.
double sample_truncated_normal(double mean, double sd, double lo, double hi, Rng& rng);

// Multiplicative speed fraction from local density, SFPE correlation with
// a = 0.266 m^2/person renormalised to 1 at 0.55 p/m^2, floored at 0.15.
double sfpe_speed_fraction(double density_per_m2);

Crowd build_crowd(int n, double het_pct, const SeatPlan& plan, uint64_t master_seed);

}  // namespace railsim
