#include "railsim/population.hpp"

#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "railsim/geometry.hpp"  // ConfigError

namespace railsim {

using nlohmann::json;

const char* to_string(AgentType t) {
    switch (t) {
        case AgentType::WithoutLimitations: return "without_limitations";
        case AgentType::Child: return "child";
        case AgentType::ToddlerCarrier: return "toddler_carrier";
        case AgentType::Senior: return "senior";
        case AgentType::Disabled: return "disabled";
    }
    return "?";
}

AgentType agent_type_from_string(const std::string& s) {
    for (int i = 0; i < 5; ++i)
        if (s == to_string(static_cast<AgentType>(i))) return static_cast<AgentType>(i);
    throw ConfigError("unknown agent type: " + s);
}

double sample_truncated_normal(double mean, double sd, double lo, double hi, Rng& rng) {
    if (!(lo < hi)) throw ConfigError("truncated normal requires lo < hi");
    if (sd < 0.0) throw ConfigError("truncated normal requires sd >= 0");
    if (sd < 1e-12) return std::clamp(mean, lo, hi);
    for (int i = 0; i < 10000; ++i) {
        double v = mean + sd * rng.normal();
        if (v >= lo && v <= hi) return v;
    }
    // Bounds many sigmas from the mean; fall back to the nearer bound.
    return std::clamp(mean, lo, hi);
}

double sfpe_speed_fraction(double density_per_m2) {
    if (density_per_m2 < 0.0) throw ConfigError("density must be non-negative");
    constexpr double kA = 0.266;       // m^2/person
    constexpr double kKnee = 0.55;     // p/m^2, free movement below
    constexpr double kFloor = 0.15;
    if (density_per_m2 <= kKnee) return 1.0;
    double f = (1.0 - kA * density_per_m2) / (1.0 - kA * kKnee);
    return std::max(kFloor, f);
}

std::array<int, 5> crowd_composition(int n, double het_pct) {
    struct Row {
        int n;
        double het;
        std::array<int, 5> counts;
    };
    // Pinned published compositions.
    static const Row kTable[] = {
        {46, 0.0, {46, 0, 0, 0, 0}},  {46, 15.0, {39, 3, 1, 2, 1}},
        {46, 28.0, {33, 5, 3, 4, 1}}, {46, 56.0, {20, 10, 6, 8, 2}},
        {42, 0.0, {42, 0, 0, 0, 0}},  {42, 28.0, {31, 3, 3, 4, 1}},
    };
    for (const Row& r : kTable)
        if (r.n == n && std::abs(r.het - het_pct) < 1e-9) return r.counts;

    // Proportional rounding at the 28 % mix ratios (5:3:4:1).
    int limited = static_cast<int>(std::lround(n * het_pct / 100.0));
    limited = std::clamp(limited, 0, n);
    const double w[4] = {5, 3, 4, 1};
    double raw[4];
    int alloc[4];
    int used = 0;
    for (int i = 0; i < 4; ++i) {
        raw[i] = limited * w[i] / 13.0;
        alloc[i] = static_cast<int>(std::floor(raw[i]));
        used += alloc[i];
    }
    std::array<int, 4> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(),
              [&](int a, int bq) { return raw[a] - std::floor(raw[a]) > raw[bq] - std::floor(raw[bq]); });
    for (int k = 0; k < limited - used; ++k) alloc[order[k]] += 1;
    return {n - limited, alloc[0], alloc[1], alloc[2], alloc[3]};
}

SeatPlan default_seat_plan() {
    SeatPlan p;
    // 46 of 67 seats occupied, spread over the decks roughly in proportion
    // (21 lower, 9 mezzanine, 16 upper).
    for (int i = 1; i <= 21; ++i) p.occupied.push_back("L" + std::string(i < 10 ? "0" : "") + std::to_string(i));
    for (int i = 1; i <= 9; ++i) p.occupied.push_back("M0" + std::to_string(i));
    for (int i = 1; i <= 16; ++i) p.occupied.push_back("U" + std::string(i < 10 ? "0" : "") + std::to_string(i));

    // Passengers with limitations keep fixed seats across compositions;
    // seniors and the disabled participant sit mid lower deck (avoiding
    // stairs), carried toddlers near the doors, children upstairs and on
    // the mezzanine with their parents.
    p.senior_seats = {"L09", "L11", "L13", "L15", "L10", "L12", "L14", "L16"};
    p.disabled_seats = {"L17", "L18"};
    p.toddler_seats = {"L05", "L06", "M01", "M02", "M03", "M04"};
    p.child_seats = {"M05", "M06", "U01", "U02", "U03", "M07", "U04", "U05", "M08", "U06"};
    return p;
}

namespace {

Agent make_base_agent(AgentType t) {
    Agent a;
    a.type = t;
    switch (t) {
        case AgentType::WithoutLimitations:
            a.sfpe_coupled = false;  // measured speed already includes density effects
            break;
        case AgentType::Child:
            a.max_speed = 1.32;
            a.sfpe_coupled = true;
            a.delay_before_jump = 2.5;
            a.delay_after_jump = 0.5;
            break;
        case AgentType::ToddlerCarrier:
            a.max_speed = 0.94;
            a.shoulder_width = 0.62;
            a.sfpe_coupled = false;
            a.squeeze = 0.6;
            a.min_diameter = 0.5;
            a.delay_before_jump = 1.5;
            a.delay_after_jump = 0.5;
            break;
        case AgentType::Senior:
            a.max_speed = 0.70;
            a.shoulder_width = 0.40;
            a.sfpe_coupled = true;
            a.delay_before_jump = 2.0;
            a.delay_after_jump = 1.0;
            break;
        case AgentType::Disabled:
            a.max_speed = 0.94;
            a.shoulder_width = 0.71;
            a.sfpe_coupled = true;
            a.squeeze = 0.6;
            a.min_diameter = 0.5;
            a.delay_before_jump = 1.5;
            a.delay_after_jump = 0.75;
            break;
    }
    return a;
}

}  // namespace

Crowd build_crowd(int n, double het_pct, const SeatPlan& plan, uint64_t master_seed) {
    if (n > static_cast<int>(plan.occupied.size()))
        throw ConfigError("crowd size exceeds seat plan capacity");
    if (n <= 0) throw ConfigError("crowd size must be positive");

    auto counts = crowd_composition(n, het_pct);
    if (counts[1] > static_cast<int>(plan.child_seats.size()) ||
        counts[2] > static_cast<int>(plan.toddler_seats.size()) ||
        counts[3] > static_cast<int>(plan.senior_seats.size()) ||
        counts[4] > static_cast<int>(plan.disabled_seats.size()))
        throw ConfigError("seat plan has too few seats for a limited type");

    // Seat -> type. Limited types take their planned seats (first k of each
    // list); everyone else is of the unrestricted type.
    std::vector<std::pair<std::string, AgentType>> assign;
    auto planned = [&](const std::vector<std::string>& list, int k, AgentType t) {
        for (int i = 0; i < k; ++i) assign.emplace_back(list[i], t);
    };
    planned(plan.child_seats, counts[1], AgentType::Child);
    planned(plan.toddler_seats, counts[2], AgentType::ToddlerCarrier);
    planned(plan.senior_seats, counts[3], AgentType::Senior);
    planned(plan.disabled_seats, counts[4], AgentType::Disabled);

    std::vector<std::string> taken;
    for (auto& [s, t] : assign) taken.push_back(s);
    int without_needed = counts[0];
    std::vector<std::string> without_seats;
    for (const std::string& s : plan.occupied) {
        if (static_cast<int>(without_seats.size()) >= without_needed) break;
        if (std::find(taken.begin(), taken.end(), s) == taken.end()) without_seats.push_back(s);
    }
    if (static_cast<int>(without_seats.size()) < without_needed)
        throw ConfigError("seat plan has too few free seats");
    for (const std::string& s : without_seats)
        assign.emplace_back(s, AgentType::WithoutLimitations);

    // Canonical agent order: by seat id, so the crowd is independent of the
    // assignment bookkeeping above.
    std::sort(assign.begin(), assign.end());

    Crowd crowd;
    crowd.n = n;
    crowd.heterogeneity_pct = het_pct;
    crowd.group_label = het_pct > 0.0 ? "HET" : "HOM";

    int child_ordinal = 0;
    for (int i = 0; i < static_cast<int>(assign.size()); ++i) {
        Agent a = make_base_agent(assign[i].second);
        a.id = i;
        a.seat_id = assign[i].first;
        if (a.type == AgentType::WithoutLimitations) {
            // Draws are keyed on the seat, not the index: an agent keeps its
            // parameters when compositions change around it.
            Rng r(mix_seed(master_seed, fnv1a64(a.seat_id)));
            a.max_speed = sample_truncated_normal(0.94, 0.25, 0.64, 1.56, r);
            a.shoulder_width = sample_truncated_normal(0.457, 0.05, 0.38, 0.58, r);
        } else if (a.type == AgentType::Child) {
            a.shoulder_width = (child_ordinal++ % 2 == 0) ? 0.25 : 0.32;
        }
        a.min_diameter = std::min(a.min_diameter, a.shoulder_width);
        crowd.agents.push_back(a);
    }
    return crowd;
}

std::string Crowd::to_json() const {
    json j;
    j["schema"] = "railsim.crowd/1";
    j["n"] = n;
    j["heterogeneity_pct"] = heterogeneity_pct;
    j["group"] = group_label;
    for (const Agent& a : agents)
        j["agents"].push_back({{"id", a.id},
                               {"seat", a.seat_id},
                               {"type", to_string(a.type)},
                               {"max_speed", a.max_speed},
                               {"shoulder_width", a.shoulder_width},
                               {"squeeze", a.squeeze},
                               {"min_diameter", a.min_diameter},
                               {"sfpe", a.sfpe_coupled},
                               {"delay_before_jump", a.delay_before_jump},
                               {"delay_after_jump", a.delay_after_jump}});
    return j.dump(2);
}

Crowd Crowd::from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.value("schema", "") != "railsim.crowd/1") throw ConfigError("unsupported crowd schema");
    Crowd c;
    c.n = j.at("n");
    c.heterogeneity_pct = j.at("heterogeneity_pct");
    c.group_label = j.at("group");
    for (auto& a : j.at("agents")) {
        Agent ag;
        ag.id = a.at("id");
        ag.seat_id = a.at("seat");
        ag.type = agent_type_from_string(a.at("type"));
        ag.max_speed = a.at("max_speed");
        ag.shoulder_width = a.at("shoulder_width");
        ag.squeeze = a.at("squeeze");
        ag.min_diameter = a.at("min_diameter");
        ag.sfpe_coupled = a.at("sfpe");
        ag.delay_before_jump = a.at("delay_before_jump");
        ag.delay_after_jump = a.at("delay_after_jump");
        c.agents.push_back(ag);
    }
    return c;
}

uint64_t Crowd::fixture_hash() const { return fnv1a64(to_json()); }

}  // namespace railsim
