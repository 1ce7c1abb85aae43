#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "railsim/geometry.hpp"
#include "railsim/population.hpp"

namespace railsim {

class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Phase { Seated, Moving, GateQueued, GateOccupying, Balancing, Exited };

// Frozen movement constants. Tuned once against the acceptance campaign,
// then left alone; runs embed the hash of these values in their headers.
struct TuningConfig {
    double neighbor_radius = 1.0;   // m, local density sensing
    double sep_radius = 0.8;        // m, separation steering range
    double sep_weight = 0.35;
    double wall_avoid_dist = 0.12;  // m
    double wall_avoid_weight = 0.5;
    double accel_limit = 0.9;       // m/s^2, restart after a stop
    double gap_preferred = 0.10;    // m, standing gap between body disks
    double time_gap = 0.68;         // s, following headway
    double lookahead = 1.3;         // m, forward scan for the gap rule
    double yield_prob = 0.28;       // hesitation chance when blocked by an agent
    double creep_speed = 0.25;      // m/s, shuffle in contact
    double drop_cross_speed = 0.45; // m/s, negotiating the 750 mm drop edge
    double interaction_range = 2.2; // m, neighbour cache radius

    uint64_t hash() const;
};

struct RunOptions {
    double dt = 0.05;  // s, in (0, 0.1]
    bool record_trajectories = false;
    double trajectory_cadence_s = 0.1;
    double abort_time_s = 600.0;
    TuningConfig tuning;
};

struct EgressEvent {
    int agent_id;
    AgentType type;
    double time_s;
};

struct CheckpointEvent {
    int agent_id;
    std::string checkpoint;
    double time_s;
};

struct TrajectorySample {
    double time_s;
    int agent_id;
    double x, y;
};

struct EgressLog {
    std::string scenario_id;
    uint64_t run_seed = 0;
    double dt = 0.05;
    int n_agents = 0;
    uint64_t geometry_hash = 0;
    uint64_t crowd_hash = 0;
    uint64_t tuning_hash = 0;
    std::vector<EgressEvent> events;  // ascending time
    std::vector<CheckpointEvent> checkpoint_events;
    std::vector<TrajectorySample> trajectories;
    double wall_clock_s = 0.0;
    int max_gate_occupancy = 0;
    bool conservation_ok = true;

    double tet() const { return events.empty() ? 0.0 : events.back().time_s; }
};

// One evacuation run. Single-threaded and deterministic: identical inputs
// (geometry, crowd, seed, dt) give bit-identical logs.
class Simulation {
public:
    Simulation(const RailcarGeometry& geometry, const Crowd& crowd, uint64_t run_seed,
               RunOptions options = {});

    void step();
    bool finished() const { return exited_count_ == static_cast<int>(agents_.size()); }
    double clock() const { return time_; }
    int exited_count() const { return exited_count_; }

    Phase phase(int agent) const { return state_[agent].phase; }
    Vec2 position(int agent) const { return state_[agent].pos; }
    double last_speed(int agent) const { return state_[agent].speed_prev; }
    std::array<int, 6> phase_counts() const;
    int gate_occupancy() const;
    int max_gate_occupancy() const { return max_gate_occupancy_; }
    bool conservation_ok() const { return conservation_ok_; }

    // Test hooks.
    void override_target(int agent, Vec2 target);
    void place_agent(int agent, Vec2 pos);

    EgressLog log() const;

private:
    struct AgentState {
        Vec2 pos;
        int cell = -1;
        double speed_prev = 0.0;
        double speed_cmd = 0.0;
        Phase phase = Phase::Seated;
        int gate_slot = -1;
        double timer_pre = 0.0;
        double timer_post = 0.0;
        double side_pref = 1.0;
        Vec2 stall_anchor;
        int stall_window = 0;
        int retreat_steps = 0;
        std::optional<Vec2> target_override;
    };

    struct Neighbor {
        int id;
        double dist;
    };

    void move_agent(int i);
    Vec2 route_target(int i) const;
    double remaining_distance(int i) const;
    std::optional<Vec2> resolve_candidate(int i, Vec2 c, bool& blocked_by_agent,
                                          bool& needs_slot) const;
    void commit_move(int i, Vec2 c);
    void relax_overlaps();
    void refresh_neighbors();
    double local_density(int i, Vec2 heading) const;

    const RailcarGeometry& geo_;
    RunOptions opt_;
    uint64_t seed_;
    double time_ = 0.0;
    long step_index_ = 0;
    int exited_count_ = 0;
    std::vector<Agent> agents_;
    std::vector<AgentState> state_;
    std::vector<std::vector<Neighbor>> near_;
    int gate_slots_[2] = {-1, -1};
    int max_gate_occupancy_ = 0;
    bool conservation_ok_ = true;
    long next_traj_step_ = 0;

    std::vector<EgressEvent> events_;
    std::vector<CheckpointEvent> checkpoint_events_;
    std::vector<TrajectorySample> trajectories_;
};

EgressLog run(const RailcarGeometry& geometry, const Crowd& crowd, uint64_t run_seed,
              RunOptions options = {});

}  // namespace railsim
