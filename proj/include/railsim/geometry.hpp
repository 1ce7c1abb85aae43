#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "railsim/geom.hpp"

namespace railsim {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExitType { Platform = 0, Stairs = 1, Jump = 2 };

const char* to_string(ExitType t);
ExitType exit_type_from_string(const std::string& s);
ExitType exit_type_from_code(int code);

struct ExitModel {
    ExitType type = ExitType::Platform;
    // Platform: agents leave the model just past the door line.
    double platform_sink_depth_m = 0.1;
    // Stairs: three external steps down to the terrain.
    int stair_steps = 3;
    double stair_rise_m = 0.2;
    double stair_tread_m = 0.5;
    double stair_slope_deg = 22.0;
    // Jump: unassisted drop with a two-agent gate at the door.
    double drop_height_m = 0.75;
    int gate_capacity = 2;
    double gate_zone_depth_m = 0.5;
};

ExitModel make_exit_model(ExitType type);

enum class CellKind { Interior, Stair, External };

// Walkable space is a set of axis-aligned cells joined by openings
// (door/stair connectors and plain abutments). Stair cells are unfolded
// at their inclined length so planar distance equals travel distance.
struct Cell {
    std::string id;
    std::string deck;  // lower / mezzanine / upper / boarding / stair / exterior
    CellKind kind = CellKind::Interior;
    Rect rect;
    double speed_factor = 1.0;
};

struct Opening {
    int cell_a = -1;
    int cell_b = -1;
    bool vertical = true;  // true: edge x == coord, span in y
    double coord = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::string label;

    double clear_width() const { return hi - lo; }
    Vec2 center() const {
        return vertical ? Vec2{coord, (lo + hi) * 0.5} : Vec2{(lo + hi) * 0.5, coord};
    }
    Vec2 point_at(double s) const {  // s in span coordinates
        return vertical ? Vec2{coord, s} : Vec2{s, coord};
    }
    Segment segment() const { return {point_at(lo), point_at(hi)}; }
};

struct Seat {
    std::string id;
    Vec2 pos;
    std::string deck;
    int cell = -1;
};

struct Checkpoint {
    std::string id;
    Segment seg;
};

struct StairInfo {
    std::string id;
    double width_m = 0.0;
    double inclined_length_m = 0.0;
    double slope_deg = 0.0;
    std::string from_deck;
    std::string to_deck;
};

struct InternalDoor {
    std::string id;
    double clear_width_m = 0.0;
    double opening_delay_s = 0.0;  // default 0: doors held open
    int opening = -1;
};

struct RailcarGeometry {
    double exit_width_m = 1.30;
    ExitModel exit_model;

    std::vector<Cell> cells;
    std::vector<Opening> openings;
    std::vector<Seat> seats;
    std::vector<Checkpoint> checkpoints;
    std::vector<StairInfo> stairs;
    std::vector<InternalDoor> internal_doors;

    int main_exit_opening = -1;
    double sink_y = 0.0;             // crossing below this line removes the agent
    Rect gate_zone;                  // jump only
    Vec2 balance_slots[2];           // jump only, lateral ground positions

    // Derived connectivity (rebuilt after load, not serialized).
    std::vector<std::vector<int>> cell_openings;
    std::vector<std::vector<int>> cell_neighbors;
    std::vector<Segment> walls;
    std::vector<uint8_t> wall_soft;  // seat-row edges, brushable by shoulders
    std::vector<std::vector<int>> cell_walls;      // own + 1-hop neighbourhood
    std::vector<double> opening_dist_to_exit;      // coarse routing metric
    std::vector<std::vector<int>> cell_route_openings;  // productive exits per cell

    void rebuild_derived();
    int cell_at(Vec2 p, int hint = -1) const;
    const Seat& seat(const std::string& id) const;
    const Checkpoint& checkpoint(const std::string& id) const;
    bool visible(Vec2 a, Vec2 b, int cell_a, int cell_b) const;
    double wall_clearance(Vec2 p, int cell) const;
    void wall_clearances(Vec2 p, int cell, double& hard, double& soft) const;

    std::string to_json() const;
    static RailcarGeometry from_json(const std::string& text);
    uint64_t fixture_hash() const;
};

// Builds the navigable half-car with the requested main-exit clear width.
// Interior dimensions are the fixed Class 071 values.
RailcarGeometry build_railcar(double exit_width_m, ExitType exit_type);

// Shortest collision-free path length through door/stair connectors;
// stair cells contribute their inclined length. Throws if unreachable.
double shortest_path_length(const RailcarGeometry& g, Vec2 from);
double shortest_path_length(const RailcarGeometry& g, Vec2 from, Vec2 to);

}  // namespace railsim
