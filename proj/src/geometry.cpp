#include "railsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <queue>

#include "json.hpp"
#include "railsim/rng.hpp"

namespace railsim {

using nlohmann::json;

namespace {

// Class 071 half-car interior, unfolded into one plane. x runs along the car
// axis (exit side at x in [0, kVestX1]), y across the car. Stair cells are
// stretched to their inclined length.
constexpr double kCarWidth = 2.41;
constexpr double kVestX0 = 0.0, kVestX1 = 2.10;
constexpr double kExitCenterX = 1.05;

constexpr double kLowerDoorWidth = 0.65;
constexpr double kMouthX1 = 2.50;
constexpr double kAisleY0 = 0.945, kAisleY1 = 1.465;  // 0.52 m clear
constexpr double kLowerAisleX1 = 9.75;
constexpr double kBayHalf = 0.28;

constexpr double kFlightWidth = 0.84;   // mezzanine flight, 40 deg, rise 0.805
constexpr double kFlightLen = 1.25;     // inclined
constexpr double kMezzX0 = -3.45, kMezzX1 = -1.25;
constexpr double kStairWidth = 0.76;    // internal staircase, 36 deg
constexpr double kStairLen = 1.88;      // inclined (checkpoint span)
constexpr double kStairX0 = -5.33;
constexpr double kUpperAisleX0 = -11.95;

constexpr double kStairSpeedFactor = 0.96 / 0.94;  // unimpeded descent ~0.96 m/s

struct Builder {
    RailcarGeometry g;

    int add_cell(const std::string& id, const std::string& deck, CellKind kind, Rect r,
                 double speed_factor = 1.0) {
        g.cells.push_back({id, deck, kind, r, speed_factor});
        return static_cast<int>(g.cells.size()) - 1;
    }
    int add_opening(int a, int b, bool vertical, double coord, double lo, double hi,
                    const std::string& label = "") {
        g.openings.push_back({a, b, vertical, coord, lo, hi, label});
        return static_cast<int>(g.openings.size()) - 1;
    }
    void add_seat(const std::string& id, Vec2 p, const std::string& deck, int cell) {
        g.seats.push_back({id, p, deck, cell});
    }
};

}  // namespace

const char* to_string(ExitType t) {
    switch (t) {
        case ExitType::Platform: return "platform";
        case ExitType::Stairs: return "stairs";
        case ExitType::Jump: return "jump";
    }
    return "?";
}

ExitType exit_type_from_string(const std::string& s) {
    if (s == "platform") return ExitType::Platform;
    if (s == "stairs") return ExitType::Stairs;
    if (s == "jump") return ExitType::Jump;
    throw ConfigError("unknown exit type: " + s);
}

ExitType exit_type_from_code(int code) {
    if (code < 0 || code > 2) throw ConfigError("exit code must be 0, 1 or 2");
    return static_cast<ExitType>(code);
}

ExitModel make_exit_model(ExitType type) {
    ExitModel m;
    m.type = type;
    return m;
}

RailcarGeometry build_railcar(double exit_width_m, ExitType exit_type) {
    if (!(exit_width_m >= 0.3 && exit_width_m <= 2.0))
        throw ConfigError("exit width " + std::to_string(exit_width_m) +
                          " m outside sanity bounds [0.3, 2.0]");

    Builder b;
    b.g.exit_width_m = exit_width_m;
    b.g.exit_model = make_exit_model(exit_type);

    const double exit_lo = kExitCenterX - exit_width_m / 2.0;
    const double exit_hi = kExitCenterX + exit_width_m / 2.0;
    if (exit_lo < kVestX0 + 0.05 || exit_hi > kVestX1 - 0.05)
        throw ConfigError("exit width does not fit the boarding area mouth");

    // --- boarding area (vestibule) and lower deck -------------------------
    // Width reduction follows the experiment: barrier boards form a funnel
    // corridor of the requested clear width ahead of the door line.
    const double kFunnelDepth = 0.55;
    int vest = b.add_cell("vestibule", "boarding", CellKind::Interior,
                          {kVestX0, kFunnelDepth, kVestX1, kCarWidth});
    int funnel = b.add_cell("exit_funnel", "boarding", CellKind::Interior,
                            {exit_lo, 0.0, exit_hi, kFunnelDepth});
    b.add_opening(vest, funnel, false, kFunnelDepth, exit_lo, exit_hi);
    int mouth = b.add_cell("lower_mouth", "lower", CellKind::Interior,
                           {kVestX1, 0.88, kMouthX1, 1.53});
    int laisle = b.add_cell("lower_aisle", "lower", CellKind::Interior,
                            {kMouthX1, kAisleY0, kLowerAisleX1, kAisleY1});
    int lower_door = b.add_opening(vest, mouth, true, kVestX1, 0.88, 1.53, "lower_door");
    b.add_opening(mouth, laisle, true, kMouthX1, kAisleY0, kAisleY1);
    b.g.internal_doors.push_back({"lower_door", kLowerDoorWidth, 0.0, lower_door});

    // Lower saloon: 8 rows of 2+2, last row on the aisle side only (31 seats).
    int lower_seat_count = 0;
    for (int k = 0; k < 8; ++k) {
        double cx = 2.82 + 0.88 * k;
        int south = b.add_cell("lower_bay_s" + std::to_string(k), "lower", CellKind::Interior,
                               {cx - kBayHalf, 0.0, cx + kBayHalf, kAisleY0});
        b.add_opening(south, laisle, false, kAisleY0, cx - kBayHalf, cx + kBayHalf);
        int north = b.add_cell("lower_bay_n" + std::to_string(k), "lower", CellKind::Interior,
                               {cx - kBayHalf, kAisleY1, cx + kBayHalf, kCarWidth});
        b.add_opening(north, laisle, false, kAisleY1, cx - kBayHalf, cx + kBayHalf);

        auto seat = [&](int cell, double y) {
            ++lower_seat_count;
            char id[16];
            std::snprintf(id, sizeof id, "L%02d", lower_seat_count);
            b.add_seat(id, {cx, y}, "lower", cell);
        };
        seat(south, 0.70);
        seat(north, 1.71);
        seat(south, 0.30);
        if (k < 7) seat(north, 2.11);  // 31st seat dropped in the last row
    }

    // --- mezzanine over the bogie, short flight down to the boarding area --
    int flight = b.add_cell("mezz_flight", "stair", CellKind::Stair,
                            {-kFlightLen, 0.785, 0.0, 1.625}, kStairSpeedFactor);
    int mezz = b.add_cell("mezzanine", "mezzanine", CellKind::Interior,
                          {kMezzX0, 0.0, kMezzX1, kCarWidth});
    b.add_opening(vest, flight, true, 0.0, 0.785, 1.625, "flight_bottom");
    b.add_opening(flight, mezz, true, -kFlightLen, 0.785, 1.625, "flight_top");

    int mezz_seat_count = 0;
    for (int row = 0; row < 3; ++row) {
        double cx = -1.65 - 0.70 * row;
        for (double y : {0.85, 1.56, 0.35, 2.06}) {
            ++mezz_seat_count;
            char id[16];
            std::snprintf(id, sizeof id, "M%02d", mezz_seat_count);
            b.add_seat(id, {cx, y}, "mezzanine", mezz);
        }
    }
    b.add_seat("M13", {-3.30, 1.205}, "mezzanine", mezz);

    // --- internal staircase and upper deck ---------------------------------
    int stair = b.add_cell("stair_internal", "stair", CellKind::Stair,
                           {kStairX0, 0.825, kMezzX0, 1.585}, kStairSpeedFactor);
    int uaisle = b.add_cell("upper_aisle", "upper", CellKind::Interior,
                            {kUpperAisleX0, kAisleY0, kStairX0, kAisleY1});
    b.add_opening(mezz, stair, true, kMezzX0, 0.825, 1.585, "stair_bottom");
    b.add_opening(stair, uaisle, true, kStairX0, 0.825, 1.585, "stair_top");

    int upper_seat_count = 0;
    for (int k = 0; k < 6; ++k) {
        double cx = -5.75 - 0.88 * k;
        int south = b.add_cell("upper_bay_s" + std::to_string(k), "upper", CellKind::Interior,
                               {cx - kBayHalf, 0.0, cx + kBayHalf, kAisleY0});
        b.add_opening(south, uaisle, false, kAisleY0, cx - kBayHalf, cx + kBayHalf);
        int north = b.add_cell("upper_bay_n" + std::to_string(k), "upper", CellKind::Interior,
                               {cx - kBayHalf, kAisleY1, cx + kBayHalf, kCarWidth});
        b.add_opening(north, uaisle, false, kAisleY1, cx - kBayHalf, cx + kBayHalf);

        auto seat = [&](int cell, double y) {
            ++upper_seat_count;
            char id[16];
            std::snprintf(id, sizeof id, "U%02d", upper_seat_count);
            b.add_seat(id, {cx, y}, "upper", cell);
        };
        seat(south, 0.70);
        seat(north, 1.71);
        seat(south, 0.30);
        if (k < 5) seat(north, 2.11);  // 23 seats upstairs
    }

    b.g.stairs.push_back({"stair_internal", kStairWidth, kStairLen, 36.0, "upper", "mezzanine"});
    b.g.stairs.push_back({"mezz_flight", kFlightWidth, kFlightLen, 40.0, "mezzanine", "boarding"});

    // --- exit side ----------------------------------------------------------
    switch (exit_type) {
        case ExitType::Platform: {
            int stage = b.add_cell("stage", "exterior", CellKind::External,
                                   {exit_lo - 0.3, -0.6, exit_hi + 0.3, 0.0});
            b.g.main_exit_opening =
                b.add_opening(funnel, stage, false, 0.0, exit_lo, exit_hi, "main_exit");
            b.g.sink_y = -b.g.exit_model.platform_sink_depth_m;
            break;
        }
        case ExitType::Stairs: {
            const ExitModel& m = b.g.exit_model;
            double inclined = m.stair_steps * std::hypot(m.stair_tread_m, m.stair_rise_m);
            // Shallow steps with handrails barely slow the descent.
            int est = b.add_cell("exit_stairs", "exterior", CellKind::External,
                                 {exit_lo, -inclined, exit_hi, 0.0}, 1.08);
            int ground = b.add_cell("ground", "exterior", CellKind::External,
                                    {exit_lo - 1.0, -inclined - 0.8, exit_hi + 1.0, -inclined});
            b.g.main_exit_opening =
                b.add_opening(funnel, est, false, 0.0, exit_lo, exit_hi, "main_exit");
            b.add_opening(est, ground, false, -inclined, exit_lo, exit_hi);
            b.g.sink_y = -inclined - 0.3;
            b.g.stairs.push_back({"exit_stairs", exit_width_m, inclined, m.stair_slope_deg,
                                  "boarding", "terrain"});
            break;
        }
        case ExitType::Jump: {
            int ground = b.add_cell("ground", "exterior", CellKind::External,
                                    {exit_lo - 0.9, -1.6, exit_hi + 0.9, 0.0});
            b.g.main_exit_opening =
                b.add_opening(funnel, ground, false, 0.0, exit_lo, exit_hi, "main_exit");
            b.g.sink_y = -1.0;
            b.g.gate_zone = {exit_lo, 0.0, exit_hi, b.g.exit_model.gate_zone_depth_m};
            b.g.balance_slots[0] = {exit_lo - 0.35, -0.45};
            b.g.balance_slots[1] = {exit_hi + 0.35, -0.45};
            break;
        }
    }

    // --- checkpoints (main exit, lower door, stair ends, aisle pair) -------
    RailcarGeometry& g = b.g;
    g.checkpoints.push_back({"CH01", g.openings[g.main_exit_opening].segment()});
    g.checkpoints.push_back({"CH02", g.openings[lower_door].segment()});
    g.checkpoints.push_back({"CH03", Segment{{kStairX0, 0.825}, {kStairX0, 1.585}}});
    g.checkpoints.push_back({"CH04", Segment{{kMezzX0, 0.825}, {kMezzX0, 1.585}}});
    g.checkpoints.push_back({"CH05", Segment{{5.50, kAisleY0}, {5.50, kAisleY1}}});
    g.checkpoints.push_back({"CH06", Segment{{3.67, kAisleY0}, {3.67, kAisleY1}}});

    g.rebuild_derived();
    return g;
}

void RailcarGeometry::rebuild_derived() {
    const size_t nc = cells.size();
    cell_openings.assign(nc, {});
    cell_neighbors.assign(nc, {});
    for (size_t i = 0; i < openings.size(); ++i) {
        const Opening& o = openings[i];
        cell_openings[o.cell_a].push_back(static_cast<int>(i));
        cell_openings[o.cell_b].push_back(static_cast<int>(i));
        cell_neighbors[o.cell_a].push_back(o.cell_b);
        cell_neighbors[o.cell_b].push_back(o.cell_a);
    }

    // Walls: each cell edge minus the opening spans on that edge. Saloon
    // walls (seat rows) are soft: shoulders overhang the cushion line.
    walls.clear();
    wall_soft.clear();
    cell_walls.assign(nc, {});
    auto emit = [&](int cell, Vec2 a, Vec2 b2) {
        if (distance(a, b2) < 1e-6) return;
        walls.push_back({a, b2});
        const std::string& deck = cells[cell].deck;
        wall_soft.push_back(deck == "lower" || deck == "upper" ? 1 : 0);
        cell_walls[cell].push_back(static_cast<int>(walls.size()) - 1);
    };
    for (size_t c = 0; c < nc; ++c) {
        const Rect& r = cells[c].rect;
        struct Edge { bool vertical; double coord, lo, hi; };
        Edge edges[4] = {{true, r.x0, r.y0, r.y1},
                         {true, r.x1, r.y0, r.y1},
                         {false, r.y0, r.x0, r.x1},
                         {false, r.y1, r.x0, r.x1}};
        for (const Edge& e : edges) {
            std::vector<std::pair<double, double>> gaps;
            for (const Opening& o : openings) {
                if (o.cell_a != static_cast<int>(c) && o.cell_b != static_cast<int>(c)) continue;
                if (o.vertical != e.vertical || std::abs(o.coord - e.coord) > 1e-9) continue;
                double lo = std::max(o.lo, e.lo), hi = std::min(o.hi, e.hi);
                if (hi > lo) gaps.emplace_back(lo, hi);
            }
            std::sort(gaps.begin(), gaps.end());
            double cur = e.lo;
            auto pt = [&](double s) {
                return e.vertical ? Vec2{e.coord, s} : Vec2{s, e.coord};
            };
            for (auto [lo, hi] : gaps) {
                if (lo > cur) emit(static_cast<int>(c), pt(cur), pt(lo));
                cur = std::max(cur, hi);
            }
            if (e.hi > cur) emit(static_cast<int>(c), pt(cur), pt(e.hi));
        }
    }
    // Widen each cell's wall set with its neighbours' walls: agents probe
    // positions just across an opening before the cell transfer happens.
    std::vector<std::vector<int>> own = cell_walls;
    for (size_t c = 0; c < nc; ++c) {
        for (int nb : cell_neighbors[c])
            cell_walls[c].insert(cell_walls[c].end(), own[nb].begin(), own[nb].end());
        std::sort(cell_walls[c].begin(), cell_walls[c].end());
        cell_walls[c].erase(std::unique(cell_walls[c].begin(), cell_walls[c].end()),
                            cell_walls[c].end());
    }

    // Coarse opening-to-exit metric for route choice (centre to centre).
    opening_dist_to_exit.assign(openings.size(), std::numeric_limits<double>::infinity());
    if (main_exit_opening >= 0) {
        using QE = std::pair<double, int>;
        std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
        opening_dist_to_exit[main_exit_opening] = 0.0;
        pq.push({0.0, main_exit_opening});
        while (!pq.empty()) {
            auto [d, oi] = pq.top();
            pq.pop();
            if (d > opening_dist_to_exit[oi] + 1e-12) continue;
            const Opening& o = openings[oi];
            for (int c : {o.cell_a, o.cell_b}) {
                for (int oj : cell_openings[c]) {
                    if (oj == oi) continue;
                    double nd = d + distance(openings[oi].center(), openings[oj].center());
                    if (nd < opening_dist_to_exit[oj] - 1e-12) {
                        opening_dist_to_exit[oj] = nd;
                        pq.push({nd, oj});
                    }
                }
            }
        }
    }

    // Route choice only considers openings that actually lead on: the far
    // cell must either leave the domain or offer a strictly closer opening.
    // Keeps agents out of dead-end seat bays on their way past.
    cell_route_openings.assign(nc, {});
    for (size_t c = 0; c < nc; ++c) {
        for (int oi : cell_openings[c]) {
            if (!std::isfinite(opening_dist_to_exit[oi])) continue;
            const Opening& o = openings[oi];
            int other = (o.cell_a == static_cast<int>(c)) ? o.cell_b : o.cell_a;
            bool productive = cells[other].kind == CellKind::External;
            for (int oj : cell_openings[other]) {
                if (oj == oi) continue;
                if (opening_dist_to_exit[oj] < opening_dist_to_exit[oi] - 1e-9) {
                    productive = true;
                    break;
                }
            }
            if (productive) cell_route_openings[c].push_back(oi);
        }
        if (cell_route_openings[c].empty()) cell_route_openings[c] = cell_openings[c];
    }
}

int RailcarGeometry::cell_at(Vec2 p, int hint) const {
    if (hint >= 0 && hint < static_cast<int>(cells.size())) {
        if (cells[hint].rect.contains(p, 1e-9)) return hint;
        for (int nb : cell_neighbors[hint])
            if (cells[nb].rect.contains(p, 1e-9)) return nb;
    }
    for (size_t i = 0; i < cells.size(); ++i)
        if (cells[i].rect.contains(p, 1e-9)) return static_cast<int>(i);
    return -1;
}

const Seat& RailcarGeometry::seat(const std::string& id) const {
    for (const Seat& s : seats)
        if (s.id == id) return s;
    throw ConfigError("unknown seat id: " + id);
}

const Checkpoint& RailcarGeometry::checkpoint(const std::string& id) const {
    for (const Checkpoint& c : checkpoints)
        if (c.id == id) return c;
    throw ConfigError("unknown checkpoint id: " + id);
}

bool RailcarGeometry::visible(Vec2 a, Vec2 b, int ca, int cb) const {
    if (ca == cb) return true;
    auto blocked_by = [&](int cell) {
        for (int wi : cell_walls[cell]) {
            const Segment& w = walls[wi];
            if (segments_intersect(a, b, w.a, w.b)) return true;
        }
        return false;
    };
    if (ca >= 0 && blocked_by(ca)) return false;
    if (cb >= 0 && cb != ca && blocked_by(cb)) return false;
    return true;
}

double RailcarGeometry::wall_clearance(Vec2 p, int cell) const {
    if (cell < 0) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int wi : cell_walls[cell]) best = std::min(best, walls[wi].distance_to(p));
    return best;
}

void RailcarGeometry::wall_clearances(Vec2 p, int cell, double& hard, double& soft) const {
    hard = soft = std::numeric_limits<double>::infinity();
    if (cell < 0) {
        hard = soft = 0.0;
        return;
    }
    for (int wi : cell_walls[cell]) {
        double d = walls[wi].distance_to(p);
        (wall_soft[wi] ? soft : hard) = std::min(wall_soft[wi] ? soft : hard, d);
    }
}

// ---------------------------------------------------------------------------
// Path lengths: Dijkstra over sampled portal points. Samples are anchored at
// each opening's centre on a fixed 5 cm grid, so widening an opening only
// adds candidate points and path lengths cannot increase.
namespace {

struct PathGraph {
    std::vector<Vec2> pts;
    std::vector<int> opening_of;           // -1 for start
    std::vector<std::vector<int>> of_cell; // node ids per cell
};

PathGraph build_path_graph(const RailcarGeometry& g) {
    PathGraph pg;
    pg.of_cell.assign(g.cells.size(), {});
    for (size_t oi = 0; oi < g.openings.size(); ++oi) {
        const Opening& o = g.openings[oi];
        double c = (o.lo + o.hi) * 0.5;
        double half = (o.hi - o.lo) * 0.5;
        std::vector<double> offs{0.0};
        for (double s = 0.05; s <= half - 1e-9; s += 0.05) {
            offs.push_back(s);
            offs.push_back(-s);
        }
        for (double s : offs) {
            pg.pts.push_back(o.point_at(c + s));
            pg.opening_of.push_back(static_cast<int>(oi));
            int id = static_cast<int>(pg.pts.size()) - 1;
            pg.of_cell[o.cell_a].push_back(id);
            pg.of_cell[o.cell_b].push_back(id);
        }
    }
    return pg;
}

double dijkstra_to_goal(const RailcarGeometry& g, Vec2 from,
                        const std::function<double(Vec2, int cell)>& goal_dist) {
    int start_cell = g.cell_at(from);
    if (start_cell < 0) throw ConfigError("path endpoint outside walkable space");

    PathGraph pg = build_path_graph(g);
    const int n = static_cast<int>(pg.pts.size());
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;

    double best_goal = goal_dist(from, start_cell);
    for (int id : pg.of_cell[start_cell]) {
        dist[id] = distance(from, pg.pts[id]);
        pq.push({dist[id], id});
    }
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u] + 1e-12) continue;
        if (d >= best_goal) break;
        const Opening& o = g.openings[pg.opening_of[u]];
        for (int c : {o.cell_a, o.cell_b}) {
            double gd = goal_dist(pg.pts[u], c);
            if (gd < std::numeric_limits<double>::infinity())
                best_goal = std::min(best_goal, d + gd);
            for (int v : pg.of_cell[c]) {
                if (v == u) continue;
                double nd = d + distance(pg.pts[u], pg.pts[v]);
                if (nd < dist[v] - 1e-12) {
                    dist[v] = nd;
                    pq.push({nd, v});
                }
            }
        }
    }
    if (!std::isfinite(best_goal)) throw ConfigError("no path to goal");
    return best_goal;
}

}  // namespace

double shortest_path_length(const RailcarGeometry& g, Vec2 from) {
    const Opening& exit = g.openings[g.main_exit_opening];
    Segment line = exit.segment();
    auto goal = [&](Vec2 p, int cell) {
        if (cell == exit.cell_a || cell == exit.cell_b) return line.distance_to(p);
        return std::numeric_limits<double>::infinity();
    };
    return dijkstra_to_goal(g, from, goal);
}

double shortest_path_length(const RailcarGeometry& g, Vec2 from, Vec2 to) {
    int to_cell = g.cell_at(to);
    if (to_cell < 0) throw ConfigError("path endpoint outside walkable space");
    auto goal = [&](Vec2 p, int cell) {
        if (cell == to_cell) return distance(p, to);
        return std::numeric_limits<double>::infinity();
    };
    return dijkstra_to_goal(g, from, goal);
}

// ---------------------------------------------------------------------------
// JSON fixture, schema "railsim.geometry/1".

std::string RailcarGeometry::to_json() const {
    json j;
    j["schema"] = "railsim.geometry/1";
    j["exit_width_m"] = exit_width_m;
    j["exit_type"] = to_string(exit_model.type);
    j["sink_y"] = sink_y;
    j["main_exit_opening"] = main_exit_opening;
    if (exit_model.type == ExitType::Jump) {
        j["gate"] = {{"capacity", exit_model.gate_capacity},
                     {"zone", {gate_zone.x0, gate_zone.y0, gate_zone.x1, gate_zone.y1}},
                     {"drop_height_m", exit_model.drop_height_m},
                     {"balance_slots",
                      {{balance_slots[0].x, balance_slots[0].y},
                       {balance_slots[1].x, balance_slots[1].y}}}};
    }
    for (const Cell& c : cells)
        j["cells"].push_back({{"id", c.id},
                              {"deck", c.deck},
                              {"kind", static_cast<int>(c.kind)},
                              {"rect", {c.rect.x0, c.rect.y0, c.rect.x1, c.rect.y1}},
                              {"speed_factor", c.speed_factor}});
    for (const Opening& o : openings)
        j["openings"].push_back({{"a", o.cell_a},
                                 {"b", o.cell_b},
                                 {"vertical", o.vertical},
                                 {"coord", o.coord},
                                 {"span", {o.lo, o.hi}},
                                 {"label", o.label}});
    for (const Seat& s : seats)
        j["seats"].push_back(
            {{"id", s.id}, {"pos", {s.pos.x, s.pos.y}}, {"deck", s.deck}, {"cell", s.cell}});
    for (const Checkpoint& c : checkpoints)
        j["checkpoints"].push_back(
            {{"id", c.id}, {"seg", {c.seg.a.x, c.seg.a.y, c.seg.b.x, c.seg.b.y}}});
    for (const StairInfo& s : stairs)
        j["stairs"].push_back({{"id", s.id},
                               {"width_m", s.width_m},
                               {"inclined_length_m", s.inclined_length_m},
                               {"slope_deg", s.slope_deg},
                               {"from", s.from_deck},
                               {"to", s.to_deck}});
    for (const InternalDoor& d : internal_doors)
        j["internal_doors"].push_back({{"id", d.id},
                                       {"clear_width_m", d.clear_width_m},
                                       {"opening_delay_s", d.opening_delay_s},
                                       {"opening", d.opening}});
    return j.dump(2);
}

RailcarGeometry RailcarGeometry::from_json(const std::string& text) {
    json j = json::parse(text);
    if (j.value("schema", "") != "railsim.geometry/1")
        throw ConfigError("unsupported geometry schema");
    RailcarGeometry g;
    g.exit_width_m = j.at("exit_width_m").get<double>();
    g.exit_model = make_exit_model(exit_type_from_string(j.at("exit_type").get<std::string>()));
    g.sink_y = j.at("sink_y").get<double>();
    g.main_exit_opening = j.at("main_exit_opening").get<int>();
    if (j.contains("gate")) {
        auto& gz = j["gate"]["zone"];
        g.gate_zone = {gz[0], gz[1], gz[2], gz[3]};
        auto& bs = j["gate"]["balance_slots"];
        g.balance_slots[0] = {bs[0][0], bs[0][1]};
        g.balance_slots[1] = {bs[1][0], bs[1][1]};
    }
    for (auto& c : j.at("cells"))
        g.cells.push_back({c.at("id"), c.at("deck"), static_cast<CellKind>(c.at("kind").get<int>()),
                           {c["rect"][0], c["rect"][1], c["rect"][2], c["rect"][3]},
                           c.at("speed_factor")});
    for (auto& o : j.at("openings"))
        g.openings.push_back({o.at("a"), o.at("b"), o.at("vertical"), o.at("coord"),
                              o["span"][0], o["span"][1], o.value("label", "")});
    for (auto& s : j.at("seats"))
        g.seats.push_back({s.at("id"), {s["pos"][0], s["pos"][1]}, s.at("deck"), s.at("cell")});
    for (auto& c : j.at("checkpoints"))
        g.checkpoints.push_back(
            {c.at("id"), {{c["seg"][0], c["seg"][1]}, {c["seg"][2], c["seg"][3]}}});
    for (auto& s : j.at("stairs"))
        g.stairs.push_back({s.at("id"), s.at("width_m"), s.at("inclined_length_m"),
                            s.at("slope_deg"), s.at("from"), s.at("to")});
    if (j.contains("internal_doors"))
        for (auto& d : j["internal_doors"])
            g.internal_doors.push_back(
                {d.at("id"), d.at("clear_width_m"), d.at("opening_delay_s"), d.at("opening")});
    g.rebuild_derived();
    return g;
}

uint64_t RailcarGeometry::fixture_hash() const { return fnv1a64(to_json()); }

}  // namespace railsim
