#include "railsim/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace railsim {

namespace {
constexpr double kPi = 3.14159265358979323846;
// Direction probe offsets, preferred side first.
constexpr double kAngles[] = {0.30, 0.60, 0.95, 1.35};
}  // namespace

uint64_t TuningConfig::hash() const {
    double v[] = {neighbor_radius, sep_radius,   sep_weight, wall_avoid_dist,
                  wall_avoid_weight, accel_limit, gap_preferred, time_gap,
                  lookahead,       yield_prob,   creep_speed, drop_cross_speed, interaction_range};
    return fnv1a64(std::string_view(reinterpret_cast<const char*>(v), sizeof v));
}

Simulation::Simulation(const RailcarGeometry& geometry, const Crowd& crowd, uint64_t run_seed,
                       RunOptions options)
    : geo_(geometry), opt_(options), seed_(run_seed) {
    if (!(opt_.dt > 0.0 && opt_.dt <= 0.1)) throw ConfigError("dt must be in (0, 0.1] s");
    agents_ = crowd.agents;
    state_.resize(agents_.size());
    for (size_t i = 0; i < agents_.size(); ++i) {
        const Seat& seat = geo_.seat(agents_[i].seat_id);
        state_[i].pos = seat.pos;
        state_[i].cell = seat.cell;
        state_[i].speed_prev = agents_[i].max_speed;  // seated but alert
        state_[i].speed_cmd = agents_[i].max_speed;
        state_[i].side_pref = hash_uniform(seed_, i, 0x51deULL) < 0.5 ? 1.0 : -1.0;
    }
    near_.resize(agents_.size());
}

std::array<int, 6> Simulation::phase_counts() const {
    std::array<int, 6> c{};
    for (const AgentState& s : state_) c[static_cast<int>(s.phase)] += 1;
    return c;
}

int Simulation::gate_occupancy() const {
    return (gate_slots_[0] >= 0 ? 1 : 0) + (gate_slots_[1] >= 0 ? 1 : 0);
}

void Simulation::override_target(int agent, Vec2 target) {
    state_[agent].target_override = target;
    state_[agent].phase = Phase::Moving;
}

void Simulation::place_agent(int agent, Vec2 pos) {
    state_[agent].pos = pos;
    state_[agent].cell = geo_.cell_at(pos, state_[agent].cell);
    if (state_[agent].cell < 0) throw ConfigError("agent placed outside walkable space");
}

double Simulation::local_density(int i, Vec2 heading) const {
    // Forward-weighted sensing: the crowd ahead slows you down, the queue
    // behind does not.
    const double r = opt_.tuning.neighbor_radius;
    int count = 1;  // self
    for (const Neighbor& nb : near_[i]) {
        if (nb.dist > r || state_[nb.id].phase == Phase::Exited) continue;
        Vec2 rel = state_[nb.id].pos - state_[i].pos;
        if (rel.dot(heading) > -0.1 * nb.dist) ++count;
    }
    return count / (0.5 * kPi * r * r);
}

Vec2 Simulation::route_target(int i) const {
    const AgentState& s = state_[i];
    if (s.target_override) return *s.target_override;
    const Cell& cell = geo_.cells[s.cell];
    if (cell.kind == CellKind::External) {
        // Walk straight off the computational domain.
        double x = std::clamp(s.pos.x, cell.rect.x0 + 0.1, cell.rect.x1 - 0.1);
        return {x, geo_.sink_y - 0.3};
    }
    double margin = agents_[i].squeezed_radius() + 0.02;
    double best = std::numeric_limits<double>::infinity();
    Vec2 best_target = s.pos;
    for (int oi : geo_.cell_route_openings[s.cell]) {
        double d_exit = geo_.opening_dist_to_exit[oi];
        if (!std::isfinite(d_exit)) continue;
        const Opening& o = geo_.openings[oi];
        double lo = o.lo + margin, hi = o.hi - margin;
        double span_pos = o.vertical ? s.pos.y : s.pos.x;
        double t = lo <= hi ? std::clamp(span_pos, lo, hi) : (o.lo + o.hi) * 0.5;
        Vec2 p = o.point_at(t);
        // Aim slightly past the opening so the crossing actually happens.
        int other = (o.cell_a == s.cell) ? o.cell_b : o.cell_a;
        Vec2 beyond = geo_.cells[other].rect.center();
        Vec2 nrm = o.vertical ? Vec2{beyond.x > o.coord ? 1.0 : -1.0, 0.0}
                              : Vec2{0.0, beyond.y > o.coord ? 1.0 : -1.0};
        p += nrm * 0.06;
        double score = distance(s.pos, p) + d_exit;
        if (score < best) {
            best = score;
            best_target = p;
        }
    }
    return best_target;
}

double Simulation::remaining_distance(int i) const {
    const AgentState& s = state_[i];
    if (s.phase == Phase::Exited) return -1.0;
    if (s.phase == Phase::Balancing) return 0.0;
    if (s.target_override) return distance(s.pos, *s.target_override);
    const Cell& cell = geo_.cells[s.cell];
    if (cell.kind == CellKind::External) return std::max(0.0, s.pos.y - geo_.sink_y);
    double margin = agents_[i].squeezed_radius() + 0.02;
    double best = std::numeric_limits<double>::infinity();
    for (int oi : geo_.cell_route_openings[s.cell]) {
        double d_exit = geo_.opening_dist_to_exit[oi];
        if (!std::isfinite(d_exit)) continue;
        const Opening& o = geo_.openings[oi];
        double lo = o.lo + margin, hi = o.hi - margin;
        double span_pos = o.vertical ? s.pos.y : s.pos.x;
        double t = lo <= hi ? std::clamp(span_pos, lo, hi) : (o.lo + o.hi) * 0.5;
        best = std::min(best, distance(s.pos, o.point_at(t)) + d_exit);
    }
    return std::isfinite(best) ? best : 1e9;
}

void Simulation::refresh_neighbors() {
    const double range = opt_.tuning.interaction_range;
    const double r2 = range * range;
    for (auto& v : near_) v.clear();
    for (size_t i = 0; i < agents_.size(); ++i) {
        if (state_[i].phase == Phase::Exited) continue;
        for (size_t j = i + 1; j < agents_.size(); ++j) {
            if (state_[j].phase == Phase::Exited) continue;
            double d2 = (state_[i].pos - state_[j].pos).norm2();
            if (d2 > r2) continue;
            if (!geo_.visible(state_[i].pos, state_[j].pos, state_[i].cell, state_[j].cell))
                continue;
            double d = std::sqrt(d2);
            near_[i].push_back({static_cast<int>(j), d});
            near_[j].push_back({static_cast<int>(i), d});
        }
    }
}

// Pushes the candidate out of wall and body-disk violations (position
// projection) instead of rejecting it, so contact turns into sliding.
// Returns the resolved position or nullopt when the move must be abandoned.
std::optional<Vec2> Simulation::resolve_candidate(int i, Vec2 c, bool& blocked_by_agent,
                                                  bool& needs_slot) const {
    const AgentState& s = state_[i];
    const double rsq = agents_[i].squeezed_radius();
    needs_slot = false;
    const double step0 = distance(s.pos, c);

    // Pairs compress a little per step (shoulder turns) down to 0.85 of
    // the squeezed contact distance; the relaxation pass in step() undoes
    // transient over-compression. Door jambs and car body keep a larger
    // clearance than seat-row edges (shoulders overhang those).
    double cur_hard, cur_soft;
    geo_.wall_clearances(s.pos, s.cell, cur_hard, cur_soft);
    const double lim_hard = std::min(rsq * 0.95, cur_hard - 1e-9);
    const double lim_soft = std::min(rsq * 0.55, cur_soft - 1e-9);
    auto pair_limit = [&](const Neighbor& nb) {
        const AgentState& o = state_[nb.id];
        // Nobody squeezes past someone hesitating at the drop edge; both
        // sides keep full body width.
        bool polite = o.phase == Phase::GateOccupying && o.timer_pre > 1e-9;
        double min_d = polite ? agents_[i].radius() + agents_[nb.id].radius() + 0.25
                              : rsq + agents_[nb.id].squeezed_radius();
        double cur = distance(s.pos, o.pos);
        double lim = std::min(min_d, std::max(cur - 0.3 * step0, 0.85 * min_d));
        if (cur < 0.85 * min_d) lim = std::min(lim, cur);
        return lim;
    };

    for (int iter = 0; iter < 8; ++iter) {
        bool violated = false;
        for (const Neighbor& nb : near_[i]) {
            const AgentState& o = state_[nb.id];
            if (o.phase == Phase::Exited) continue;
            double lim = pair_limit(nb);
            double d = distance(c, o.pos);
            if (d < lim - 1e-9) {
                blocked_by_agent = true;
                violated = true;
                Vec2 away = d > 1e-9 ? (c - o.pos) * (1.0 / d)
                                     : (s.pos - o.pos).normalized();
                if (away.norm2() < 0.5) away = {0.0, 1.0};
                c = o.pos + away * lim;
            }
        }
        for (int wi : geo_.cell_walls[s.cell]) {
            const Segment& w = geo_.walls[wi];
            double lim = geo_.wall_soft[wi] ? lim_soft : lim_hard;
            Vec2 cp = w.closest_point(c);
            double d = distance(c, cp);
            if (d < lim - 1e-9) {
                violated = true;
                Vec2 away = d > 1e-9 ? (c - cp) * (1.0 / d) : Vec2{0, 0};
                // Degenerate or far-side push: stay on the side we came from.
                Vec2 from_side = s.pos - w.closest_point(s.pos);
                if (away.dot(from_side) < 0.0 || away.norm2() < 0.5)
                    away = from_side.normalized();
                if (away.norm2() < 0.5) away = {0.0, 1.0};
                c = cp + away * lim;
            }
        }
        if (!violated) break;
    }

    // Post conditions: all constraints met (1 mm slack), some displacement,
    // no overshoot, valid cell.
    for (const Neighbor& nb : near_[i]) {
        if (state_[nb.id].phase == Phase::Exited) continue;
        if (distance(c, state_[nb.id].pos) < pair_limit(nb) - 1e-3) {
            blocked_by_agent = true;
            return std::nullopt;
        }
    }
    {
        double cand_hard, cand_soft;
        geo_.wall_clearances(c, s.cell, cand_hard, cand_soft);
        if (cand_hard < lim_hard - 1e-3 || cand_soft < lim_soft - 1e-3) return std::nullopt;
    }
    double moved = distance(s.pos, c);
    if (moved < 0.02 * step0 || moved > 1.5 * step0 + 1e-9) return std::nullopt;

    // Jump gate discipline, evaluated on the final position.
    if (geo_.exit_model.type == ExitType::Jump && geo_.cells[s.cell].kind != CellKind::External) {
        bool into_zone = geo_.gate_zone.contains(c, 0.0);
        bool has_slot = s.gate_slot >= 0;
        if (into_zone && !has_slot) {
            if (gate_occupancy() >= geo_.exit_model.gate_capacity) {
                blocked_by_agent = true;
                return std::nullopt;
            }
            needs_slot = true;
        }
        if (c.y < 0.0) {
            if (!has_slot && !needs_slot) return std::nullopt;
            if (s.timer_pre > 1e-9) return std::nullopt;  // still preparing to jump
        }
    }

    // Internal doors act as walls until their opening delay elapses.
    for (const InternalDoor& door : geo_.internal_doors) {
        if (door.opening_delay_s <= time_ + 1e-12) continue;
        Segment seg = geo_.openings[door.opening].segment();
        if (segments_intersect(s.pos, c, seg.a, seg.b)) return std::nullopt;
    }

    // Must land in the current cell or an adjacent one.
    if (!geo_.cells[s.cell].rect.contains(c, 1e-9)) {
        bool found = false;
        for (int nb : geo_.cell_neighbors[s.cell])
            if (geo_.cells[nb].rect.contains(c, 1e-9)) {
                found = true;
                break;
            }
        if (!found) return std::nullopt;
    }
    return c;
}

void Simulation::commit_move(int i, Vec2 c) {
    AgentState& s = state_[i];
    const Agent& a = agents_[i];
    Vec2 old = s.pos;
    double moved = distance(old, c);
    s.speed_prev = moved / opt_.dt;
    s.pos = c;
    int new_cell = geo_.cell_at(c, s.cell);
    if (new_cell >= 0) s.cell = new_cell;

    // Gate slot acquisition / release.
    if (geo_.exit_model.type == ExitType::Jump) {
        bool in_zone = geo_.gate_zone.contains(c, 0.0) && c.y >= 0.0;
        if (s.gate_slot < 0 && in_zone) {
            for (int k = 0; k < 2; ++k)
                if (gate_slots_[k] < 0) {
                    gate_slots_[k] = i;
                    s.gate_slot = k;
                    s.timer_pre = a.delay_before_jump;
                    s.phase = Phase::GateOccupying;
                    break;
                }
        } else if (s.gate_slot >= 0 && !in_zone && c.y >= 0.0) {
            // Shuffled back out of the zone without jumping.
            gate_slots_[s.gate_slot] = -1;
            s.gate_slot = -1;
            s.timer_pre = 0.0;
            s.phase = Phase::Moving;
        }
    }

    // Checkpoint crossings (includes the main exit line as CH01).
    for (const Checkpoint& cp : geo_.checkpoints) {
        if (segments_intersect(old, c, cp.seg.a, cp.seg.b)) {
            Vec2 d = c - old, e = cp.seg.b - cp.seg.a;
            double denom = d.x * e.y - d.y * e.x;
            double frac = 0.5;
            if (std::abs(denom) > 1e-12) {
                Vec2 ao = cp.seg.a - old;
                frac = std::clamp((ao.x * e.y - ao.y * e.x) / denom, 0.0, 1.0);
            }
            checkpoint_events_.push_back({i, cp.id, time_ + opt_.dt * frac});
        }
    }

    // Egress: crossing the main-exit line from the car side.
    if (old.y >= 0.0 && c.y < 0.0) {
        double frac = old.y / std::max(1e-12, old.y - c.y);
        double t_cross = time_ + opt_.dt * frac;
        events_.push_back({a.id, a.type, t_cross});
        if (geo_.exit_model.type == ExitType::Jump && a.delay_after_jump > 0.0) {
            // Balance at the terrain, laterally clear of the landing strip,
            // holding the gate slot while regaining stability.
            s.phase = Phase::Balancing;
            s.timer_post = a.delay_after_jump;
            s.pos = geo_.balance_slots[s.gate_slot >= 0 ? s.gate_slot : 0];
            s.cell = geo_.cell_at(s.pos, s.cell);
            return;
        }
        if (s.gate_slot >= 0) {
            gate_slots_[s.gate_slot] = -1;
            s.gate_slot = -1;
        }
        s.phase = Phase::Moving;
    }

    // Removal past the end of the computational domain.
    if (geo_.cells[s.cell].kind == CellKind::External && s.pos.y <= geo_.sink_y) {
        s.phase = Phase::Exited;
        ++exited_count_;
    }
}

void Simulation::move_agent(int i) {
    AgentState& s = state_[i];
    const Agent& a = agents_[i];
    const TuningConfig& tc = opt_.tuning;

    if (s.phase == Phase::Exited) return;
    if (s.phase == Phase::Balancing) {
        s.timer_post -= opt_.dt;
        if (s.timer_post <= 1e-9) {
            if (s.gate_slot >= 0) {
                gate_slots_[s.gate_slot] = -1;
                s.gate_slot = -1;
            }
            s.phase = Phase::Exited;
            ++exited_count_;
        }
        return;
    }
    if (s.phase == Phase::Seated) s.phase = Phase::Moving;
    if (s.gate_slot >= 0 && s.timer_pre > 0.0) {
        s.timer_pre -= opt_.dt;
        if (s.pos.y < 0.15) {  // composed at the edge, holding the doorway
            s.speed_prev = 0.0;
            return;
        }
    }

    // Symmetric standoffs (two wide agents flanking a narrow doorway) break
    // by stepping back briefly and retrying: no net displacement over a few
    // seconds triggers a short retreat.
    if (distance(s.pos, s.stall_anchor) > 0.10) {
        s.stall_anchor = s.pos;
        s.stall_window = 0;
    } else if (++s.stall_window > 200 && s.gate_slot < 0) {
        s.retreat_steps = 14 + static_cast<int>(10.0 * hash_uniform(seed_, i, step_index_));
        s.stall_window = 0;
    }

    Vec2 target = route_target(i);
    Vec2 seek = (target - s.pos).normalized();
    if (s.retreat_steps > 0) {
        --s.retreat_steps;
        seek = seek * -1.0;
    }

    // Separation from visible neighbours plus wall push.
    Vec2 adjust{0, 0};
    for (const Neighbor& nb : near_[i]) {
        if (state_[nb.id].phase == Phase::Exited) continue;
        if (nb.dist > tc.sep_radius || nb.dist < 1e-9) continue;
        Vec2 away = (s.pos - state_[nb.id].pos) * (1.0 / nb.dist);
        adjust += away * ((tc.sep_radius - nb.dist) / tc.sep_radius) * tc.sep_weight;
    }
    for (int wi : geo_.cell_walls[s.cell]) {
        const Segment& w = geo_.walls[wi];
        Vec2 cp = w.closest_point(s.pos);
        double d = distance(s.pos, cp);
        double lim = a.squeezed_radius() + tc.wall_avoid_dist;
        if (d < lim && d > 1e-9)
            adjust += (s.pos - cp) * (1.0 / d) * ((lim - d) / lim) * tc.wall_avoid_weight;
    }
    Vec2 base_dir = (seek + adjust).normalized();
    if (base_dir.norm2() < 0.5) base_dir = seek;

    double v_des = a.max_speed * geo_.cells[s.cell].speed_factor;
    if (a.sfpe_coupled) v_des *= sfpe_speed_fraction(local_density(i, seek));
    if (geo_.exit_model.type == ExitType::Jump && s.pos.y < 0.25 && s.pos.y >= -0.2 &&
        geo_.gate_zone.contains({s.pos.x, std::max(s.pos.y, 0.0)}, 0.05))
        v_des = std::min(v_des, tc.drop_cross_speed);
    // Commanded speed ramps up while moving and decays while blocked, so a
    // transient rejection does not restart the whole acceleration ramp.
    double v_cap = std::min(v_des, s.speed_cmd + tc.accel_limit * opt_.dt);
    if (v_cap < 1e-9) v_cap = std::min(v_des, tc.accel_limit * opt_.dt);

    // Swept-disk headway: the free distance along dir before the body disk
    // touches a neighbour's. Purely lateral contacts do not throttle.
    auto gap_speed = [&](Vec2 dir) {
        double v = std::numeric_limits<double>::infinity();
        for (const Neighbor& nb : near_[i]) {
            const AgentState& o = state_[nb.id];
            if (o.phase == Phase::Exited) continue;
            Vec2 rel = o.pos - s.pos;
            double proj = rel.dot(dir);
            if (proj <= 0.0 || proj > tc.lookahead) continue;
            double lat = std::abs(rel.x * dir.y - rel.y * dir.x);
            // Full shoulder widths here: people keep body-width spacing on
            // the move; the squeezed radii only bound hard conflicts.
            double rr = agents_[i].radius() + agents_[nb.id].radius();
            if (lat >= rr) continue;
            double gap = proj - std::sqrt(rr * rr - lat * lat) - tc.gap_preferred;
            v = std::min(v, std::max(0.0, gap) / tc.time_gap);
        }
        return std::max(v, tc.creep_speed);
    };

    bool straight_blocked_by_agent = false;
    int tries = 0;
    auto attempt = [&](Vec2 dir, double speed) -> bool {
        ++tries;
        double v = std::min({speed, gap_speed(dir)});
        if (v < 1e-9) return false;
        Vec2 c0 = s.pos + dir * (v * opt_.dt);
        bool blocked_agent = false, needs_slot = false;
        std::optional<Vec2> c = resolve_candidate(i, c0, blocked_agent, needs_slot);
        if (!c) {
            if (tries == 1) straight_blocked_by_agent |= blocked_agent;
            return false;
        }
        commit_move(i, *c);
        return true;
    };

    if (attempt(base_dir, v_cap)) {
        s.speed_cmd = std::min(v_des, std::max(s.speed_prev, v_cap));
        return;
    }

    // Conflict hesitation: stochastic service-time jitter at bottlenecks.
    if (straight_blocked_by_agent &&
        hash_uniform(seed_, static_cast<uint64_t>(i),
                     static_cast<uint64_t>(step_index_)) < tc.yield_prob) {
        s.speed_prev = 0.0;
        s.speed_cmd *= 0.55;
        return;
    }

    bool moved = false;
    for (double ang : kAngles) {
        for (double sgn : {s.side_pref, -s.side_pref}) {
            Vec2 dir = base_dir.rotated(sgn * ang);
            if (attempt(dir, v_cap)) {
                moved = true;
                break;
            }
        }
        if (moved) break;
    }
    if (moved) {
        s.speed_cmd = std::min(v_des, std::max(s.speed_prev, s.speed_cmd * 0.8));
        return;
    }
    s.speed_prev = 0.0;  // boxed in this step
    s.speed_cmd *= 0.55;
}

// Elastic push-apart of over-compressed pairs: transient squeezes from the
// move phase relax back toward full squeezed spacing. Displacements are
// small, stay inside the current cell and never cross the door line.
void Simulation::relax_overlaps() {
    const double kPush = 0.012;  // m per iteration and agent
    for (int iter = 0; iter < 2; ++iter) {
        auto immovable = [&](const AgentState& st) {
            return st.phase == Phase::Exited || st.phase == Phase::Balancing ||
                   (st.phase == Phase::GateOccupying && st.timer_pre > 1e-9);
        };
        for (size_t i = 0; i < agents_.size(); ++i) {
            if (immovable(state_[i])) continue;
            for (const Neighbor& nb : near_[i]) {
                if (nb.id < static_cast<int>(i)) continue;
                AgentState& a = state_[i];
                AgentState& b = state_[nb.id];
                if (immovable(b)) continue;
                double min_d = agents_[i].squeezed_radius() + agents_[nb.id].squeezed_radius();
                double d = distance(a.pos, b.pos);
                if (d >= min_d - 1e-9) continue;
                Vec2 axis = d > 1e-9 ? (b.pos - a.pos) * (1.0 / d) : Vec2{0.0, 1.0};
                double push = std::min(kPush, (min_d - d) * 0.5);
                auto apply = [&](AgentState& st, int agent, Vec2 delta) {
                    Vec2 np = st.pos + delta;
                    if (np.y < 0.001 && st.pos.y >= 0.0) return;  // never across the door line
                    if (!geo_.cells[st.cell].rect.contains(np, 1e-9)) return;
                    double h0, sf0, h, sf;
                    geo_.wall_clearances(st.pos, st.cell, h0, sf0);
                    geo_.wall_clearances(np, st.cell, h, sf);
                    double rs = agents_[agent].squeezed_radius();
                    if (h < rs * 0.80 && h < h0 - 1e-9) return;
                    if (sf < rs * 0.30 && sf < sf0 - 1e-9) return;
                    st.pos = np;
                };
                apply(a, static_cast<int>(i), axis * -push);
                apply(b, nb.id, axis * push);
            }
        }
    }
}

void Simulation::step() {
    refresh_neighbors();

    // Closest to the exit moves first; downstream space frees up within the
    // step, which keeps queues advancing smoothly.
    std::vector<std::pair<double, int>> keyed;
    keyed.reserve(agents_.size());
    for (size_t i = 0; i < agents_.size(); ++i) {
        if (state_[i].phase == Phase::Exited) continue;
        double key = remaining_distance(static_cast<int>(i));
        key += 1e-6 * hash_uniform(seed_, i, 0x0bdeULL);
        keyed.emplace_back(key, static_cast<int>(i));
    }
    std::sort(keyed.begin(), keyed.end());

    for (auto& [key, i] : keyed) move_agent(i);
    relax_overlaps();

    // Phase bookkeeping for queued-at-gate accounting.
    if (geo_.exit_model.type == ExitType::Jump) {
        for (size_t i = 0; i < state_.size(); ++i) {
            AgentState& s = state_[i];
            if (s.phase == Phase::Moving && s.gate_slot < 0 &&
                geo_.cells[s.cell].kind != CellKind::External) {
                double dy = s.pos.y - geo_.gate_zone.y1;
                bool near_zone = dy < 0.4 && s.pos.x > geo_.gate_zone.x0 - 0.3 &&
                                 s.pos.x < geo_.gate_zone.x1 + 0.3;
                if (near_zone && gate_occupancy() >= geo_.exit_model.gate_capacity)
                    s.phase = Phase::GateQueued;
            } else if (s.phase == Phase::GateQueued && s.gate_slot < 0 &&
                       gate_occupancy() < geo_.exit_model.gate_capacity) {
                s.phase = Phase::Moving;
            }
        }
    }

    max_gate_occupancy_ = std::max(max_gate_occupancy_, gate_occupancy());
    time_ += opt_.dt;
    ++step_index_;

    // Conservation of agents, asserted every step.
    auto counts = phase_counts();
    int total = 0;
    for (int c : counts) total += c;
    if (total != static_cast<int>(agents_.size())) conservation_ok_ = false;

    if (opt_.record_trajectories && step_index_ >= next_traj_step_) {
        for (size_t i = 0; i < agents_.size(); ++i)
            if (state_[i].phase != Phase::Exited)
                trajectories_.push_back({time_, agents_[i].id, state_[i].pos.x, state_[i].pos.y});
        next_traj_step_ = step_index_ + std::max<long>(1, std::lround(opt_.trajectory_cadence_s / opt_.dt));
    }
}

EgressLog Simulation::log() const {
    EgressLog lg;
    lg.run_seed = seed_;
    lg.dt = opt_.dt;
    lg.n_agents = static_cast<int>(agents_.size());
    lg.events = events_;
    std::sort(lg.events.begin(), lg.events.end(),
              [](const EgressEvent& a, const EgressEvent& b) { return a.time_s < b.time_s; });
    lg.checkpoint_events = checkpoint_events_;
    lg.trajectories = trajectories_;
    lg.max_gate_occupancy = max_gate_occupancy_;
    lg.conservation_ok = conservation_ok_;
    return lg;
}

EgressLog run(const RailcarGeometry& geometry, const Crowd& crowd, uint64_t run_seed,
              RunOptions options) {
    auto t0 = std::chrono::steady_clock::now();
    Simulation sim(geometry, crowd, run_seed, options);
    while (!sim.finished()) {
        if (sim.clock() > options.abort_time_s) {
            std::ostringstream os;
            os << "run aborted at " << sim.clock() << " s: " << sim.exited_count() << "/"
               << crowd.agents.size() << " agents out, gate occupancy "
               << sim.gate_occupancy() << "; stuck agents:";
            for (size_t i = 0; i < crowd.agents.size(); ++i)
                if (sim.phase(static_cast<int>(i)) != Phase::Exited)
                    os << " #" << i << "(" << sim.position(static_cast<int>(i)).x << ","
                       << sim.position(static_cast<int>(i)).y << ",ph"
                       << static_cast<int>(sim.phase(static_cast<int>(i))) << ")";
            throw SimError(os.str());
        }
        sim.step();
    }
    EgressLog lg = sim.log();
    lg.geometry_hash = geometry.fixture_hash();
    lg.crowd_hash = crowd.fixture_hash();
    lg.tuning_hash = options.tuning.hash();
    lg.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return lg;
}

}  // namespace railsim
