#include "railsim/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace railsim {

OccupantCurve occupant_curve(const EgressLog& log) {
    OccupantCurve c;
    c.scenario_id = log.scenario_id;
    c.times.reserve(log.events.size());
    for (const EgressEvent& e : log.events) c.times.push_back(e.time_s);
    std::sort(c.times.begin(), c.times.end());
    return c;
}

double tet(const OccupantCurve& curve) {
    if (curve.times.empty()) throw ConfigError("empty occupant curve");
    return curve.times.back();
}

double extrapolate_to(const OccupantCurve& curve, int target_n) {
    const int n = curve.n();
    if (n < 7) throw ConfigError("extrapolation requires at least 7 egress times");
    if (target_n < n) throw ConfigError("extrapolation target below curve size");
    if (target_n == n) return curve.times.back();

    // Least squares on (i, t_i), i = n-6 ... n (1-based).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = n - 7; i < n; ++i) {
        double x = i + 1;
        double y = curve.times[i];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double k = 7.0;
    double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    double intercept = (sy - slope * sx) / k;
    return intercept + slope * target_n;
}

double apply_delay_correction(double tet_46, double delay) {
    if (delay < 0.0) throw ConfigError("delay must be non-negative");
    return tet_46 - delay;
}

TetRecord tet_record(const OccupantCurve& curve, int target_n, double delay) {
    TetRecord r;
    r.tet = tet(curve);
    r.tet_46 = curve.n() >= target_n ? r.tet : extrapolate_to(curve, target_n);
    r.delay = delay;
    r.tet_corr = apply_delay_correction(r.tet_46, delay);
    return r;
}

double mean_exit_flow(const OccupantCurve& curve, FlowNumerator numerator) {
    if (curve.n() < 2) throw ConfigError("flow requires at least two egress times");
    double span = curve.times.back() - curve.times.front();
    if (span <= 0.0) throw ConfigError("degenerate egress interval");
    double num = numerator == FlowNumerator::Headways ? curve.n() - 1 : curve.n();
    return num / span;
}

namespace {

std::optional<double> crossing_time(const std::vector<TrajectorySample>& traj, Segment seg) {
    for (size_t k = 1; k < traj.size(); ++k) {
        Vec2 p0{traj[k - 1].x, traj[k - 1].y};
        Vec2 p1{traj[k].x, traj[k].y};
        if (!segments_intersect(p0, p1, seg.a, seg.b)) continue;
        Vec2 d = p1 - p0, e = seg.b - seg.a;
        double denom = d.x * e.y - d.y * e.x;
        double frac = 0.5;
        if (std::abs(denom) > 1e-12) {
            Vec2 ao = seg.a - p0;
            frac = std::clamp((ao.x * e.y - ao.y * e.x) / denom, 0.0, 1.0);
        }
        return traj[k - 1].time_s + frac * (traj[k].time_s - traj[k - 1].time_s);
    }
    return std::nullopt;
}

}  // namespace

std::optional<double> checkpoint_speed(const std::vector<TrajectorySample>& trajectory,
                                       Segment a, Segment b, double segment_distance_m) {
    auto ta = crossing_time(trajectory, a);
    if (!ta) return std::nullopt;
    // Only the part of the trajectory after the first crossing counts.
    std::vector<TrajectorySample> tail;
    for (const TrajectorySample& s : trajectory)
        if (s.time_s >= *ta - 1e-9) tail.push_back(s);
    auto tb = crossing_time(tail, b);
    if (!tb || *tb <= *ta) return std::nullopt;
    return segment_distance_m / (*tb - *ta);
}

std::optional<double> checkpoint_speed(const EgressLog& log, int agent_id,
                                       const std::string& cp_a, const std::string& cp_b,
                                       double segment_distance_m) {
    std::optional<double> ta, tb;
    for (const CheckpointEvent& e : log.checkpoint_events) {
        if (e.agent_id != agent_id) continue;
        if (e.checkpoint == cp_a && !ta) ta = e.time_s;
        if (e.checkpoint == cp_b && ta && !tb && e.time_s > *ta) tb = e.time_s;
    }
    if (!ta || !tb) return std::nullopt;
    return segment_distance_m / (*tb - *ta);
}

}  // namespace railsim
