#pragma once

#include <optional>
#include <string>
#include <vector>

#include "railsim/engine.hpp"
#include "railsim/geom.hpp"

namespace railsim {

// Ordered egress times (t_1 ... t_N); t_N is the TET of the run.
struct OccupantCurve {
    std::string scenario_id;
    std::vector<double> times;  // non-decreasing

    int n() const { return static_cast<int>(times.size()); }
};

OccupantCurve occupant_curve(const EgressLog& log);

struct TetRecord {
    double tet = 0.0;
    double tet_46 = 0.0;
    double delay = 0.0;
    double tet_corr = 0.0;
};

// t_N of the curve; empty curves are an error.
double tet(const OccupantCurve& curve);

// Least-squares line through the last seven egress points (i, t_i),
// evaluated at the target count.
double extrapolate_to(const OccupantCurve& curve, int target_n);

double apply_delay_correction(double tet_46, double delay);

TetRecord tet_record(const OccupantCurve& curve, int target_n = 46, double delay = 0.0);

enum class FlowNumerator { Headways, Persons };  // N-1 (default) or N

// Mean flow over the first-to-last egress interval.
double mean_exit_flow(const OccupantCurve& curve,
                      FlowNumerator numerator = FlowNumerator::Headways);

// Travel speed of one agent between two checkpoint lines; none when the
// trajectory does not cross both in order.
std::optional<double> checkpoint_speed(const std::vector<TrajectorySample>& trajectory,
                                       Segment a, Segment b, double segment_distance_m);

// Same, from the engine's checkpoint event stream.
std::optional<double> checkpoint_speed(const EgressLog& log, int agent_id,
                                       const std::string& cp_a, const std::string& cp_b,
                                       double segment_distance_m);

}  // namespace railsim
