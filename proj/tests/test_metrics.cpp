#include "doctest.h"

#include "railsim/campaign.hpp"
#include "railsim/metrics.hpp"

using namespace railsim;

namespace {

OccupantCurve curve_of(std::vector<double> times) {
    OccupantCurve c;
    c.times = std::move(times);
    return c;
}

// Independent regression oracle: straight least squares via the normal
// equations, no shared code with the implementation.
double line_fit_at(const std::vector<std::pair<double, double>>& pts, double x) {
    double n = pts.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [a, b] : pts) {
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return (sy - slope * sx) / n + slope * x;
}

}  // namespace

TEST_CASE("tet") {
    CHECK(tet(curve_of({1, 2, 3})) == doctest::Approx(3.0));
    CHECK(tet(curve_of({42.04})) == doctest::Approx(42.04));
    CHECK_THROWS_AS(tet(curve_of({})), ConfigError);
}

TEST_CASE("linear extrapolation of the last seven egress times") {
    SUBCASE("exact one-second headways extend exactly") {
        std::vector<double> t;
        for (int i = 1; i <= 42; ++i) t.push_back(static_cast<double>(i));
        CHECK(extrapolate_to(curve_of(t), 46) == doctest::Approx(46.0));
    }
    SUBCASE("slope 1.4 tail ending at 49.0 extrapolates 42 -> 46") {
        std::vector<double> t;
        for (int i = 1; i <= 42; ++i) t.push_back(49.0 - 1.4 * (42 - i));
        double got = extrapolate_to(curve_of(t), 46);
        CHECK(got == doctest::Approx(49.0 + 4 * 1.4));
        // Cross-check against the independent oracle.
        std::vector<std::pair<double, double>> pts;
        for (int i = 36; i <= 42; ++i) pts.emplace_back(i, t[i - 1]);
        CHECK(got == doctest::Approx(line_fit_at(pts, 46)).epsilon(1e-12));
    }
    SUBCASE("noisy tail still matches the oracle") {
        std::vector<double> t{5, 8, 11, 14.2, 18, 21, 24.5, 28, 30.1, 33, 36.6, 39};
        double got = extrapolate_to(curve_of(t), 15);
        std::vector<std::pair<double, double>> pts;
        for (size_t i = t.size() - 7; i < t.size(); ++i) pts.emplace_back(i + 1, t[i]);
        CHECK(got == doctest::Approx(line_fit_at(pts, 15)).epsilon(1e-12));
    }
    SUBCASE("residual is zero on exactly-linear tails") {
        std::vector<double> t;
        for (int i = 1; i <= 20; ++i) t.push_back(3.0 + 0.8 * i);
        for (int target : {20, 21, 25, 46})
            CHECK(extrapolate_to(curve_of(t), target) == doctest::Approx(3.0 + 0.8 * target));
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(extrapolate_to(curve_of({1, 2, 3}), 5), ConfigError);
        std::vector<double> t{1, 2, 3, 4, 5, 6, 7};
        CHECK_THROWS_AS(extrapolate_to(curve_of(t), 6), ConfigError);
        CHECK(extrapolate_to(curve_of(t), 7) == doctest::Approx(7.0));
    }
}

TEST_CASE("delay correction") {
    CHECK(apply_delay_correction(52.19, 5.0) == doctest::Approx(47.19));
    CHECK(apply_delay_correction(72.89, 5.0) == doctest::Approx(67.89));
    CHECK(apply_delay_correction(61.5, 0.0) == doctest::Approx(61.5));
    CHECK_THROWS_AS(apply_delay_correction(10.0, -1.0), ConfigError);
}

TEST_CASE("tet record invariants") {
    std::vector<double> t;
    for (int i = 1; i <= 42; ++i) t.push_back(8.0 + i);
    TetRecord r = tet_record(curve_of(t), 46, 5.0);
    CHECK(r.tet == doctest::Approx(50.0));
    CHECK(r.tet_46 >= r.tet);
    CHECK(r.tet_corr == doctest::Approx(r.tet_46 - 5.0));

    std::vector<double> full;
    for (int i = 1; i <= 46; ++i) full.push_back(8.0 + i);
    TetRecord f = tet_record(curve_of(full), 46, 0.0);
    CHECK(f.tet_46 == doctest::Approx(f.tet));
}

TEST_CASE("mean exit flow") {
    SUBCASE("42 agents from 8.0 s to 49.0 s flow at 1.0 per second") {
        std::vector<double> t;
        for (int i = 0; i < 42; ++i) t.push_back(8.0 + i);
        CHECK(mean_exit_flow(curve_of(t)) == doctest::Approx(1.0));
    }
    SUBCASE("two agents one second apart") {
        CHECK(mean_exit_flow(curve_of({4.0, 5.0})) == doctest::Approx(1.0));
    }
    SUBCASE("numerator switch") {
        OccupantCurve c = curve_of({0.0, 1.0, 2.0, 3.0});
        CHECK(mean_exit_flow(c, FlowNumerator::Headways) == doctest::Approx(1.0));
        CHECK(mean_exit_flow(c, FlowNumerator::Persons) == doctest::Approx(4.0 / 3.0));
    }
    SUBCASE("invariant under uniform time shifts") {
        std::vector<double> t{3.1, 4.5, 7.2, 9.9, 14.0};
        double base = mean_exit_flow(curve_of(t));
        for (double shift : {-2.0, 5.0, 111.0}) {
            std::vector<double> shifted;
            for (double x : t) shifted.push_back(x + shift);
            CHECK(mean_exit_flow(curve_of(shifted)) == doctest::Approx(base));
        }
    }
    SUBCASE("degenerate curves error") {
        CHECK_THROWS_AS(mean_exit_flow(curve_of({1.0})), ConfigError);
        CHECK_THROWS_AS(mean_exit_flow(curve_of({2.0, 2.0})), ConfigError);
    }
}

TEST_CASE("checkpoint speeds from trajectories") {
    Segment a{{2.0, 0.0}, {2.0, 1.0}};
    Segment b{{0.17, 0.0}, {0.17, 1.0}};

    SUBCASE("constant 0.94 m/s over a 1.83 m aisle pair") {
        std::vector<TrajectorySample> traj;
        for (int k = 0; k <= 60; ++k) {
            double t = 0.1 * k;
            traj.push_back({t, 0, 2.5 - 0.94 * t, 0.5});
        }
        auto v = checkpoint_speed(traj, a, b, 1.83);
        REQUIRE(v.has_value());
        CHECK(*v == doctest::Approx(0.94).epsilon(1e-6));
    }
    SUBCASE("1.83 m in 5.23 s is the congested aisle figure") {
        std::vector<TrajectorySample> traj{{0.0, 0, 2.1, 0.5},
                                           {1.0, 0, 1.99, 0.5},
                                           {6.23, 0, 0.16, 0.5},
                                           {7.0, 0, 0.0, 0.5}};
        // Crossing times interpolate to ~1.0 and ~6.23.
        auto v = checkpoint_speed(traj, a, b, 1.83);
        REQUIRE(v.has_value());
        CHECK(*v == doctest::Approx(1.83 / 5.23).epsilon(0.02));
    }
    SUBCASE("stair pair magnitude: 1.88 m in 4.59 s") {
        CHECK(1.88 / 4.59 == doctest::Approx(0.41).epsilon(0.01));
    }
    SUBCASE("no crossing yields no result") {
        std::vector<TrajectorySample> traj{{0.0, 0, 5.0, 0.5}, {1.0, 0, 4.0, 0.5}};
        CHECK(!checkpoint_speed(traj, a, b, 1.83).has_value());
    }
}

TEST_CASE("metrics survive a serialise-reload round trip") {
    RailcarGeometry g = build_railcar(1.10, ExitType::Platform);
    Crowd c = build_crowd(46, 0, default_seat_plan(), 20180620);
    EgressLog log = run(g, c, 31);
    EgressLog reloaded = parse_egress_log_csv(egress_log_csv(log));
    OccupantCurve c1 = occupant_curve(log), c2 = occupant_curve(reloaded);
    CHECK(tet(c1) == doctest::Approx(tet(c2)));
    CHECK(mean_exit_flow(c1) == doctest::Approx(mean_exit_flow(c2)));
    REQUIRE(c1.n() == c2.n());
    for (int i = 0; i < c1.n(); ++i)
        CHECK(c1.times[i] == doctest::Approx(c2.times[i]).epsilon(1e-6));
}
