#include "doctest.h"

#include <cmath>

#include "railsim/geometry.hpp"

using namespace railsim;

TEST_CASE("railcar fixture carries the Class 071 dimensions") {
    RailcarGeometry g = build_railcar(1.30, ExitType::Platform);

    CHECK(g.exit_width_m == doctest::Approx(1.30));
    const Opening& exit = g.openings[g.main_exit_opening];
    CHECK(exit.clear_width() == doctest::Approx(1.30));

    REQUIRE(!g.internal_doors.empty());
    CHECK(g.internal_doors[0].clear_width_m == doctest::Approx(0.65));
    CHECK(g.internal_doors[0].opening_delay_s == 0.0);  // doors held open

    bool found_stair = false, found_flight = false;
    for (const StairInfo& s : g.stairs) {
        if (s.id == "stair_internal") {
            found_stair = true;
            CHECK(s.width_m == doctest::Approx(0.76));
            CHECK(s.slope_deg == doctest::Approx(36.0));
            CHECK(s.inclined_length_m == doctest::Approx(1.88));
        }
        if (s.id == "mezz_flight") {
            found_flight = true;
            CHECK(s.width_m == doctest::Approx(0.84));
            CHECK(s.slope_deg == doctest::Approx(40.0));
        }
    }
    CHECK(found_stair);
    CHECK(found_flight);

    CHECK(g.seats.size() >= 46);
    for (const Seat& s : g.seats) CHECK(g.cells[s.cell].rect.contains(s.pos));
    CHECK(g.checkpoints.size() == 6);
}

TEST_CASE("exit model variants") {
    SUBCASE("platform removes agents 0.1 m past the door line") {
        RailcarGeometry g = build_railcar(0.65, ExitType::Platform);
        CHECK(g.sink_y == doctest::Approx(-0.1));
    }
    SUBCASE("jump keeps the 750 mm drop and a two-agent gate at any width") {
        for (double w : {0.65, 1.0, 1.34}) {
            RailcarGeometry g = build_railcar(w, ExitType::Jump);
            CHECK(g.exit_model.drop_height_m == doctest::Approx(0.75));
            CHECK(g.exit_model.gate_capacity == 2);
            CHECK(g.gate_zone.height() == doctest::Approx(0.5));
        }
    }
    SUBCASE("external stairs use 200 mm rises and 500 mm treads") {
        RailcarGeometry g = build_railcar(0.9, ExitType::Stairs);
        CHECK(g.exit_model.stair_rise_m == doctest::Approx(0.2));
        CHECK(g.exit_model.stair_tread_m == doctest::Approx(0.5));
        CHECK(g.exit_model.stair_steps == 3);
        CHECK(g.exit_model.stair_slope_deg == doctest::Approx(22.0));
    }
}

TEST_CASE("width outside sanity bounds is a configuration error") {
    CHECK_THROWS_AS(build_railcar(0.2, ExitType::Platform), ConfigError);
    CHECK_THROWS_AS(build_railcar(2.5, ExitType::Jump), ConfigError);
    CHECK_NOTHROW(build_railcar(0.65, ExitType::Platform));
    CHECK_NOTHROW(build_railcar(1.34, ExitType::Jump));
}

TEST_CASE("path lengths") {
    RailcarGeometry g = build_railcar(1.30, ExitType::Platform);
    const Opening& exit = g.openings[g.main_exit_opening];

    SUBCASE("point on the exit line has zero distance") {
        Vec2 p = exit.center();
        p.y = 0.0;
        CHECK(shortest_path_length(g, p) == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("boarding area point connects in a straight line") {
        Vec2 p{exit.center().x, 1.5};
        CHECK(shortest_path_length(g, p) == doctest::Approx(1.5).epsilon(0.02));
    }
    SUBCASE("upper-deck path includes the inclined staircase length") {
        // Stair-top and stair-bottom probes aligned with the stair axis:
        // their difference is the 1.88 m inclined flight.
        Vec2 top{-5.30, 1.205}, bottom{-3.48, 1.205};
        double d_top = shortest_path_length(g, top);
        double d_bottom = shortest_path_length(g, bottom);
        CHECK(d_top - d_bottom == doctest::Approx(1.82).epsilon(0.05));
        double via = shortest_path_length(g, g.seat("U01").pos);
        CHECK(via > d_bottom + 1.82);
    }
    SUBCASE("unreachable endpoint reports an error") {
        CHECK_THROWS_AS(shortest_path_length(g, Vec2{50.0, 50.0}), ConfigError);
    }
}

TEST_CASE("path length properties") {
    RailcarGeometry g = build_railcar(0.9, ExitType::Stairs);

    SUBCASE("triangle inequality over sampled triples") {
        Vec2 pts[] = {{1.0, 1.5}, {3.0, 1.2}, {6.0, 1.2}, {-2.0, 1.2}, {-6.5, 1.2}};
        for (Vec2 a : pts)
            for (Vec2 b : pts) {
                double ab = shortest_path_length(g, a, b);
                for (Vec2 c : pts) {
                    double ac = shortest_path_length(g, a, c);
                    double cb = shortest_path_length(g, c, b);
                    CHECK(ab <= ac + cb + 1e-9);
                }
            }
    }
    SUBCASE("widening the exit never lengthens any seat's path") {
        RailcarGeometry narrow = build_railcar(0.65, ExitType::Stairs);
        RailcarGeometry wide = build_railcar(1.34, ExitType::Stairs);
        for (size_t i = 0; i < narrow.seats.size(); i += 5) {
            double dn = shortest_path_length(narrow, narrow.seats[i].pos);
            double dw = shortest_path_length(wide, wide.seats[i].pos);
            CHECK(dw <= dn + 1e-9);
        }
    }
    SUBCASE("every seat reaches the exit under all three exit types") {
        for (ExitType e : {ExitType::Platform, ExitType::Stairs, ExitType::Jump}) {
            RailcarGeometry geo = build_railcar(0.65, e);
            for (const Seat& s : geo.seats)
                CHECK(shortest_path_length(geo, s.pos) > 0.0);
        }
    }
}

TEST_CASE("geometry fixture serialises and reloads") {
    RailcarGeometry g = build_railcar(1.10, ExitType::Jump);
    std::string text = g.to_json();
    RailcarGeometry r = RailcarGeometry::from_json(text);

    CHECK(r.cells.size() == g.cells.size());
    CHECK(r.openings.size() == g.openings.size());
    CHECK(r.seats.size() == g.seats.size());
    CHECK(r.exit_width_m == doctest::Approx(g.exit_width_m));
    CHECK(r.exit_model.type == ExitType::Jump);
    CHECK(r.fixture_hash() == g.fixture_hash());
    // Derived routing rebuilt identically.
    CHECK(r.opening_dist_to_exit == g.opening_dist_to_exit);

    CHECK_THROWS_AS(RailcarGeometry::from_json("{\"schema\":\"other/9\"}"), ConfigError);
}
