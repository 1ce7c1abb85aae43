#include "doctest.h"

#include <map>

#include "railsim/refdata.hpp"

using namespace railsim;

TEST_CASE("reference fixture loads complete and checksum-verified") {
    ReferenceData ref = load_reference();
    CHECK(ref.trials.size() == 30);
    CHECK(ref.flows.size() == 30);
    CHECK(ref.jump_delays.size() == 4);

    const ReferenceTrial& t13b = ref.trial("13B");
    CHECK(t13b.exit == ExitType::Jump);
    CHECK(t13b.group == "HET");
    CHECK(t13b.width_m == doctest::Approx(0.65));
    CHECK(t13b.n == 46);
    CHECK(t13b.tet == doctest::Approx(73.12));
    CHECK(t13b.tet_46 == doctest::Approx(73.12));
    CHECK(t13b.delay == doctest::Approx(0.0));
    CHECK(t13b.tet_corr == doctest::Approx(73.12));

    const ReferenceTrial& t2a = ref.trial("2A");
    CHECK(t2a.delay == doctest::Approx(5.0));
    CHECK(t2a.tet_corr == doctest::Approx(47.19));
    CHECK(t2a.first_trial);

    CHECK_THROWS_AS(ref.trial("99Z"), ConfigError);
}

TEST_CASE("corrected times satisfy TETcorr = TET46 - delay on every row") {
    for (const ReferenceTrial& t : load_reference().trials) {
        CHECK(t.tet_corr == doctest::Approx(t.tet_46 - t.delay));
        if (t.n < 46) CHECK(t.tet_46 >= t.tet);
        if (t.n == 46) CHECK(t.tet_46 == doctest::Approx(t.tet));
    }
}

TEST_CASE("jump trials: the heterogeneous group is slower at every width") {
    ReferenceData ref = load_reference();
    std::map<double, double> hom, het;
    for (const ReferenceTrial& t : ref.trials) {
        if (t.exit != ExitType::Jump) continue;
        (t.group == "HOM" ? hom : het)[t.width_m] = t.tet_corr;
    }
    REQUIRE(hom.size() == 5);
    REQUIRE(het.size() == 5);
    double diff_sum = 0;
    for (auto& [w, v] : hom) {
        CHECK(het.at(w) > v);  // 5/5 width pairs
        diff_sum += het.at(w) - v;
    }
    // Mean corrected difference sits in the low teens of seconds.
    CHECK(diff_sum / 5.0 > 10.0);
    CHECK(diff_sum / 5.0 < 18.0);
}

TEST_CASE("measured flows rise with width in every family") {
    ReferenceData ref = load_reference();
    for (ExitType e : {ExitType::Platform, ExitType::Stairs, ExitType::Jump})
        for (const char* grp : {"HOM", "HET"}) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            int n = 0;
            for (const ReferenceFlow& f : ref.flows) {
                if (f.exit != e || f.group != grp) continue;
                sx += f.width_m;
                sy += f.flow_pps;
                sxx += f.width_m * f.width_m;
                sxy += f.width_m * f.flow_pps;
                ++n;
            }
            REQUIRE(n == 5);
            double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
            CHECK(slope > 0.0);
        }
}

TEST_CASE("fixture round-trips through its CSV form") {
    ReferenceData ref = load_reference();
    std::string csv = ref.trials_csv();
    CHECK(csv.find("13B,jump,HET,0.65,46,73.12") != std::string::npos);
    CHECK(csv.find("2A,platform,HET,0.90,46,52.19,52.19,5.00,47.19") != std::string::npos);
}

TEST_CASE("validate_batch") {
    ReferenceData ref = load_reference();

    SUBCASE("bands around the reference values contain them all") {
        std::map<ScenarioKey, std::vector<double>> batch;
        for (const ReferenceTrial& t : ref.trials) {
            std::vector<double> runs;
            for (int k = 0; k < 30; ++k) runs.push_back(t.tet_corr + 0.1 * (k - 15));
            batch[{t.width_m, t.het_pct, t.exit}] = runs;
        }
        ValidationReport rep = validate_batch(batch, ref);
        CHECK(rep.scenarios.size() == 30);
        CHECK(rep.containment_rate == doctest::Approx(1.0));
    }
    SUBCASE("empty batch errors") {
        std::map<ScenarioKey, std::vector<double>> batch;
        CHECK_THROWS_AS(validate_batch(batch, ref), ConfigError);
    }
    SUBCASE("missing scenarios are listed") {
        std::map<ScenarioKey, std::vector<double>> batch;
        batch[{0.65, 0.0, ExitType::Platform}] = std::vector<double>(30, 50.0);
        try {
            validate_batch(batch, ref);
            FAIL("expected an error");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("W0.65_H28_jump") != std::string::npos);
        }
    }
    SUBCASE("under-sampled scenarios are rejected") {
        std::map<ScenarioKey, std::vector<double>> batch;
        for (const ReferenceTrial& t : ref.trials)
            batch[{t.width_m, t.het_pct, t.exit}] = std::vector<double>(10, t.tet_corr);
        CHECK_THROWS_AS(validate_batch(batch, ref), ConfigError);
    }
}
