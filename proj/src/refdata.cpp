#include "railsim/refdata.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "railsim/rng.hpp"

namespace railsim {

using nlohmann::json;

namespace {

// Appendix table: measured TET, extrapolated TET 46 and corrected TET for
// the 30 trials. Columns: id, exit, group, width, n, TET, TET46, delay, corr.
constexpr std::string_view kTrialsCsv =
    "id,exit,group,width_m,n,tet_s,tet46_s,delay_s,tetcorr_s,first\n"
    "4A,platform,HOM,0.65,42,49.19,55.28,0,55.28,0\n"
    "8A,platform,HOM,0.75,42,44.00,50.07,0,50.07,0\n"
    "1A,platform,HOM,0.90,42,42.04,44.95,0,44.95,1\n"
    "9A,platform,HOM,1.10,42,37.01,42.79,0,42.79,0\n"
    "5A,platform,HOM,1.34,42,37.10,42.59,0,42.59,0\n"
    "3A,platform,HET,0.65,46,56.17,56.17,0,56.17,0\n"
    "7A,platform,HET,0.75,46,52.14,52.14,0,52.14,0\n"
    "2A,platform,HET,0.90,46,52.19,52.19,5.00,47.19,1\n"
    "10A,platform,HET,1.10,46,42.13,42.13,0,42.13,0\n"
    "6A,platform,HET,1.34,46,37.20,37.20,0,37.20,0\n"
    "7B,stairs,HOM,0.65,42,52.16,58.18,0,58.18,0\n"
    "3B,stairs,HOM,0.75,42,48.13,53.72,0,53.72,0\n"
    "10B,stairs,HOM,0.90,42,43.23,50.12,0,50.12,0\n"
    "2B,stairs,HOM,1.10,42,39.06,43.31,0,43.31,1\n"
    "6B,stairs,HOM,1.34,42,37.02,42.61,0,42.61,0\n"
    "8B,stairs,HET,0.65,46,60.09,60.09,0,60.09,0\n"
    "4B,stairs,HET,0.75,46,57.04,57.04,0,57.04,0\n"
    "9B,stairs,HET,0.90,46,47.18,47.18,0,47.18,0\n"
    "1B,stairs,HET,1.10,46,40.19,40.19,0,40.19,1\n"
    "5B,stairs,HET,1.34,46,43.00,43.00,0,43.00,0\n"
    "14B,jump,HOM,0.65,42,53.00,58.40,0,58.40,0\n"
    "13A,jump,HOM,0.75,42,51.24,57.10,0,57.10,0\n"
    "11B,jump,HOM,0.90,42,51.06,56.03,0,56.03,1\n"
    "12A,jump,HOM,1.10,42,44.19,50.30,0,50.30,0\n"
    "15B,jump,HOM,1.34,42,39.00,45.73,0,45.73,0\n"
    "13B,jump,HET,0.65,46,73.12,73.12,0,73.12,0\n"
    "14A,jump,HET,0.75,46,73.00,73.00,0,73.00,0\n"
    "12B,jump,HET,0.90,42,67.03,72.03,0,72.03,0\n"
    "11A,jump,HET,1.10,42,68.00,72.89,5.00,67.89,1\n"
    "15A,jump,HET,1.34,46,53.25,53.25,0,53.25,0\n";

// Measured average exit flows, persons per second.
struct FlowRow {
    const char* exit;
    const char* group;
    double w;
    double flow;
};
constexpr FlowRow kFlows[] = {
    {"platform", "HOM", 0.65, 1.00}, {"platform", "HOM", 0.75, 1.11},
    {"platform", "HOM", 0.90, 1.27}, {"platform", "HOM", 1.10, 1.27},
    {"platform", "HOM", 1.34, 1.40}, {"platform", "HET", 0.65, 0.98},
    {"platform", "HET", 0.75, 1.07}, {"platform", "HET", 0.90, 1.15},
    {"platform", "HET", 1.10, 1.24}, {"platform", "HET", 1.34, 1.47},
    {"stairs", "HOM", 0.65, 0.93},   {"stairs", "HOM", 0.75, 1.00},
    {"stairs", "HOM", 0.90, 1.08},   {"stairs", "HOM", 1.10, 1.24},
    {"stairs", "HOM", 1.34, 1.50},   {"stairs", "HET", 0.65, 0.89},
    {"stairs", "HET", 0.75, 0.92},   {"stairs", "HET", 0.90, 1.12},
    {"stairs", "HET", 1.10, 1.34},   {"stairs", "HET", 1.34, 1.27},
    {"jump", "HOM", 0.65, 0.86},     {"jump", "HOM", 0.75, 0.91},
    {"jump", "HOM", 0.90, 0.95},     {"jump", "HOM", 1.10, 1.14},
    {"jump", "HOM", 1.34, 1.27},     {"jump", "HET", 0.65, 0.71},
    {"jump", "HET", 0.75, 0.73},     {"jump", "HET", 0.90, 0.69},
    {"jump", "HET", 1.10, 0.75},     {"jump", "HET", 1.34, 1.00},
};

}  // namespace

const ReferenceTrial& ReferenceData::trial(const std::string& id) const {
    for (const ReferenceTrial& t : trials)
        if (t.id == id) return t;
    throw ConfigError("unknown reference trial: " + id);
}

std::string ReferenceData::trials_csv() const { return std::string(kTrialsCsv); }

ReferenceData load_reference() {
    // The fixture is compiled in; the checksum guards against accidental
    // edits drifting away from the published table.
    constexpr uint64_t kExpected = 0x411068d780b1c1aeULL;
    if (fnv1a64(kTrialsCsv) != kExpected)
        throw ConfigError("reference fixture corrupted (checksum mismatch)");

    ReferenceData data;
    std::istringstream is{std::string(kTrialsCsv)};
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string id, exit, group, tok;
        ReferenceTrial t;
        std::getline(ls, t.id, ',');
        std::getline(ls, exit, ',');
        std::getline(ls, t.group, ',');
        std::getline(ls, tok, ',');
        t.width_m = std::stod(tok);
        std::getline(ls, tok, ',');
        t.n = std::stoi(tok);
        std::getline(ls, tok, ',');
        t.tet = std::stod(tok);
        std::getline(ls, tok, ',');
        t.tet_46 = std::stod(tok);
        std::getline(ls, tok, ',');
        t.delay = std::stod(tok);
        std::getline(ls, tok, ',');
        t.tet_corr = std::stod(tok);
        std::getline(ls, tok, ',');
        t.first_trial = tok == "1";
        t.exit = exit_type_from_string(exit);
        t.het_pct = t.group == "HET" ? 28.0 : 0.0;
        data.trials.push_back(t);
    }
    if (data.trials.size() != 30) throw ConfigError("reference fixture must hold 30 trials");
    for (const ReferenceTrial& t : data.trials)
        if (std::abs(t.tet_corr - (t.tet_46 - t.delay)) > 1e-9)
            throw ConfigError("reference fixture violates TETcorr = TET46 - delay");

    for (const FlowRow& f : kFlows)
        data.flows.push_back({exit_type_from_string(f.exit), f.group, f.w, f.flow});
    data.jump_delays = {{"child", 2.5, 0.5},
                        {"toddler_carrier", 1.5, 0.5},
                        {"senior", 2.0, 1.0},
                        {"disabled", 1.5, 0.75}};
    return data;
}

bool ScenarioKey::operator<(const ScenarioKey& o) const {
    if (width_m != o.width_m) return width_m < o.width_m;
    if (het_pct != o.het_pct) return het_pct < o.het_pct;
    return static_cast<int>(exit) < static_cast<int>(o.exit);
}

std::string ScenarioKey::str() const {
    std::ostringstream os;
    os << "W" << width_m << "_H" << het_pct << "_" << to_string(exit);
    return os.str();
}

ValidationReport validate_batch(const std::map<ScenarioKey, std::vector<double>>& batch,
                                const ReferenceData& ref) {
    if (batch.empty()) throw ConfigError("empty simulation batch");

    std::vector<std::string> gaps;
    ValidationReport rep;
    for (const ReferenceTrial& t : ref.trials) {
        ScenarioKey key{t.width_m, t.het_pct, t.exit};
        auto it = batch.find(key);
        if (it == batch.end()) {
            gaps.push_back(key.str());
            continue;
        }
        if (it->second.size() < 30) {
            gaps.push_back(key.str() + " (only " + std::to_string(it->second.size()) +
                           " runs, need 30)");
            continue;
        }
        const std::vector<double>& tets = it->second;
        ScenarioValidation v;
        v.key = key;
        v.trial_id = t.id;
        v.experimental = t.tet_corr;
        v.band_min = *std::min_element(tets.begin(), tets.end());
        v.band_max = *std::max_element(tets.begin(), tets.end());
        v.sim_mean = std::accumulate(tets.begin(), tets.end(), 0.0) / tets.size();
        v.contained = t.tet_corr >= 0.9 * v.band_min && t.tet_corr <= 1.1 * v.band_max;
        v.relative_deviation = (v.sim_mean - t.tet_corr) / t.tet_corr;
        rep.scenarios.push_back(v);
    }
    if (!gaps.empty()) {
        std::string msg = "batch is missing scenarios:";
        for (const std::string& g : gaps) msg += " " + g;
        throw ConfigError(msg);
    }
    int contained = 0;
    for (const ScenarioValidation& v : rep.scenarios) contained += v.contained ? 1 : 0;
    rep.containment_rate = static_cast<double>(contained) / rep.scenarios.size();
    return rep;
}

std::string ValidationReport::to_json() const {
    json j;
    j["schema"] = "railsim.validation/1";
    j["containment_rate"] = containment_rate;
    for (const ScenarioValidation& v : scenarios)
        j["scenarios"].push_back({{"scenario", v.key.str()},
                                  {"trial", v.trial_id},
                                  {"experimental_tet_corr", v.experimental},
                                  {"band_min", v.band_min},
                                  {"band_max", v.band_max},
                                  {"sim_mean", v.sim_mean},
                                  {"contained", v.contained},
                                  {"relative_deviation", v.relative_deviation}});
    return j.dump(2);
}

std::string ValidationReport::table() const {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-22s %-6s %9s %9s %9s %9s %5s\n", "scenario", "trial",
                  "exp", "band_min", "band_max", "sim_mean", "ok");
    os << buf;
    for (const ScenarioValidation& v : scenarios) {
        std::snprintf(buf, sizeof buf, "%-22s %-6s %9.2f %9.2f %9.2f %9.2f %5s\n",
                      v.key.str().c_str(), v.trial_id.c_str(), v.experimental, v.band_min,
                      v.band_max, v.sim_mean, v.contained ? "yes" : "NO");
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "containment: %.0f%%\n", containment_rate * 100.0);
    os << buf;
    return os.str();
}

}  // namespace railsim
