#include "railsim/campaign.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "railsim/population.hpp"

namespace railsim {

using nlohmann::json;

void CampaignConfig::apply_preset(const std::string& name) {
    if (name == "basic") {
        widths = {0.65, 0.75, 0.90, 1.10, 1.34};
        hets = {0.0, 28.0};
        exits = {ExitType::Platform, ExitType::Stairs, ExitType::Jump};
        runs = 30;
        n = 46;
    } else if (name == "fine") {
        widths = {0.65, 0.75, 0.85, 0.90, 0.95, 1.00, 1.10, 1.20, 1.34};
        hets = {0.0, 15.0, 28.0, 56.0};
        exits = {ExitType::Platform, ExitType::Stairs, ExitType::Jump};
        runs = 30;
        n = 46;
    } else if (name == "experiment") {
        // The 30 experimental scenarios; group sizes follow the trials.
        widths = {0.65, 0.75, 0.90, 1.10, 1.34};
        hets = {0.0, 28.0};
        exits = {ExitType::Platform, ExitType::Stairs, ExitType::Jump};
        runs = 30;
        n = 46;
    } else {
        throw ConfigError("unknown preset: " + name);
    }
}

void CampaignConfig::validate() const {
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (widths.empty() || hets.empty() || exits.empty())
        throw ConfigError("empty scenario grid");
    for (double w : widths)
        if (w <= 0.0) throw ConfigError("widths must be positive");
    for (double h : hets)
        if (h < 0.0 || h > 100.0) throw ConfigError("heterogeneity must be in [0, 100]");
    if (!(dt > 0.0 && dt <= 0.1)) throw ConfigError("dt must be in (0, 0.1]");
}

std::string CampaignConfig::to_json() const {
    json j;
    j["schema"] = "railsim.campaign/1";
    j["widths"] = widths;
    j["hets"] = hets;
    for (ExitType e : exits) j["exits"].push_back(to_string(e));
    j["runs"] = runs;
    j["n"] = n;
    j["master_seed"] = master_seed;
    j["dt"] = dt;
    j["out_dir"] = out_dir;
    return j.dump(2);
}

CampaignConfig CampaignConfig::from_json(const std::string& text) {
    json j = json::parse(text);
    CampaignConfig c;
    if (j.contains("widths")) c.widths = j["widths"].get<std::vector<double>>();
    if (j.contains("hets")) c.hets = j["hets"].get<std::vector<double>>();
    if (j.contains("exits")) {
        c.exits.clear();
        for (auto& e : j["exits"]) c.exits.push_back(exit_type_from_string(e));
    }
    c.runs = j.value("runs", c.runs);
    c.n = j.value("n", c.n);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.dt = j.value("dt", c.dt);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.validate();
    return c;
}

std::vector<ScenarioSpec> make_scenarios(const CampaignConfig& config) {
    std::vector<ScenarioSpec> out;
    for (double w : config.widths)
        for (double h : config.hets)
            for (ExitType e : config.exits) {
                ScenarioSpec s;
                s.width_m = w;
                s.het_pct = h;
                s.exit = e;
                s.n = config.n;
                s.id = ScenarioKey{w, h, e}.str();
                out.push_back(s);
            }
    return out;
}

uint64_t scenario_seed(uint64_t master_seed, const std::string& scenario_id) {
    return mix_seed(master_seed, fnv1a64(scenario_id));
}

uint64_t run_seed(uint64_t scenario_seed_value, int run_index) {
    return mix_seed(scenario_seed_value, 0x9e3779b97f4a7c15ULL + run_index);
}

std::vector<ScenarioResult> run_campaign(const CampaignConfig& config, int threads,
                                         const ProgressFn& progress) {
    config.validate();
    std::vector<ScenarioSpec> scenarios = make_scenarios(config);

    // Crowds are fixed once per campaign and shared across scenarios.
    SeatPlan plan = default_seat_plan();
    std::map<double, Crowd> crowds;
    for (double h : config.hets) crowds.emplace(h, build_crowd(config.n, h, plan, config.master_seed));
    std::map<std::pair<double, int>, RailcarGeometry> geometries;
    for (double w : config.widths)
        for (ExitType e : config.exits)
            geometries.emplace(std::make_pair(w, static_cast<int>(e)),
                               build_railcar(w, e));

    std::vector<ScenarioResult> results(scenarios.size());
    for (size_t i = 0; i < scenarios.size(); ++i) {
        results[i].spec = scenarios[i];
        results[i].tets.resize(config.runs);
        results[i].flows.resize(config.runs);
    }

    const long total = static_cast<long>(scenarios.size()) * config.runs;
    std::atomic<long> cursor{0};
    std::mutex progress_mutex;
    auto worker = [&]() {
        RunOptions opt;
        opt.dt = config.dt;
        for (;;) {
            long idx = cursor.fetch_add(1);
            if (idx >= total) break;
            size_t si = idx / config.runs;
            int ri = static_cast<int>(idx % config.runs);
            const ScenarioSpec& sp = scenarios[si];
            const RailcarGeometry& geo =
                geometries.at({sp.width_m, static_cast<int>(sp.exit)});
            const Crowd& crowd = crowds.at(sp.het_pct);
            uint64_t seed = run_seed(scenario_seed(config.master_seed, sp.id), ri);
            EgressLog log = run(geo, crowd, seed, opt);
            OccupantCurve curve = occupant_curve(log);
            results[si].tets[ri] = tet(curve);
            results[si].flows[ri] = mean_exit_flow(curve);
            results[si].max_gate_occupancy =
                std::max(results[si].max_gate_occupancy, log.max_gate_occupancy);
            if (!log.conservation_ok) results[si].conservation_ok = false;
            if (progress) {
                std::lock_guard<std::mutex> lk(progress_mutex);
                progress(sp.id, ri);
            }
        }
    };

    int nthreads = std::max(1, threads);
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return results;
}

std::map<ScenarioKey, std::vector<double>> batch_tets(const std::vector<ScenarioResult>& results) {
    std::map<ScenarioKey, std::vector<double>> out;
    for (const ScenarioResult& r : results) out[r.spec.key()] = r.tets;
    return out;
}

std::string egress_log_csv(const EgressLog& log) {
    std::ostringstream os;
    os << "agent_id,type,egress_time_s\n";
    char buf[96];
    for (const EgressEvent& e : log.events) {
        std::snprintf(buf, sizeof buf, "%d,%s,%.6f\n", e.agent_id, to_string(e.type), e.time_s);
        os << buf;
    }
    return os.str();
}

std::string run_header_json(const EgressLog& log, const ScenarioSpec& spec) {
    json j;
    j["schema"] = "railsim.run/1";
    j["scenario"] = spec.id;
    j["width_m"] = spec.width_m;
    j["het_pct"] = spec.het_pct;
    j["exit"] = to_string(spec.exit);
    j["n"] = log.n_agents;
    j["seed"] = log.run_seed;
    j["dt"] = log.dt;
    j["geometry_hash"] = log.geometry_hash;
    j["crowd_hash"] = log.crowd_hash;
    j["tuning_hash"] = log.tuning_hash;
    j["wall_clock_s"] = log.wall_clock_s;
    j["max_gate_occupancy"] = log.max_gate_occupancy;
    j["conservation_ok"] = log.conservation_ok;
    return j.dump(2);
}

EgressLog parse_egress_log_csv(const std::string& text) {
    EgressLog log;
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "agent_id,type,egress_time_s")
        throw ConfigError("bad egress log header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string id_s, type_s, t_s;
        if (!std::getline(ls, id_s, ',') || !std::getline(ls, type_s, ',') ||
            !std::getline(ls, t_s, ','))
            throw ConfigError("bad egress log row: " + line);
        EgressEvent e;
        e.agent_id = std::stoi(id_s);
        e.type = agent_type_from_string(type_s);
        e.time_s = std::stod(t_s);
        log.events.push_back(e);
    }
    if (log.events.empty()) throw ConfigError("egress log has no events");
    log.n_agents = static_cast<int>(log.events.size());
    return log;
}

MetricsRow metrics_row(const EgressLog& log, const std::string& scenario_id, int target_n) {
    OccupantCurve c = occupant_curve(log);
    TetRecord r = tet_record(c, target_n, 0.0);
    MetricsRow row;
    row.scenario_id = scenario_id;
    row.seed = log.run_seed;
    row.n = c.n();
    row.tet = r.tet;
    row.tet_46 = r.tet_46;
    row.tet_corr = r.tet_corr;
    row.flow = mean_exit_flow(c);
    return row;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream os;
    os << "scenario,seed,n,TET_s,TET46_s,TETcorr_s,flow_pps\n";
    char buf[192];
    for (const MetricsRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%llu,%d,%.4f,%.4f,%.4f,%.4f\n",
                      r.scenario_id.c_str(), static_cast<unsigned long long>(r.seed), r.n, r.tet,
                      r.tet_46, r.tet_corr, r.flow);
        os << buf;
    }
    return os.str();
}

std::string curves_csv(const std::vector<std::pair<std::string, OccupantCurve>>& curves) {
    std::ostringstream os;
    os << "scenario,run,i,t_s\n";
    char buf[128];
    int run_idx = 0;
    std::string last;
    for (const auto& [scenario, curve] : curves) {
        if (scenario != last) {
            run_idx = 0;
            last = scenario;
        }
        for (int i = 0; i < curve.n(); ++i) {
            std::snprintf(buf, sizeof buf, "%s,%d,%d,%.6f\n", scenario.c_str(), run_idx, i + 1,
                          curve.times[i]);
            os << buf;
        }
        ++run_idx;
    }
    return os.str();
}

uint64_t campaign_manifest_hash(const CampaignConfig& config) {
    SeatPlan plan = default_seat_plan();
    uint64_t h = fnv1a64(config.to_json());
    h = mix_seed(h, fnv1a64(kVersion));
    h = mix_seed(h, TuningConfig{}.hash());
    for (double het : config.hets)
        h = mix_seed(h, build_crowd(config.n, het, plan, config.master_seed).fixture_hash());
    for (double w : config.widths)
        for (ExitType e : config.exits) h = mix_seed(h, build_railcar(w, e).fixture_hash());
    return h;
}

}  // namespace railsim
