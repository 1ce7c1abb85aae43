// Command-line front end: scenario simulation campaigns, metric extraction,
// sensitivity reports and validation against the embedded experiment table.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "railsim/campaign.hpp"
#include "railsim/engine.hpp"
#include "railsim/population.hpp"
#include "railsim/refdata.hpp"
#include "railsim/sensitivity.hpp"

namespace fs = std::filesystem;
using namespace railsim;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << text;
}

std::string default_out_root() {
    const char* env = std::getenv("RAILSIM_OUT");
    return env ? env : "out";
}

int cmd_simulate(const CampaignConfig& config_in) {
    CampaignConfig config = config_in;
    config.validate();
    fs::path out = config.out_dir.empty() ? fs::path(default_out_root()) : fs::path(config.out_dir);
    fs::create_directories(out);

    SeatPlan plan = default_seat_plan();
    std::map<double, Crowd> crowds;
    for (double h : config.hets) crowds.emplace(h, build_crowd(config.n, h, plan, config.master_seed));
    for (auto& [h, crowd] : crowds)
        write_file(out / ("crowd_H" + std::to_string(static_cast<int>(h)) + ".json"),
                   crowd.to_json());

    auto scenarios = make_scenarios(config);
    RunOptions opt;
    opt.dt = config.dt;
    long done = 0, skipped = 0;
    for (const ScenarioSpec& sp : scenarios) {
        RailcarGeometry geo = build_railcar(sp.width_m, sp.exit);
        write_file(out / sp.id / "geometry.json", geo.to_json());
        const Crowd& crowd = crowds.at(sp.het_pct);
        uint64_t sseed = scenario_seed(config.master_seed, sp.id);
        for (int r = 0; r < config.runs; ++r) {
            char name[32];
            std::snprintf(name, sizeof name, "run_%03d", r);
            fs::path csv = out / sp.id / (std::string(name) + ".csv");
            fs::path hdr = out / sp.id / (std::string(name) + ".json");
            if (fs::exists(csv) && fs::exists(hdr)) {  // resumable
                ++skipped;
                continue;
            }
            EgressLog log = run(geo, crowd, run_seed(sseed, r), opt);
            log.scenario_id = sp.id;
            write_file(csv, egress_log_csv(log));
            write_file(hdr, run_header_json(log, sp));
            ++done;
        }
        std::cout << sp.id << ": " << config.runs << " runs\n";
    }
    nlohmann::json manifest;
    manifest["schema"] = "railsim.manifest/1";
    manifest["version"] = kVersion;
    manifest["config"] = nlohmann::json::parse(config.to_json());
    manifest["manifest_hash"] = campaign_manifest_hash(config);
    manifest["runs_written"] = done;
    manifest["runs_skipped"] = skipped;
    write_file(out / "campaign.json", manifest.dump(2));
    std::cout << "campaign complete: " << done << " new runs, " << skipped
              << " reused, manifest " << (out / "campaign.json") << "\n";
    return 0;
}

int cmd_analyze(const fs::path& logs_dir, const fs::path& out_csv, const fs::path& curves_out) {
    if (!fs::is_directory(logs_dir)) throw ConfigError("not a directory: " + logs_dir.string());
    std::vector<MetricsRow> rows;
    std::vector<std::pair<std::string, OccupantCurve>> curves;
    int bad = 0;
    std::vector<fs::path> files;
    for (auto& entry : fs::recursive_directory_iterator(logs_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv" &&
            entry.path().filename().string().rfind("run_", 0) == 0)
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
        try {
            EgressLog log = parse_egress_log_csv(read_file(f));
            fs::path hdr = f;
            hdr.replace_extension(".json");
            std::string scenario = f.parent_path().filename().string();
            if (fs::exists(hdr)) {
                auto j = nlohmann::json::parse(read_file(hdr));
                scenario = j.value("scenario", scenario);
                log.run_seed = j.value("seed", uint64_t{0});
            }
            rows.push_back(metrics_row(log, scenario));
            curves.emplace_back(scenario, occupant_curve(log));
        } catch (const std::exception& e) {
            std::cerr << "warning: skipping " << f << ": " << e.what() << "\n";
            ++bad;
        }
    }
    if (rows.empty()) throw ConfigError("no egress logs under " + logs_dir.string());
    write_file(out_csv, metrics_csv(rows));
    if (!curves_out.empty()) write_file(curves_out, curves_csv(curves));
    std::cout << rows.size() << " runs -> " << out_csv << "\n";
    return bad == 0 ? 0 : 1;
}

std::vector<DesignPoint> design_points_from_metrics(const fs::path& metrics_path) {
    std::istringstream is(read_file(metrics_path));
    std::string line;
    if (!std::getline(is, line) || line.rfind("scenario,", 0) != 0)
        throw ConfigError("metrics CSV schema mismatch");
    std::vector<DesignPoint> pts;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string scenario, tok;
        std::getline(ls, scenario, ',');
        // scenario id format: W<w>_H<h>_<exit>
        double w = 0, h = 0;
        if (std::sscanf(scenario.c_str(), "W%lf_H%lf_", &w, &h) != 2)
            throw ConfigError("cannot parse scenario id: " + scenario);
        std::string exit_s = scenario.substr(scenario.rfind('_') + 1);
        std::getline(ls, tok, ',');  // seed
        std::getline(ls, tok, ',');  // n
        std::getline(ls, tok, ',');  // TET
        std::string t46, tcorr;
        std::getline(ls, t46, ',');
        std::getline(ls, tcorr, ',');
        DesignPoint p;
        p.w = w;
        p.h = h;
        p.e = static_cast<double>(exit_type_from_string(exit_s));
        p.tet = std::stod(tcorr);  // 46-equivalent corrected TET
        pts.push_back(p);
    }
    if (pts.empty()) throw ConfigError("metrics CSV has no rows");
    return pts;
}

int cmd_sensitivity(const std::string& mode, const fs::path& input, const fs::path& out_dir) {
    std::vector<DesignPoint> pts;
    if (mode == "experiment") {
        ReferenceData ref = load_reference();
        for (const ReferenceTrial& t : ref.trials)
            pts.push_back({t.width_m, t.het_pct, static_cast<double>(t.exit), t.tet_corr});
    } else if (!input.empty() && read_file(input).rfind("W_m", 0) == 0) {
        pts = read_design_csv(read_file(input));
    } else if (!input.empty()) {
        pts = design_points_from_metrics(input);
    } else {
        throw ConfigError("sensitivity needs --input or --mode experiment");
    }

    SensitivityReport rep = run_sensitivity(pts);
    write_file(out_dir / "sensitivity.json", rep.to_json());
    write_file(out_dir / "cop_table.csv", rep.cop_table_csv());
    write_file(out_dir / "coefficients.csv", rep.coefficients_csv());
    std::cout << rep.cop_table_csv();
    std::cout << "reports under " << out_dir << "\n";
    return 0;
}

int cmd_validate(const fs::path& logs_dir, const fs::path& out_json) {
    if (!fs::is_directory(logs_dir)) throw ConfigError("not a directory: " + logs_dir.string());
    std::map<ScenarioKey, std::vector<double>> batch;
    for (auto& entry : fs::recursive_directory_iterator(logs_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv" ||
            entry.path().filename().string().rfind("run_", 0) != 0)
            continue;
        fs::path hdr = entry.path();
        hdr.replace_extension(".json");
        if (!fs::exists(hdr)) continue;
        auto j = nlohmann::json::parse(read_file(hdr));
        ScenarioKey key{j.at("width_m").get<double>(), j.at("het_pct").get<double>(),
                        exit_type_from_string(j.at("exit"))};
        EgressLog log = parse_egress_log_csv(read_file(entry.path()));
        batch[key].push_back(occupant_curve(log).times.back());
    }
    ValidationReport rep = validate_batch(batch, load_reference());
    std::cout << rep.table();
    if (!out_json.empty()) write_file(out_json, rep.to_json());
    return 0;
}

int cmd_reference(const fs::path& out_csv) {
    ReferenceData ref = load_reference();
    if (out_csv.empty())
        std::cout << ref.trials_csv();
    else
        write_file(out_csv, ref.trials_csv());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"railcar evacuation simulator and sensitivity toolkit"};
    app.require_subcommand(1);

    CampaignConfig config;
    std::string preset, config_file;

    auto* sim = app.add_subcommand("simulate", "run a Monte Carlo evacuation campaign");
    sim->add_option("--widths", config.widths, "main exit widths, m");
    sim->add_option("--het", config.hets, "heterogeneity percentages");
    std::vector<std::string> exit_names;
    sim->add_option("--exits", exit_names, "exit types (platform stairs jump)");
    sim->add_option("--runs", config.runs, "runs per scenario");
    sim->add_option("--n", config.n, "agents per run");
    sim->add_option("--seed", config.master_seed, "master seed");
    sim->add_option("--dt", config.dt, "time step, s");
    sim->add_option("--out", config.out_dir, "output directory");
    sim->add_option("--preset", preset, "basic | fine | experiment");
    sim->add_option("--config", config_file, "JSON config mirroring the flags");

    fs::path logs_dir, out_path, curves_path, input_path;
    auto* ana = app.add_subcommand("analyze", "extract metrics from egress logs");
    ana->add_option("--logs", logs_dir, "directory of run_*.csv logs")->required();
    ana->add_option("--out", out_path, "metrics CSV path");
    ana->add_option("--curves", curves_path, "occupant curves CSV path");

    std::string mode = "basic";
    fs::path sens_out = "sensitivity_out";
    auto* sens = app.add_subcommand("sensitivity", "polynomial meta-model and CoP report");
    sens->add_option("--mode", mode, "experiment | basic | fine");
    sens->add_option("--input", input_path, "metrics CSV or design CSV (W_m,H_pct,E_code,TET_s)");
    sens->add_option("--out", sens_out, "report directory");

    fs::path val_json;
    auto* val = app.add_subcommand("validate", "compare a campaign to the experiment table");
    val->add_option("--logs", logs_dir, "directory of run_*.csv logs")->required();
    val->add_option("--out", val_json, "validation report JSON");

    fs::path ref_out;
    auto* refc = app.add_subcommand("reference", "dump the embedded experiment fixture");
    refc->add_option("--out", ref_out, "CSV path (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            if (!config_file.empty()) config = CampaignConfig::from_json(read_file(config_file));
            if (!preset.empty()) config.apply_preset(preset);
            if (!exit_names.empty()) {
                config.exits.clear();
                for (const std::string& e : exit_names)
                    config.exits.push_back(exit_type_from_string(e));
            }
            return cmd_simulate(config);
        }
        if (ana->parsed())
            return cmd_analyze(logs_dir, out_path.empty() ? fs::path("metrics.csv") : out_path,
                               curves_path);
        if (sens->parsed()) return cmd_sensitivity(mode, input_path, sens_out);
        if (val->parsed()) return cmd_validate(logs_dir, val_json);
        if (refc->parsed()) return cmd_reference(ref_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
