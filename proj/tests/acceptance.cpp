// Acceptance suite: reruns the full basic Monte Carlo campaign and checks
// every headline result against the embedded experiment table. Prints one
// pass/fail line per criterion and exits non-zero when any fails.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "railsim/campaign.hpp"
#include "railsim/engine.hpp"
#include "railsim/metrics.hpp"
#include "railsim/population.hpp"
#include "railsim/refdata.hpp"
#include "railsim/rng.hpp"
#include "railsim/sensitivity.hpp"

using namespace railsim;

namespace {

int g_failures = 0;

void report(int idx, const char* name, bool ok, const std::string& detail) {
    std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", idx, name, detail.c_str());
    if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

std::vector<DesignPoint> experiment_points(const ReferenceData& ref) {
    std::vector<DesignPoint> pts;
    for (const ReferenceTrial& t : ref.trials)
        pts.push_back({t.width_m, t.het_pct, static_cast<double>(t.exit), t.tet_corr});
    return pts;
}

// Mean TET per (het, exit) family, keyed by width.
std::map<double, double> family_means(const std::vector<ScenarioResult>& results, double het,
                                      ExitType exit) {
    std::map<double, double> out;
    for (const ScenarioResult& r : results) {
        if (r.spec.het_pct != het || r.spec.exit != exit) continue;
        double m = 0;
        for (double t : r.tets) m += t;
        out[r.spec.width_m] = m / r.tets.size();
    }
    return out;
}

double linear_r2(const std::map<double, double>& pts) {
    double n = pts.size(), sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    double sxc = sxx - sx * sx / n;
    double syc = syy - sy * sy / n;
    double sxyc = sxy - sx * sy / n;
    return sxyc * sxyc / (sxc * syc);
}

}  // namespace

int main() {
    ReferenceData ref = load_reference();

    // --- 1: regression reproduction on the embedded experiment table ------
    {
        auto t0 = std::chrono::steady_clock::now();
        auto pts = experiment_points(ref);
        PolyModel m = fit_poly2(pts);

        PolyModel paper;
        paper.alpha = {80.82, -49.76, 0.17, -4.96, 15.29, 0.0, 4.32, -0.27, 0.26, -0.53};
        for (int t = 0; t < kNumTerms; ++t) paper.included[t] = t != 5;
        double mean = 0;
        for (const DesignPoint& p : pts) mean += p.tet;
        mean /= pts.size();
        double ss_res = 0, ss_tot = 0;
        for (const DesignPoint& p : pts) {
            double e = p.tet - paper.predict(p.w, p.h, p.e);
            ss_res += e * e;
            ss_tot += (p.tet - mean) * (p.tet - mean);
        }
        double paper_r2 = 1.0 - ss_res / ss_tot;
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        bool ok = std::abs(m.r2 - 0.914) <= 0.02 && !m.included[5] && m.alpha[1] < 0 &&
                  m.alpha[4] > 0 && m.alpha[8] > 0 && paper_r2 >= 0.89 && paper_r2 <= 0.94 &&
                  secs < 1.0;
        report(1, "regression reproduction", ok,
               fmt("R2=%.4f (target 0.914+-0.02), H2 dropped=%d, signs(a1<0,a4>0,a8>0)=%d%d%d, "
                   "published-coefficient R2=%.4f, %.3f s",
                   m.r2, !m.included[5], m.alpha[1] < 0, m.alpha[4] > 0, m.alpha[8] > 0, paper_r2,
                   secs));
    }

    // --- basic campaign shared by criteria 2-7 ----------------------------
    CampaignConfig cfg;
    cfg.apply_preset("basic");
    auto t0 = std::chrono::steady_clock::now();
    std::vector<ScenarioResult> results = run_campaign(cfg, 1);
    double campaign_secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    // --- 2: simulation band validation -------------------------------------
    {
        ValidationReport rep = validate_batch(batch_tets(results), ref);
        int contained = 0;
        for (const ScenarioValidation& v : rep.scenarios) contained += v.contained;
        bool ok = contained >= 24 && campaign_secs < 600.0;
        report(2, "simulation band validation", ok,
               fmt("%d/30 scenarios contained (need >=24), campaign %.0f s (< 600 s)", contained,
                   campaign_secs));
    }

    // --- 3: sensitivity ordering on the basic grid -------------------------
    std::vector<DesignPoint> sim_pts;
    for (const ScenarioResult& r : results)
        for (double t : r.tets)
            sim_pts.push_back(
                {r.spec.width_m, r.spec.het_pct, static_cast<double>(r.spec.exit), t});
    {
        SensitivityReport rep = run_sensitivity(sim_pts);
        double cw = rep.full.cop_input[0] * 100.0;
        double ch = rep.full.cop_input[1] * 100.0;
        double ce = rep.full.cop_input[2] * 100.0;
        double jump_h = 0.0, plat_h = 0.0;
        bool plat_h_excluded = false, stairs_small = false;
        for (const ExitSliceResult& s : rep.slices) {
            if (s.e_value == 2.0) jump_h = s.model.cop_input[1] * 100.0;
            if (s.e_value == 0.0) {
                plat_h = s.model.cop_input[1] * 100.0;
                plat_h_excluded = s.model.input_excluded[1];
            }
            if (s.e_value == 1.0)
                stairs_small = s.model.input_excluded[1] || s.model.cop_input[1] * 100.0 <= 5.0;
        }
        bool ok = cw > ce && ce > ch && cw >= 45.0 && cw <= 75.0 && rep.full.cop >= 0.85 &&
                  jump_h >= 25.0 && (plat_h_excluded || plat_h <= 5.0) && stairs_small;
        report(3, "sensitivity ordering", ok,
               fmt("CoP=%.1f%% CoP(W)=%.1f CoP(E)=%.1f CoP(H)=%.1f | jump CoP(H)=%.1f "
                   "platform CoP(H)=%s stairs ok=%d",
                   rep.full.cop * 100.0, cw, ce, ch, jump_h,
                   plat_h_excluded ? "excluded" : fmt("%.1f", plat_h).c_str(), stairs_small));
    }

    // --- 4: heterogeneity effect -------------------------------------------
    {
        auto diff_avg = [&](ExitType e) {
            auto hom = family_means(results, 0.0, e);
            auto het = family_means(results, 28.0, e);
            double acc = 0;
            int n = 0;
            for (auto& [w, v] : hom) {
                if (w > 1.1 + 1e-9) continue;
                acc += het.at(w) - v;
                ++n;
            }
            return acc / n;
        };
        double dj = diff_avg(ExitType::Jump);
        double dp = diff_avg(ExitType::Platform);
        double ds = diff_avg(ExitType::Stairs);
        bool ok = dj >= 8.0 && dp <= 3.0 && ds <= 3.0;
        report(4, "heterogeneity effect", ok,
               fmt("jump HET-HOM=%.1f s (need >=8), platform=%.1f, stairs=%.1f (need <=3)", dj,
                   dp, ds));
    }

    // --- 5: width monotonicity ---------------------------------------------
    {
        bool ok = true;
        std::string detail;
        for (double h : {0.0, 28.0})
            for (ExitType e : {ExitType::Platform, ExitType::Stairs, ExitType::Jump}) {
                auto fam = family_means(results, h, e);
                int inversions = 0;
                double worst = 0;
                double prev = 1e9;
                for (auto& [w, v] : fam) {
                    if (v > prev + 1e-9) {
                        ++inversions;
                        worst = std::max(worst, v - prev);
                    }
                    prev = v;
                }
                bool fam_ok = inversions == 0 || (inversions == 1 && worst <= 1.0);
                if (!fam_ok) ok = false;
                detail += fmt("H%g/%s:%d(%.2fs) ", h, to_string(e), inversions, worst);
            }
        report(5, "width monotonicity", ok, detail);
    }

    // --- 6: flow linearity and magnitude ------------------------------------
    {
        bool ok = true;
        std::string detail;
        double fmin = 1e9, fmax = 0;
        for (const ScenarioResult& r : results)
            for (double f : r.flows) {
                fmin = std::min(fmin, f);
                fmax = std::max(fmax, f);
            }
        for (double h : {0.0, 28.0})
            for (ExitType e : {ExitType::Platform, ExitType::Stairs, ExitType::Jump}) {
                std::map<double, double> flows;
                for (const ScenarioResult& r : results) {
                    if (r.spec.het_pct != h || r.spec.exit != e) continue;
                    double m = 0;
                    for (double f : r.flows) m += f;
                    flows[r.spec.width_m] = m / r.flows.size();
                }
                double r2 = linear_r2(flows);
                if (r2 < 0.8) ok = false;
                detail += fmt("H%g/%s:%.2f ", h, to_string(e), r2);
            }
        if (fmin < 0.6 || fmax > 1.8) ok = false;
        report(6, "flow linearity and magnitude", ok,
               fmt("family R2: %s| flows in [%.2f, %.2f] (need [0.6, 1.8])", detail.c_str(), fmin,
                   fmax));
    }

    // --- 7: always-on property suites ---------------------------------------
    {
        bool gate_ok = true, conserve_ok = true;
        for (const ScenarioResult& r : results) {
            if (r.spec.exit == ExitType::Jump && r.max_gate_occupancy > 2) gate_ok = false;
            if (!r.conservation_ok) conserve_ok = false;
        }

        RailcarGeometry g = build_railcar(0.9, ExitType::Jump);
        Crowd crowd = build_crowd(46, 28, default_seat_plan(), cfg.master_seed);
        bool replay_ok =
            egress_log_csv(run(g, crowd, 12345)) == egress_log_csv(run(g, crowd, 12345));

        bool tn_ok = true;
        {
            Rng rng(4242);
            for (int i = 0; i < 10000; ++i) {
                double v = sample_truncated_normal(0.94, 0.25, 0.64, 1.56, rng);
                if (v < 0.64 || v > 1.56) tn_ok = false;
            }
        }
        bool sfpe_ok = true;
        {
            double prev = 2.0;
            for (int i = 0; i <= 1000; ++i) {
                double f = sfpe_speed_fraction(i * 0.005);
                if (f > prev + 1e-12) sfpe_ok = false;
                prev = f;
            }
        }
        bool extrap_ok = true;
        {
            OccupantCurve c;
            for (int i = 1; i <= 42; ++i) c.times.push_back(2.0 + 1.1 * i);
            extrap_ok = std::abs(extrapolate_to(c, 46) - (2.0 + 1.1 * 46)) < 1e-9;
        }
        bool ortho_ok = true;
        {
            auto pts = experiment_points(ref);
            PolyModel m = fit_poly2(pts);
            for (int t = 0; t < kNumTerms; ++t) {
                if (!m.included[t]) continue;
                double dot = 0, cn = 0, rn = 0;
                for (const DesignPoint& p : pts) {
                    double col = term_value(t, p.w, p.h, p.e);
                    double res = p.tet - m.predict(p.w, p.h, p.e);
                    dot += col * res;
                    cn += col * col;
                    rn += res * res;
                }
                if (std::abs(dot) / std::sqrt(cn * rn + 1e-30) >= 1e-6) ortho_ok = false;
            }
        }
        bool sobol_ok = true;
        {
            PolyModel m = fit_poly2(sim_pts);
            InputLevels lv = levels_from(sim_pts);
            auto a = total_indices(m, lv);
            auto s = total_indices_sampled(m, lv, 100000, 909);
            for (int v = 0; v < 3; ++v)
                if (std::abs(a[v] - s[v]) >= 0.02) sobol_ok = false;
        }

        bool ok = gate_ok && conserve_ok && replay_ok && tn_ok && sfpe_ok && extrap_ok &&
                  ortho_ok && sobol_ok;
        report(7, "property suites", ok,
               fmt("gate<=2:%d conservation:%d replay:%d tn-bounds:%d sfpe-monotone:%d "
                   "extrapolation-exact:%d residual-orthogonal:%d sobol-agreement:%d",
                   gate_ok, conserve_ok, replay_ok, tn_ok, sfpe_ok, extrap_ok, ortho_ok,
                   sobol_ok));
    }

    if (g_failures == 0)
        std::printf("acceptance: all criteria passed\n");
    else
        std::printf("acceptance: %d criterion(s) FAILED\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
