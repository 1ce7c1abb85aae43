#include "railsim/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"
#include "railsim/geometry.hpp"  // ConfigError
#include "railsim/rng.hpp"

namespace railsim {

using nlohmann::json;

double term_value(int term, double w, double h, double e) {
    switch (term) {
        case 0: return 1.0;
        case 1: return w;
        case 2: return h;
        case 3: return e;
        case 4: return w * w;
        case 5: return h * h;
        case 6: return e * e;
        case 7: return w * h;
        case 8: return h * e;
        case 9: return w * e;
    }
    return 0.0;
}

const char* term_name(int term) {
    static const char* kNames[] = {"1", "W", "H", "E", "W2", "H2", "E2", "WH", "HE", "WE"};
    return kNames[term];
}

namespace {

// Terms that reference a given variable (0 = W, 1 = H, 2 = E).
bool term_uses(int term, int var) {
    switch (var) {
        case 0: return term == 1 || term == 4 || term == 7 || term == 9;
        case 1: return term == 2 || term == 5 || term == 7 || term == 8;
        case 2: return term == 3 || term == 6 || term == 8 || term == 9;
    }
    return false;
}

std::array<bool, 10> candidate_terms(bool with_e_terms) {
    std::array<bool, 10> t{};
    for (int k = 0; k < kNumTerms; ++k)
        t[k] = with_e_terms || !term_uses(k, 2);
    return t;
}

struct Ols {
    std::array<double, 10> alpha{};
    std::array<bool, 10> included{};
    double r2 = 0.0;
    double cop = 0.0;
    double ss_tot = 0.0;
};

// Modified Gram-Schmidt in canonical term order: lower-order terms win when
// columns are collinear, which is what leaves alpha_5 blank on two-level H.
Ols solve_ols(const std::vector<DesignPoint>& pts, const std::array<bool, 10>& terms) {
    const int n = static_cast<int>(pts.size());
    std::vector<int> cand;
    for (int t = 0; t < kNumTerms; ++t)
        if (terms[t]) cand.push_back(t);
    if (n < static_cast<int>(cand.size()) + 2)
        throw ConfigError("too few design points for the requested term set");

    double mean_y = 0;
    for (const DesignPoint& p : pts) mean_y += p.tet;
    mean_y /= n;
    double ss_tot = 0;
    for (const DesignPoint& p : pts) ss_tot += (p.tet - mean_y) * (p.tet - mean_y);
    if (ss_tot < 1e-12) throw ConfigError("degenerate model: response is constant");

    std::vector<std::vector<double>> q;      // orthonormal retained columns
    std::vector<std::vector<double>> r_rows; // R entries per retained column
    std::vector<int> kept;
    for (int t : cand) {
        std::vector<double> col(n);
        double norm0 = 0;
        for (int i = 0; i < n; ++i) {
            col[i] = term_value(t, pts[i].w, pts[i].h, pts[i].e);
            norm0 += col[i] * col[i];
        }
        norm0 = std::sqrt(norm0);
        std::vector<double> rcol(kept.size(), 0.0);
        for (size_t k = 0; k < q.size(); ++k) {
            double dot = 0;
            for (int i = 0; i < n; ++i) dot += q[k][i] * col[i];
            rcol[k] = dot;
            for (int i = 0; i < n; ++i) col[i] -= dot * q[k][i];
        }
        double res = 0;
        for (int i = 0; i < n; ++i) res += col[i] * col[i];
        res = std::sqrt(res);
        if (res < 1e-7 * std::max(1.0, norm0)) continue;  // collinear: dropped
        for (int i = 0; i < n; ++i) col[i] /= res;
        q.push_back(std::move(col));
        rcol.push_back(res);
        r_rows.push_back(std::move(rcol));
        kept.push_back(t);
    }

    const int k = static_cast<int>(kept.size());
    std::vector<double> qty(k, 0.0);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < n; ++i) qty[j] += q[j][i] * pts[i].tet;

    // Back substitution on the implicit upper-triangular R.
    std::vector<double> beta(k, 0.0);
    for (int j = k - 1; j >= 0; --j) {
        double v = qty[j];
        for (int m = j + 1; m < k; ++m) v -= r_rows[m][j] * beta[m];
        beta[j] = v / r_rows[j][j];
    }

    Ols out;
    out.ss_tot = ss_tot;
    for (int j = 0; j < k; ++j) {
        out.alpha[kept[j]] = beta[j];
        out.included[kept[j]] = true;
    }

    double press = 0.0, ss_res = 0.0;
    for (int i = 0; i < n; ++i) {
        double yhat = 0;
        for (int j = 0; j < k; ++j)
            yhat += out.alpha[kept[j]] * term_value(kept[j], pts[i].w, pts[i].h, pts[i].e);
        double e = pts[i].tet - yhat;
        ss_res += e * e;
        double hii = 0;
        for (int j = 0; j < k; ++j) hii += q[j][i] * q[j][i];
        double denom = std::max(1e-8, 1.0 - hii);
        press += (e / denom) * (e / denom);
    }
    out.r2 = 1.0 - ss_res / ss_tot;
    out.cop = std::clamp(1.0 - press / ss_tot, 0.0, 1.0);
    return out;
}

}  // namespace

InputLevels levels_from(const std::vector<DesignPoint>& points) {
    std::set<double> w, h, e;
    for (const DesignPoint& p : points) {
        w.insert(p.w);
        h.insert(p.h);
        e.insert(p.e);
    }
    return {{w.begin(), w.end()}, {h.begin(), h.end()}, {e.begin(), e.end()}};
}

double PolyModel::predict(double w, double h, double e) const {
    double y = 0;
    for (int t = 0; t < kNumTerms; ++t)
        if (included[t]) y += alpha[t] * term_value(t, w, h, e);
    return y;
}

PolyModel fit_poly2(const std::vector<DesignPoint>& points, bool with_e_terms) {
    Ols ols = solve_ols(points, candidate_terms(with_e_terms));
    PolyModel m;
    m.alpha = ols.alpha;
    m.included = ols.included;
    m.with_e_terms = with_e_terms;
    m.r2 = ols.r2;
    m.cop = ols.cop;
    return m;
}

double cop_crossval(const std::vector<DesignPoint>& points, const std::array<bool, 10>& terms,
                    bool with_e_terms) {
    std::array<bool, 10> t = terms;
    if (!with_e_terms)
        for (int k = 0; k < kNumTerms; ++k)
            if (term_uses(k, 2)) t[k] = false;
    return solve_ols(points, t).cop;
}

std::array<double, 3> total_indices(const PolyModel& model, const InputLevels& levels) {
    const std::vector<double>* lv[3] = {&levels.w, &levels.h, &levels.e};
    for (int v = 0; v < 3; ++v)
        if (lv[v]->empty()) throw ConfigError("empty input level set");

    // Full grid enumeration; the model has no three-way terms, so the ANOVA
    // decomposition is exactly mains plus pairwise interactions.
    std::vector<std::array<double, 3>> grid;
    for (double w : levels.w)
        for (double h : levels.h)
            for (double e : levels.e) grid.push_back({w, h, e});
    std::vector<double> f(grid.size());
    double mean = 0;
    for (size_t i = 0; i < grid.size(); ++i) {
        f[i] = model.predict(grid[i][0], grid[i][1], grid[i][2]);
        mean += f[i];
    }
    mean /= f.size();
    double var = 0;
    for (double y : f) var += (y - mean) * (y - mean);
    var /= f.size();
    if (var < 1e-14) throw ConfigError("zero model variance");

    auto cond_var = [&](std::vector<int> vars) {
        // Var of E[f | fixed levels of vars].
        std::vector<size_t> dims;
        for (int v : vars) dims.push_back(lv[v]->size());
        size_t cells = 1;
        for (size_t d : dims) cells *= d;
        std::vector<double> sum(cells, 0.0);
        std::vector<int> cnt(cells, 0);
        for (size_t i = 0; i < grid.size(); ++i) {
            size_t idx = 0;
            for (size_t k = 0; k < vars.size(); ++k) {
                const std::vector<double>& l = *lv[vars[k]];
                size_t pos = std::find(l.begin(), l.end(), grid[i][vars[k]]) - l.begin();
                idx = idx * dims[k] + pos;
            }
            sum[idx] += f[i];
            cnt[idx] += 1;
        }
        double m2 = 0;
        for (size_t c = 0; c < cells; ++c) {
            double cm = sum[c] / cnt[c];
            m2 += (cm - mean) * (cm - mean);
        }
        return m2 / cells;
    };

    double vm[3], vp[3][3];
    for (int v = 0; v < 3; ++v) vm[v] = lv[v]->size() > 1 ? cond_var({v}) : 0.0;
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b)
            vp[a][b] = (lv[a]->size() > 1 && lv[b]->size() > 1)
                           ? std::max(0.0, cond_var({a, b}) - vm[a] - vm[b])
                           : 0.0;

    std::array<double, 3> st{};
    st[0] = (vm[0] + vp[0][1] + vp[0][2]) / var;
    st[1] = (vm[1] + vp[0][1] + vp[1][2]) / var;
    st[2] = (vm[2] + vp[0][2] + vp[1][2]) / var;
    return st;
}

std::array<double, 3> total_indices_sampled(const PolyModel& model, const InputLevels& levels,
                                            int n_samples, uint64_t seed) {
    Rng rng(seed);
    const std::vector<double>* lv[3] = {&levels.w, &levels.h, &levels.e};
    auto draw = [&](int v) {
        const std::vector<double>& l = *lv[v];
        return l[std::min<size_t>(l.size() - 1, static_cast<size_t>(rng.uniform() * l.size()))];
    };
    std::vector<std::array<double, 3>> A(n_samples), B(n_samples);
    for (int i = 0; i < n_samples; ++i)
        for (int v = 0; v < 3; ++v) {
            A[i][v] = draw(v);
            B[i][v] = draw(v);
        }
    std::vector<double> fA(n_samples);
    double mean = 0;
    for (int i = 0; i < n_samples; ++i) {
        fA[i] = model.predict(A[i][0], A[i][1], A[i][2]);
        mean += fA[i];
    }
    mean /= n_samples;
    double var = 0;
    for (double y : fA) var += (y - mean) * (y - mean);
    var /= n_samples;

    std::array<double, 3> st{};
    for (int v = 0; v < 3; ++v) {
        double acc = 0;
        for (int i = 0; i < n_samples; ++i) {
            std::array<double, 3> ab = A[i];
            ab[v] = B[i][v];  // Jansen total-effect estimator
            double d = fA[i] - model.predict(ab[0], ab[1], ab[2]);
            acc += d * d;
        }
        st[v] = acc / (2.0 * n_samples * var);
    }
    return st;
}

PolyModel analyze(const std::vector<DesignPoint>& points, bool with_e_terms) {
    InputLevels levels = levels_from(points);
    PolyModel full = fit_poly2(points, with_e_terms);

    // Variable significance: keeping a variable must buy at least one
    // percentage point of leave-one-out CoP.
    std::array<bool, 3> excluded{};
    int n_vars_active = 0;
    for (int v = 0; v < 3; ++v) {
        const std::vector<double>& l = v == 0 ? levels.w : (v == 1 ? levels.h : levels.e);
        bool varies = l.size() > 1 && (with_e_terms || v != 2);
        if (!varies) {
            excluded[v] = true;
            continue;
        }
        ++n_vars_active;
        std::array<bool, 10> without = candidate_terms(with_e_terms);
        for (int t = 0; t < kNumTerms; ++t)
            if (term_uses(t, v)) without[t] = false;
        double cop_without;
        try {
            cop_without = solve_ols(points, without).cop;
        } catch (const ConfigError&) {
            cop_without = 0.0;  // cannot even fit without it
        }
        if (full.cop - cop_without < 0.01) excluded[v] = true;
    }
    // Keep at least the strongest variable.
    if (n_vars_active > 0 && excluded[0] && excluded[1] && excluded[2]) excluded[0] = false;

    std::array<bool, 10> final_terms = candidate_terms(with_e_terms);
    for (int t = 1; t < kNumTerms; ++t)
        for (int v = 0; v < 3; ++v)
            if (excluded[v] && term_uses(t, v)) final_terms[t] = false;

    Ols ols = solve_ols(points, final_terms);
    PolyModel m;
    m.alpha = ols.alpha;
    m.included = ols.included;
    m.with_e_terms = with_e_terms;
    m.r2 = ols.r2;
    m.cop = ols.cop;
    m.input_excluded = excluded;
    m.total_index = total_indices(m, levels);
    for (int v = 0; v < 3; ++v)
        m.cop_input[v] = excluded[v] ? 0.0 : m.cop * m.total_index[v];
    return m;
}

std::vector<ExitSliceResult> per_exit_analysis(const std::vector<DesignPoint>& points) {
    InputLevels levels = levels_from(points);
    std::vector<ExitSliceResult> out;
    for (double ev : levels.e) {
        std::vector<DesignPoint> slice;
        for (const DesignPoint& p : points)
            if (p.e == ev) slice.push_back(p);
        ExitSliceResult r;
        r.e_value = ev;
        r.model = analyze(slice, /*with_e_terms=*/false);
        out.push_back(std::move(r));
    }
    return out;
}

SensitivityReport run_sensitivity(const std::vector<DesignPoint>& points) {
    SensitivityReport rep;
    rep.full = analyze(points, true);
    rep.slices = per_exit_analysis(points);
    return rep;
}

namespace {

json model_to_json(const PolyModel& m) {
    json j;
    for (int t = 0; t < kNumTerms; ++t) {
        if (!m.with_e_terms && term_uses(t, 2)) continue;
        j["terms"][term_name(t)] = m.included[t] ? json(m.alpha[t]) : json(nullptr);
    }
    j["r2"] = m.r2;
    j["cop"] = m.cop;
    const char* vars[3] = {"W", "H", "E"};
    for (int v = 0; v < 3; ++v) {
        if (!m.with_e_terms && v == 2) continue;
        j["inputs"][vars[v]] = {{"excluded", m.input_excluded[v]},
                                {"total_index", m.total_index[v]},
                                {"cop", m.cop_input[v]}};
    }
    return j;
}

}  // namespace

std::string SensitivityReport::to_json() const {
    json j;
    j["schema"] = "railsim.sensitivity/1";
    j["full"] = model_to_json(full);
    for (const ExitSliceResult& s : slices) {
        json js = model_to_json(s.model);
        js["e"] = s.e_value;
        j["per_exit"].push_back(js);
    }
    return j.dump(2);
}

std::string SensitivityReport::cop_table_csv() const {
    std::ostringstream os;
    os << "slice,cop_pct,cop_w_pct,cop_h_pct,cop_e_pct\n";
    auto row = [&os](const std::string& name, const PolyModel& m, bool with_e) {
        os << name << ',' << m.cop * 100.0 << ',';
        os << (m.input_excluded[0] ? "excluded" : std::to_string(m.cop_input[0] * 100.0)) << ',';
        os << (m.input_excluded[1] ? "excluded" : std::to_string(m.cop_input[1] * 100.0)) << ',';
        if (with_e)
            os << (m.input_excluded[2] ? "excluded" : std::to_string(m.cop_input[2] * 100.0));
        os << '\n';
    };
    row("all", full, true);
    for (const ExitSliceResult& s : slices) {
        std::string name = s.e_value == 0 ? "platform" : (s.e_value == 1 ? "stairs" : "jump");
        row(name + "_e" + std::to_string(static_cast<int>(s.e_value)), s.model, false);
    }
    return os.str();
}

std::string SensitivityReport::coefficients_csv() const {
    std::ostringstream os;
    os << "term,coefficient\n";
    for (int t = 0; t < kNumTerms; ++t) {
        os << term_name(t) << ',';
        if (full.included[t]) os << full.alpha[t];
        os << '\n';
    }
    os << "R2," << full.r2 << '\n';
    return os.str();
}

std::vector<DesignPoint> read_design_csv(const std::string& text) {
    std::vector<DesignPoint> pts;
    std::istringstream is(text);
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (header) {
            if (line.find("W_m") == std::string::npos || line.find("H_pct") == std::string::npos ||
                line.find("E_code") == std::string::npos || line.find("TET_s") == std::string::npos)
                throw ConfigError("design CSV header must be W_m,H_pct,E_code,TET_s");
            header = false;
            continue;
        }
        DesignPoint p;
        char comma;
        std::istringstream ls(line);
        if (!(ls >> p.w >> comma >> p.h >> comma >> p.e >> comma >> p.tet))
            throw ConfigError("bad design CSV row: " + line);
        pts.push_back(p);
    }
    if (pts.empty()) throw ConfigError("design CSV has no data rows");
    return pts;
}

std::string write_design_csv(const std::vector<DesignPoint>& points) {
    std::ostringstream os;
    os << "W_m,H_pct,E_code,TET_s\n";
    for (const DesignPoint& p : points)
        os << p.w << ',' << p.h << ',' << p.e << ',' << p.tet << '\n';
    return os.str();
}

}  // namespace railsim
