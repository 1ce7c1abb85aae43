#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace railsim {

// One (W, H, E) design point with its total-evacuation-time response.
struct DesignPoint {
    double w = 0.0;    // main exit width, m
    double h = 0.0;    // heterogeneity, percent
    double e = 0.0;    // exit type code: 0 platform, 1 stairs, 2 jump
    double tet = 0.0;  // s
};

// Term order of the degree-2 model:
// 1, W, H, E, W^2, H^2, E^2, WH, HE, WE.
constexpr int kNumTerms = 10;
double term_value(int term, double w, double h, double e);
const char* term_name(int term);

// Discrete uniform input distribution over the design levels present.
struct InputLevels {
    std::vector<double> w, h, e;
};
InputLevels levels_from(const std::vector<DesignPoint>& points);

struct PolyModel {
    std::array<double, 10> alpha{};     // 0 where dropped
    std::array<bool, 10> included{};    // collinear columns carry false, never a value
    bool with_e_terms = true;           // false for per-exit slices
    double r2 = 0.0;
    double cop = 0.0;                   // leave-one-out, clamped to [0, 1]
    std::array<double, 3> total_index{};    // S_T for W, H, E
    std::array<double, 3> cop_input{};      // CoP(X_i) = CoP * S_T(X_i)
    std::array<bool, 3> input_excluded{};   // significance filter verdict

    double predict(double w, double h, double e) const;
};

// Ordinary least squares on the degree-2 term set; rank-deficient columns
// are detected in canonical order and dropped before solving.
PolyModel fit_poly2(const std::vector<DesignPoint>& points, bool with_e_terms = true);

// Leave-one-out prediction R^2 (1 - PRESS/SStot) for the given term subset.
double cop_crossval(const std::vector<DesignPoint>& points, const std::array<bool, 10>& terms,
                    bool with_e_terms = true);

// Total-effect Sobol indices of the fitted polynomial under independent
// discrete-uniform inputs, computed exactly by grid enumeration.
std::array<double, 3> total_indices(const PolyModel& model, const InputLevels& levels);

// Pick/freeze (Jansen) sampling estimator; cross-checks the analytic route.
std::array<double, 3> total_indices_sampled(const PolyModel& model, const InputLevels& levels,
                                            int n_samples, uint64_t seed);

struct ExitSliceResult {
    double e_value = 0.0;
    PolyModel model;
};

struct SensitivityReport {
    PolyModel full;
    std::vector<ExitSliceResult> slices;

    std::string to_json() const;
    std::string cop_table_csv() const;
    std::string coefficients_csv() const;
};

// Full-grid fit plus the three per-exit-type analyses, with the variable
// significance filter (a variable is excluded when keeping it improves
// leave-one-out CoP by less than one percentage point).
PolyModel analyze(const std::vector<DesignPoint>& points, bool with_e_terms = true);
std::vector<ExitSliceResult> per_exit_analysis(const std::vector<DesignPoint>& points);
SensitivityReport run_sensitivity(const std::vector<DesignPoint>& points);

std::vector<DesignPoint> read_design_csv(const std::string& text);
std::string write_design_csv(const std::vector<DesignPoint>& points);

}  // namespace railsim
