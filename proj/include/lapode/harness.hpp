#pragma once

// Convergence studies, run reports and their CSV / JSON serializations.

#include "lapode/integrate.hpp"
#include "lapode/models.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lapode {

using TrajectoryD = Trajectory<double>;

/// 2-norm of (y - ref) over the selected components (all if empty),
/// divided by ||ref|| when `relative` and ||ref|| > 0.
double error_norm(const VectorD& y, const VectorD& ref, const std::vector<Index>& components, bool relative);

struct ConvergenceRow {
    double h = 0.0;
    long steps = 0;
    double error = 0.0;
    double min_component = 0.0;
    double max_mass_drift = 0.0;
    std::vector<double> invariant_drifts;  // max |w^T y_n - w^T y_0| per w
    bool positivity_violated = false;
    bool diverged = false;
    long combination_flags = 0;
    bool used_in_fit = false;
    std::string failure;  // solver error message, if the run aborted
};

struct ConvergenceTable {
    std::string model;
    MethodId method = MethodId::EM1;
    ExpMode mode = ExpMode::Accurate;
    MethodId reference_method = MethodId::EM3;
    double reference_h = 0.0;
    double reference_floor = 0.0;
    std::vector<ConvergenceRow> rows;  // decreasing h
    std::optional<double> fitted_order;
};

struct ConvergenceSpec {
    std::vector<MethodId> methods;
    double h0 = 0.0;
    int levels = 6;  // h0 * 2^-j, j = 0..levels-1
    std::vector<Index> components;
    bool relative = false;
    ExpMode mode = ExpMode::Accurate;
    MethodId reference_method = MethodId::EM3;
    std::optional<double> reference_h;  // default h_min / 64
    bool check_structure = true;
    bool strict_positivity = false;
    double floor_factor = 4.0;
};

/// Least-squares slope of log(error) against log(h) over rows whose error
/// is finite and above floor_factor * floor; marks the rows used. Needs two
/// usable rows.
std::optional<double> fit_order(std::vector<ConvergenceRow>& rows, double floor, double floor_factor = 4.0);

struct ReferenceSolution {
    VectorD y;
    double h = 0.0;
    double floor = 0.0;  // max(||ref(h) - ref(2h)||, 64 eps ||ref||) in the table norm
};

ReferenceSolution compute_reference(const Problem& p, const ConvergenceSpec& spec);

std::vector<ConvergenceTable> run_convergence(const ModelEntry& model, const ConvergenceSpec& spec);
/// Reuses a precomputed reference.
std::vector<ConvergenceTable> run_convergence(const ModelEntry& model, const ConvergenceSpec& spec,
                                              const ReferenceSolution& ref);

struct RunReport {
    std::string model;
    MethodId method = MethodId::EM1;
    ExpMode mode = ExpMode::Accurate;
    double h = 0.0;
    TrajectorySummary<double> summary;
    std::vector<std::string> invariant_labels;
    std::vector<double> invariant_relative_drift;  // max |drift| / |w^T y0|
    double t_final = 0.0;
    VectorD y_final;

    bool positivity_preserved() const { return summary.positivity_preserved(1e-12); }
    const char* verdict() const { return positivity_preserved() ? "preserved" : "violated"; }
};

RunReport make_report(const ModelEntry& model, MethodId method, ExpMode mode, double h, const TrajectoryD& traj);

/// Shortest round-trip decimal representation.
std::string format_double(double x);

/// t, y1..yd, mass, min_component, drift_<label>...
void write_trajectory_csv(std::ostream& os, const Problem& p, const TrajectoryD& traj);
/// step, t, I_<label>, drift_<label>, rel_drift_<label>...
void write_invariants_csv(std::ostream& os, const Problem& p, const TrajectoryD& traj);
void write_convergence_csv(std::ostream& os, const ConvergenceTable& table, const Problem& p);
std::string report_json(const RunReport& r, int indent = 2);
std::string convergence_json(const std::vector<ConvergenceTable>& tables, const Problem& p, int indent = 2);

}  // namespace lapode
