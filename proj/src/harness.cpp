#include "lapode/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

namespace lapode {

double error_norm(const VectorD& y, const VectorD& ref, const std::vector<Index>& components, bool relative) {
    if (y.size() != ref.size()) {
        fail(ErrorKind::Dimension, "error_norm: vectors differ in length");
    }
    VectorD a, b;
    if (components.empty()) {
        a = y;
        b = ref;
    } else {
        a.resize(static_cast<Index>(components.size()));
        b.resize(a.size());
        for (std::size_t k = 0; k < components.size(); ++k) {
            const Index c = components[k];
            if (c < 0 || c >= y.size()) {
                fail(ErrorKind::Usage, "error component " + std::to_string(c + 1) + " out of range");
            }
            a(static_cast<Index>(k)) = y(c);
            b(static_cast<Index>(k)) = ref(c);
        }
    }
    const double err = (a - b).norm();
    const double scale = b.norm();
    return relative && scale > 0.0 ? err / scale : err;
}

std::optional<double> fit_order(std::vector<ConvergenceRow>& rows, double floor, double floor_factor) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (auto& r : rows) {
        r.used_in_fit = std::isfinite(r.error) && r.error > 0.0 && r.error > floor_factor * floor &&
                        r.failure.empty() && !r.diverged;
        if (!r.used_in_fit) {
            continue;
        }
        const double x = std::log(r.h);
        const double y = std::log(r.error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) {
        return std::nullopt;
    }
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) {
        return std::nullopt;
    }
    return (n * sxy - sx * sy) / denom;
}

namespace {

IntegrateOptions run_options(const ConvergenceSpec& spec, ExpMode mode) {
    IntegrateOptions o;
    o.keep_samples = false;
    o.step.mode = mode;
    o.step.check_structure = spec.check_structure;
    o.step.strict_positivity = spec.strict_positivity;
    return o;
}

}  // namespace

ReferenceSolution compute_reference(const Problem& p, const ConvergenceSpec& spec) {
    if (spec.levels < 1 || !(spec.h0 > 0.0)) {
        fail(ErrorKind::Usage, "convergence: empty step-size grid");
    }
    const double h_min = std::ldexp(spec.h0, -(spec.levels - 1));
    ReferenceSolution ref;
    ref.h = spec.reference_h.value_or(h_min / 64.0);
    if (!(ref.h > 0.0)) {
        fail(ErrorKind::Usage, "convergence: reference step must be positive");
    }
    auto opts = run_options(spec, ExpMode::Accurate);
    opts.step.strict_positivity = false;
    auto solve = [&](double h) {
        TrajectoryD t;
        try {
            t = integrate(p, spec.reference_method, h, opts);
        } catch (const Error& e) {
            fail(ErrorKind::Solve, std::string("reference run failed: ") + e.what());
        }
        if (t.summary.diverged) {
            fail(ErrorKind::Solve, "reference run diverged at step " + std::to_string(*t.summary.diverged_step));
        }
        return t.y_final;
    };
    ref.y = solve(ref.h);
    // Accumulated rounding of long runs sits near 64 eps in the table norm;
    // a single ref(h) - ref(2h) difference can undershoot it by chance.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                         (spec.relative ? 1.0 : error_norm(VectorD::Zero(ref.y.size()), ref.y, spec.components, false));
    ref.floor = std::max(error_norm(solve(2.0 * ref.h), ref.y, spec.components, spec.relative), noise);
    return ref;
}

std::vector<ConvergenceTable> run_convergence(const ModelEntry& model, const ConvergenceSpec& spec) {
    return run_convergence(model, spec, compute_reference(model.problem, spec));
}

std::vector<ConvergenceTable> run_convergence(const ModelEntry& model, const ConvergenceSpec& spec,
                                              const ReferenceSolution& ref) {
    if (spec.methods.empty()) {
        fail(ErrorKind::Usage, "convergence: no methods selected");
    }
    if (spec.levels < 1 || !(spec.h0 > 0.0)) {
        fail(ErrorKind::Usage, "convergence: empty step-size grid");
    }
    const Problem& p = model.problem;
    std::vector<ConvergenceTable> tables;
    for (MethodId m : spec.methods) {
        ConvergenceTable tab;
        tab.model = model.id;
        tab.method = m;
        tab.mode = spec.mode;
        tab.reference_method = spec.reference_method;
        tab.reference_h = ref.h;
        tab.reference_floor = ref.floor;
        const auto opts = run_options(spec, spec.mode);
        for (int j = 0; j < spec.levels; ++j) {
            ConvergenceRow row;
            row.h = std::ldexp(spec.h0, -j);
            try {
                const TrajectoryD t = integrate(p, m, row.h, opts);
                const auto& s = t.summary;
                row.steps = s.steps;
                row.min_component = s.min_component;
                row.max_mass_drift = s.max_abs_mass_drift;
                row.invariant_drifts = s.max_abs_invariant_drift;
                row.diverged = s.diverged;
                row.positivity_violated = !s.positivity_preserved(1e-12);
                row.combination_flags = s.combination_flags;
                row.error = s.diverged ? std::numeric_limits<double>::infinity()
                                       : error_norm(t.y_final, ref.y, spec.components, spec.relative);
            } catch (const Error& e) {
                row.failure = e.what();
                row.error = std::numeric_limits<double>::quiet_NaN();
                row.min_component = std::numeric_limits<double>::quiet_NaN();
            }
            tab.rows.push_back(std::move(row));
        }
        tab.fitted_order = fit_order(tab.rows, ref.floor, spec.floor_factor);
        tables.push_back(std::move(tab));
    }
    return tables;
}

RunReport make_report(const ModelEntry& model, MethodId method, ExpMode mode, double h, const TrajectoryD& traj) {
    RunReport r;
    r.model = model.id;
    r.method = method;
    r.mode = mode;
    r.h = h;
    r.summary = traj.summary;
    r.t_final = traj.t_final;
    r.y_final = traj.y_final;
    for (std::size_t k = 0; k < model.problem.conservation.size(); ++k) {
        r.invariant_labels.push_back(model.problem.conservation[k].label);
        const double i0 = std::abs(traj.summary.invariant_initial[k]);
        const double d = traj.summary.max_abs_invariant_drift[k];
        r.invariant_relative_drift.push_back(i0 > 0.0 ? d / i0 : d);
    }
    return r;
}

std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const Problem& p, const TrajectoryD& traj) {
    os << "t";
    for (Index i = 0; i < p.dim; ++i) {
        os << ",y" << i + 1;
    }
    os << ",mass,min_component";
    for (const auto& c : p.conservation) {
        os << ",drift_" << c.label;
    }
    os << "\n";
    for (const auto& s : traj.samples) {
        os << format_double(s.t);
        for (Index i = 0; i < s.y.size(); ++i) {
            os << "," << format_double(s.y(i));
        }
        os << "," << format_double(s.y.sum()) << "," << format_double(s.min_component);
        for (double d : s.invariant_drift) {
            os << "," << format_double(d);
        }
        os << "\n";
    }
}

void write_invariants_csv(std::ostream& os, const Problem& p, const TrajectoryD& traj) {
    os << "step,t";
    for (const auto& c : p.conservation) {
        os << ",I_" << c.label << ",drift_" << c.label << ",rel_drift_" << c.label;
    }
    os << "\n";
    const auto& init = traj.summary.invariant_initial;
    long step = 0;
    for (const auto& s : traj.samples) {
        os << step++ << "," << format_double(s.t);
        for (std::size_t k = 0; k < s.invariant_drift.size(); ++k) {
            const double d = s.invariant_drift[k];
            const double i0 = init[k];
            os << "," << format_double(i0 + d) << "," << format_double(d) << ","
               << format_double(i0 != 0.0 ? d / std::abs(i0) : d);
        }
        os << "\n";
    }
}

void write_convergence_csv(std::ostream& os, const ConvergenceTable& table, const Problem& p) {
    os << "h,steps,error,min_component,max_mass_drift";
    for (const auto& c : p.conservation) {
        os << ",drift_" << c.label;
    }
    os << ",positivity_violated,diverged,combination_flags,used_in_fit\n";
    for (const auto& r : table.rows) {
        os << format_double(r.h) << "," << r.steps << "," << format_double(r.error) << ","
           << format_double(r.min_component) << "," << format_double(r.max_mass_drift);
        for (std::size_t k = 0; k < p.conservation.size(); ++k) {
            os << "," << (k < r.invariant_drifts.size() ? format_double(r.invariant_drifts[k]) : "nan");
        }
        os << "," << (r.positivity_violated ? 1 : 0) << "," << (r.diverged ? 1 : 0) << "," << r.combination_flags
           << "," << (r.used_in_fit ? 1 : 0) << "\n";
    }
}

namespace {

nlohmann::ordered_json number(double x) {
    if (!std::isfinite(x)) {
        return nullptr;
    }
    return x;
}

nlohmann::ordered_json vector_json(const VectorD& v) {
    auto a = nlohmann::ordered_json::array();
    for (Index i = 0; i < v.size(); ++i) {
        a.push_back(number(v(i)));
    }
    return a;
}

}  // namespace

std::string report_json(const RunReport& r, int indent) {
    nlohmann::ordered_json j;
    j["model"] = r.model;
    j["method"] = to_string(r.method);
    j["mode"] = to_string(r.mode);
    j["h"] = r.h;
    j["steps"] = r.summary.steps;
    j["exponentials"] = r.summary.exponentials;
    j["t_final"] = number(r.t_final);
    j["y_final"] = vector_json(r.y_final);
    auto& pos = j["positivity"];
    pos["verdict"] = r.verdict();
    pos["min_component"] = number(r.summary.min_component);
    pos["first_violating_step"] =
        r.summary.first_negative_step ? nlohmann::ordered_json(*r.summary.first_negative_step) : nullptr;
    j["max_mass_drift"] = number(r.summary.max_abs_mass_drift);
    auto inv = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < r.invariant_labels.size(); ++k) {
        inv.push_back({{"label", r.invariant_labels[k]},
                       {"initial", number(r.summary.invariant_initial[k])},
                       {"max_abs_drift", number(r.summary.max_abs_invariant_drift[k])},
                       {"max_rel_drift", number(r.invariant_relative_drift[k])}});
    }
    j["invariants"] = inv;
    j["diverged"] = r.summary.diverged;
    j["diverged_step"] = r.summary.diverged_step ? nlohmann::ordered_json(*r.summary.diverged_step) : nullptr;
    j["combination_not_laplacian_steps"] = r.summary.combination_flags;
    return j.dump(indent);
}

std::string convergence_json(const std::vector<ConvergenceTable>& tables, const Problem& p, int indent) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& t : tables) {
        nlohmann::ordered_json j;
        j["model"] = t.model;
        j["method"] = to_string(t.method);
        j["mode"] = to_string(t.mode);
        j["reference"] = {{"method", to_string(t.reference_method)},
                          {"h", t.reference_h},
                          {"floor", number(t.reference_floor)}};
        j["fitted_order"] = t.fitted_order ? number(*t.fitted_order) : nullptr;
        auto rows = nlohmann::ordered_json::array();
        for (const auto& r : t.rows) {
            nlohmann::ordered_json row;
            row["h"] = r.h;
            row["steps"] = r.steps;
            row["error"] = number(r.error);
            row["min_component"] = number(r.min_component);
            row["max_mass_drift"] = number(r.max_mass_drift);
            auto drifts = nlohmann::ordered_json::object();
            for (std::size_t k = 0; k < r.invariant_drifts.size() && k < p.conservation.size(); ++k) {
                drifts[p.conservation[k].label] = number(r.invariant_drifts[k]);
            }
            row["invariant_drifts"] = drifts;
            row["positivity_violated"] = r.positivity_violated;
            row["diverged"] = r.diverged;
            row["combination_flags"] = r.combination_flags;
            row["used_in_fit"] = r.used_in_fit;
            if (!r.failure.empty()) {
                row["failure"] = r.failure;
            }
            rows.push_back(row);
        }
        j["rows"] = rows;
        out.push_back(j);
    }
    return out.dump(indent);
}

}  // namespace lapode
