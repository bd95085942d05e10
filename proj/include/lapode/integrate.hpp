#pragma once

// Fixed-step driver with per-step positivity / mass / invariant diagnostics.

#include "lapode/integrators.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace lapode {

struct IntegrateOptions {
    StepOptions step;
    long max_steps = 20'000'000;
    /// Keep every k-th sample; the first and last are always kept.
    long thin = 1;
    bool keep_samples = true;
    /// Components below -positivity_tol count as a positivity violation.
    double positivity_tol = 1e-12;
};

template <typename Scalar>
struct Sample {
    Scalar t;
    Vector<Scalar> y;
    Scalar min_component;
    Scalar mass_drift;                    // 1^T y_n - 1^T y_0
    std::vector<Scalar> invariant_drift;  // w^T y_n - w^T y_0 per conservation vector
    bool combination_flag = false;
};

template <typename Scalar>
struct TrajectorySummary {
    long steps = 0;
    long exponentials = 0;
    Scalar max_abs_mass_drift = Scalar(0);
    Scalar min_component = std::numeric_limits<Scalar>::infinity();
    std::optional<long> first_negative_step;
    std::vector<Scalar> invariant_initial;
    std::vector<Scalar> max_abs_invariant_drift;
    bool diverged = false;
    std::optional<long> diverged_step;
    long combination_flags = 0;
    /// Largest |1^T y_n - 1^T y_0| / n over the run (n >= 1).
    Scalar max_mass_drift_per_step = Scalar(0);

    bool positivity_preserved(double tol = 1e-12) const {
        return !diverged && !std::isnan(static_cast<double>(min_component)) && min_component >= Scalar(-tol);
    }
};

template <typename Scalar>
struct Trajectory {
    std::vector<Sample<Scalar>> samples;
    TrajectorySummary<Scalar> summary;
    Scalar t_final = Scalar(0);
    Vector<Scalar> y_final;
};

/// Number of steps for [t0, tf] with step h; the last step is shortened to
/// land on tf. Near-integer ratios are rounded so that dyadic grids are exact.
template <typename Scalar>
long step_count(Scalar t0, Scalar tf, Scalar h) {
    const Scalar span = tf - t0;
    if (span == Scalar(0)) {
        return 0;
    }
    const double ratio = static_cast<double>(span / h);
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) {
        return static_cast<long>(nearest);
    }
    return static_cast<long>(std::ceil(ratio));
}

template <typename Scalar>
Trajectory<Scalar> integrate(const OdeProblem<Scalar>& p, MethodId method, Scalar h, const IntegrateOptions& opts = {}) {
    if (!(h > Scalar(0)) || !std::isfinite(static_cast<double>(h))) {
        fail(ErrorKind::Usage, p.name + ": step size must be positive and finite");
    }
    if (opts.thin < 1) {
        fail(ErrorKind::Usage, "thinning factor must be >= 1");
    }
    const double budget = static_cast<double>((p.tf - p.t0) / h);
    if (budget > static_cast<double>(opts.max_steps)) {
        fail(ErrorKind::Usage, p.name + ": " + std::to_string(budget) + " steps exceed the budget of " +
                                   std::to_string(opts.max_steps));
    }
    const long n_steps = step_count(p.t0, p.tf, h);

    Trajectory<Scalar> traj;
    auto& s = traj.summary;
    const Scalar mass0 = p.y0.sum();
    for (const auto& c : p.conservation) {
        s.invariant_initial.push_back(c.w.dot(p.y0));
        s.max_abs_invariant_drift.push_back(Scalar(0));
    }

    auto record = [&](long n, Scalar t, const Vector<Scalar>& y, bool flag, bool force) {
        Sample<Scalar> smp{t, y, min_entry(y), y.sum() - mass0, {}, flag};
        for (std::size_t k = 0; k < p.conservation.size(); ++k) {
            const Scalar d = p.conservation[k].w.dot(y) - s.invariant_initial[k];
            smp.invariant_drift.push_back(d);
            s.max_abs_invariant_drift[k] = std::max(s.max_abs_invariant_drift[k], std::abs(d));
        }
        const bool nan_min = std::isnan(static_cast<double>(smp.min_component));
        if (nan_min || smp.min_component < s.min_component) {
            s.min_component = smp.min_component;
        }
        if (!s.first_negative_step && (nan_min || smp.min_component < Scalar(-opts.positivity_tol))) {
            s.first_negative_step = n;
        }
        s.max_abs_mass_drift = std::max(s.max_abs_mass_drift, std::abs(smp.mass_drift));
        if (n > 0) {
            s.max_mass_drift_per_step = std::max(s.max_mass_drift_per_step, std::abs(smp.mass_drift) / Scalar(n));
        }
        if (opts.keep_samples && (force || n % opts.thin == 0 || n == n_steps)) {
            traj.samples.push_back(std::move(smp));
        }
    };

    Vector<Scalar> y = p.y0;
    Scalar t = p.t0;
    record(0, t, y, false, true);
    for (long n = 0; n < n_steps; ++n) {
        const Scalar t_next = (n + 1 == n_steps) ? p.tf : p.t0 + Scalar(n + 1) * h;
        const Scalar hn = t_next - t;
        StepResult<Scalar> r;
        try {
            r = step(p, method, t, y, hn, opts.step);
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(e.what()) + " [step " + std::to_string(n + 1) + "]", n + 1);
        }
        s.exponentials += r.exponentials_used;
        if (r.combination_not_laplacian) {
            ++s.combination_flags;
        }
        y = std::move(r.y_next);
        t = t_next;
        s.steps = n + 1;
        if (!y.allFinite()) {
            s.diverged = true;
            s.diverged_step = n + 1;
            record(n + 1, t, y, r.combination_not_laplacian, true);
            break;
        }
        record(n + 1, t, y, r.combination_not_laplacian, false);
    }
    traj.t_final = t;
    traj.y_final = y;
    return traj;
}

}  // namespace lapode
