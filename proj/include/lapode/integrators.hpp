#pragma once

// Single-step methods for y' = A(t, y) y.
//
// Exponential Magnus-type methods (EM1, EM2, ES2, EM3) freeze A at stage
// values and apply exact (or Pade-positive) exponentials; the Patankar-type
// methods (MPE, MPRK2) replace the exponentials by resolvents. The classical
// baselines (Euler, RK4, ROS4) act on f(t, y) = A(t, y) y directly.

#include "lapode/core.hpp"
#include "lapode/expm.hpp"
#include "lapode/laplacian.hpp"
#include "lapode/problem.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace lapode {

enum class MethodId {
    EM1,
    EM2_MID,
    EM2_TRAP,
    EM2_MID_CHEAP,
    EM2_TRAP_CHEAP,
    ES2,
    EM3,
    MPE,
    MPRK2,
    EULER,
    RK4,
    ROS4,
};

const char* to_string(MethodId id) noexcept;
/// Accepts the CLI spellings (em1, em2-mid, em2 == em2-mid, mprk2, ros4, ...).
MethodId parse_method(const std::string& name);
const std::vector<MethodId>& all_methods();
/// Matrix exponentials evaluated per step.
int exponentials_per_step(MethodId id) noexcept;
/// Nominal convergence order.
int nominal_order(MethodId id) noexcept;
/// True for the methods whose positivity does not depend on the step size.
bool is_unconditionally_positive(MethodId id) noexcept;
bool uses_exponentials(MethodId id) noexcept;

struct StepOptions {
    ExpMode mode = ExpMode::Accurate;
    /// Validate the sign pattern of every stage matrix.
    bool check_structure = true;
    double tol = kDefaultLaplacianTol;
    /// EM3: abort when a stage combination loses the Laplacian sign pattern.
    bool strict_positivity = false;
    /// Permit h < 0 (time-reversal checks only).
    bool allow_negative_time = false;
};

template <typename Scalar>
struct StepResult {
    Vector<Scalar> y_next;
    std::optional<Vector<Scalar>> err_estimate;  // ES2: x_1 - z_1
    int exponentials_used = 0;
    Scalar min_component = Scalar(0);
    Scalar mass_drift = Scalar(0);  // 1^T y_next - 1^T y
    /// EM3 only: alpha B2 + beta B1 or beta B2 + alpha B1 failed the sign check.
    bool combination_not_laplacian = false;
};

template <typename Scalar>
struct Es2Result {
    Vector<Scalar> x_next;
    Vector<Scalar> z_next;
    Vector<Scalar> y_avg;
    Vector<Scalar> err_estimate;
};

namespace detail {

template <typename Scalar>
Matrix<Scalar> stage_matrix(const OdeProblem<Scalar>& p, Scalar t, const Vector<Scalar>& y, const StepOptions& opts,
                            const char* stage) {
    Matrix<Scalar> a = p.matrix(t, y);
    if (opts.check_structure) {
        const auto report = validate_laplacian(a, false, opts.tol);
        if (!report.ok) {
            fail(ErrorKind::Structure, p.name + ": stage " + stage + " matrix at t = " +
                                           std::to_string(static_cast<double>(t)) +
                                           " violates the Laplacian sign pattern: " + report.describe());
        }
    }
    return a;
}

template <typename Scalar>
void check_step_input(const OdeProblem<Scalar>& p, const Vector<Scalar>& y, Scalar h, const StepOptions& opts) {
    if (y.size() != p.dim) {
        fail(ErrorKind::Dimension, p.name + ": state has length " + std::to_string(y.size()) + ", expected " +
                                       std::to_string(p.dim));
    }
    if (!std::isfinite(static_cast<double>(h)) || (h < Scalar(0) && !opts.allow_negative_time)) {
        fail(ErrorKind::Domain, p.name + ": step size must be finite and nonnegative");
    }
}

template <typename Scalar>
StepResult<Scalar> finish(const Vector<Scalar>& y, Vector<Scalar> y_next, int exponentials) {
    StepResult<Scalar> r;
    r.min_component = min_entry(y_next);
    r.mass_drift = y_next.sum() - y.sum();
    r.exponentials_used = exponentials;
    r.y_next = std::move(y_next);
    return r;
}

template <typename Scalar>
Vector<Scalar> exp_apply(const Matrix<Scalar>& a, Scalar t, const Vector<Scalar>& v, const StepOptions& opts) {
    return expm_action(a, t, v, opts.mode, ExpOptions{opts.allow_negative_time});
}

}  // namespace detail

/// EM1: y_{n+1} = exp(h A(t_n, y_n)) y_n.
template <typename Scalar>
StepResult<Scalar> step_em1(const OdeProblem<Scalar>& p, Scalar t, const Vector<Scalar>& y, Scalar h,
                            const StepOptions& opts = {}) {
    detail::check_step_input(p, y, h, opts);
    const Matrix<Scalar> a = detail::stage_matrix(p, t, y, opts, "A(t,y)");
    return detail::finish(y, detail::exp_apply(a, h, y, opts), 1);
}

/// EM2, exponential midpoint rule.
template <typename Scalar>
StepResult<Scalar> step_em2_mid(const OdeProblem<Scalar>& p, Scalar t, const Vector<Scalar>& y, Scalar h,
                                 const StepOptions& opts = {}) {
    detail::check_step_input(p, y, h, opts);
    const Matrix<Scalar> a0 = detail::stage_matrix(p, t, y, opts, "A(t,y)");
    const Vector<Scalar> y_half = detail::exp_apply(a0, h / Scalar(2), y, opts);
    const Matrix<Scalar> a_half = detail::stage_matrix(p, t + h / Scalar(2), y_half, opts, "A(t+h/2,y_half)");
    return detail::finish(y, detail::exp_apply(a_half, h, y, opts), 2);
}

/// EM2, exponential trapezoidal rule.
template <typename Scalar>
StepResult<Scalar> step_em2_trap(const OdeProblem<Scalar>& p, Scalar t, const Vector<Scalar>& y, Scalar h,
                                  const StepOptions& opts = {}) {
    detail::check_step_input(p, y, h, opts);
    const Matrix<Scalar> a0 = detail::stage_matrix(p, t, y, opts, "A(t,y)");
    const Vector<Scalar> u = detail::exp_apply(a0, h, y, opts);
    const Matrix<Scalar> a1 = detail::stage_matrix(p, t + h, u, opts, "A(t+h,u)");
    const Matrix<Scalar> avg = (a0 + a1) / Scalar(2);
    return detail::finish(y, detail::exp_apply(avg, h, y, opts), 2);
}

enum class CheapVariant { Mid, Trap };

/// EM2 with the internal exponential replaced by a resolvent:
/// trapezoidal stage u1 = (I - hA)^{-1} y, midpoint stage u2 = (I - h/2 A)^{-1} y.
template <typename Scalar>
StepResult<Scalar> step_em2_cheap(const OdeProblem<Scalar>& p, Scalar t, const Vector<Scalar>& y, Scalar h,
                                  CheapVariant which, const StepOptions& opts = {}) {
    detail::check_step_input(p, y, h, opts);
    const ExpOptions eo{opts.allow_negative_time};
    const Matrix<Scalar> a0 = detail::stage_matrix(p, t, y, opts, "A(t,y)");
    if (which == CheapVariant::Mid) {
        const Vector<Scalar> u2 = resolvent_apply(a0, h / Scalar(2), y, eo);
        const Matrix<Scalar> a_half = detail::stage_matrix(p, t + h / Scalar(2), u2, opts, "A(t+h/2,u2)");
        return detail::finish(y, detail::exp_apply(a_half, h, y, opts), 1);
    }
    const Vector<Scalar> u1 = resolvent_apply(a0, h, y, eo);
    const Matrix<Scalar> a1 = detail::stage_matrix(p, t + h, u1, opts, "A(t+h,u1)");
    const Matrix<Scalar> avg = (a0 + a1) / Scalar(2);
    return detail::finish(y, detail::exp_apply(avg, h, y, opts), 1);
}

/// ES2: symmetric Strang splitting of the duplicated system
/// x' = A(t, z) x, z' = A(t, x) z, followed by averaging.
template <typename Scalar>
Es2Result<Scalar> step_es2(const OdeProblem<Scalar>& p, Scalar t, const Vector<Scalar>& x, const Vector<Scalar>& z,
                           Scalar h, const StepOptions& opts = {}) {
    detail::check_step_input(p, x, h, opts);
    detail::check_step_input(p, z, h, opts);
    const Matrix<Scalar> a_z0 = detail::stage_matrix(p, t, z, opts, "A(t,z)");
    const Vector<Scalar> x_half = detail::exp_apply(a_z0, h / Scalar(2), x, opts);
    const Matrix<Scalar> a_xh = detail::stage_matrix(p, t + h / Scalar(2), x_half, opts, "A(t+h/2,x_half)");
    Vector<Scalar> z_next = detail::exp_apply(a_xh, h, z, opts);
    const Matrix<Scalar> a_z1 = detail::stage_matrix(p, t + h, z_next, opts, "A(t+h,z1)");
    Vector<Scalar> x_next = detail::exp_apply(a_z1, h / Scalar(2), x_half, opts);
    Es2Result<Scalar> out;
    out.y_avg = (x_next + z_next) / Scalar(2);
    out.err_estimate = x_next - z_next;
    out.x_next = std::move(x_next);
    out.z_next = std::move(z_next);
    return out;
}

template <typename Scalar>
struct Em3Stages {
    Matrix<Scalar> b1;  // A at the first Gauss node, from x_4
    Matrix<Scalar> b2;  // A at the second Gauss node, from x_5
    Scalar alpha;
    Scalar beta;

    Matrix<Scalar> first_combination() const { return beta * b2 + alpha * b1; }
    Matrix<Scalar> second_combination() const { return alpha * b2 + beta * b1; }
};

/// The five inner exponentials of EM3, producing B_1 and B_2.
template <typename Scalar>
Em3Stages<Scalar> em3_stages(const OdeProblem<Scalar>& p, Scalar t, const Vector<Scalar>& y, Scalar h,
                             const StepOptions& opts = {}) {
    detail::check_step_input(p, y, h, opts);
    const Scalar r3 = std::sqrt(Scalar(3));
    const Scalar c1 = Scalar(1) / Scalar(3) - r3 / Scalar(6);
    const Scalar c2 = Scalar(1) / Scalar(6);
    const Scalar c3 = Scalar(1) / Scalar(3) + r3 / Scalar(6);
    const Scalar g1 = Scalar(1) / Scalar(4) - r3 / Scalar(12);
    const Scalar g2 = Scalar(1) / Scalar(4) + r3 / Scalar(12);
    const Scalar gauss1 = Scalar(1) / Scalar(2) - r3 / Scalar(6);
    const Scalar gauss2 = Scalar(1) / Scalar(2) + r3 / Scalar(6);

    // First tier: the autonomous layout freezes A(y_n) for all three stages;
    // the nonautonomous layout samples time at the printed nodes.
    Matrix<Scalar> a_first1, a_first2, a_first3;
    if (p.autonomous) {
        a_first1 = detail::stage_matrix(p, t, y, opts, "A(y_n)");
        a_first2 = a_first1;
        a_first3 = a_first1;
    } else {
        const Scalar d = Scalar(1) / Scalar(6) - r3 / Scalar(12);
        a_first1 = detail::stage_matrix(p, t + d * h, y, opts, "A_1");
        a_first2 = detail::stage_matrix(p, t + h / Scalar(12), y, opts, "A_2");
        a_first3 = detail::stage_matrix(p, t - d * h, y, opts, "A_3");
    }
    const Vector<Scalar> x1 = detail::exp_apply(a_first1, c1 * h, y, opts);
    const Vector<Scalar> x2 = detail::exp_apply(a_first2, c2 * h, y, opts);
    const Vector<Scalar> x3 = detail::exp_apply(a_first3, c3 * h, y, opts);
    const Matrix<Scalar> a11 = detail::stage_matrix(p, t + c1 * h, x1, opts, "A_{1,1}");
    const Matrix<Scalar> a12 = detail::stage_matrix(p, t + c2 * h, x2, opts, "A_{1,2}");
    const Matrix<Scalar> a13 = detail::stage_matrix(p, t + c3 * h, x3, opts, "A_{1,3}");

    const Vector<Scalar> x4 = detail::exp_apply(Matrix<Scalar>(a11 + a12), g1 * h, y, opts);
    const Vector<Scalar> x5 = detail::exp_apply(Matrix<Scalar>(a12 + a13), g2 * h, y, opts);
    Em3Stages<Scalar> out;
    out.b1 = detail::stage_matrix(p, t + gauss1 * h, x4, opts, "B_1");
    out.b2 = detail::stage_matrix(p, t + gauss2 * h, x5, opts, "B_2");
    out.alpha = Scalar(1) / Scalar(2) + r3 / Scalar(3);
    out.beta = Scalar(1) / Scalar(2) - r3 / Scalar(3);
    return out;
}

/// Third-order commutator-free Magnus method (seven exponentials):
/// y_{n+1} = exp(h/2 (alpha B2 + beta B1)) exp(h/2 (beta B2 + alpha B1)) y_n.
/// The combination weighted towards B_1 (the earlier node) acts first; the
/// reverse composition is only second order. Positivity holds whenever both
/// combinations keep the Laplacian sign pattern; the result records when they
/// do not.
template <typename Scalar>
StepResult<Scalar> step_em3(const OdeProblem<Scalar>& p, Scalar t, const Vector<Scalar>& y, Scalar h,
                            const StepOptions& opts = {}) {
    const Em3Stages<Scalar> st = em3_stages(p, t, y, h, opts);
    const Matrix<Scalar> first = st.first_combination();
    const Matrix<Scalar> second = st.second_combination();
    const bool flagged = !has_laplacian_signs(first, opts.tol) || !has_laplacian_signs(second, opts.tol);
    if (flagged && opts.strict_positivity) {
        fail(ErrorKind::Structure, p.name + ": EM3 stage combination at t = " + std::to_string(static_cast<double>(t)) +
                                       " is not a graph Laplacian (strict positivity requested)");
    }
    const Vector<Scalar> x6 = detail::exp_apply(first, h / Scalar(2), y, opts);
    auto r = detail::finish(y, detail::exp_apply(second, h / Scalar(2), x6, opts), 7);
    r.combination_not_laplacian = flagged;
    return r;
}

/// Modified Patankar-Euler: y_{n+1} = (I - h A(t_n, y_n))^{-1} y_n.
template <typename Scalar>
StepResult<Scalar> step_mpe(const OdeProblem<Scalar>& p, Scalar t, const Vector<Scalar>& y, Scalar h,
                            const StepOptions& opts = {}) {
    detail::check_step_input(p, y, h, opts);
    const Matrix<Scalar> a = detail::stage_matrix(p, t, y, opts, "A(t,y)");
    return detail::finish(y, resolvent_apply(a, h, y, ExpOptions{opts.allow_negative_time}), 0);
}

/// Second-order modified Patankar-Runge-Kutta in matrix form:
/// u = (I - hA(t_n,y_n))^{-1} y_n,
/// y_{n+1} = (I - h/2 (A(t_n,y_n) D(y_n,u) + A(t_{n+1},u)))^{-1} y_n,
/// D = diag(y_n,i / u_i) with ratios dropped where u_i is negligible.
template <typename Scalar>
StepResult<Scalar> step_mprk2(const OdeProblem<Scalar>& p, Scalar t, const Vector<Scalar>& y, Scalar h,
                              const StepOptions& opts = {}) {
    detail::check_step_input(p, y, h, opts);
    const ExpOptions eo{opts.allow_negative_time};
    if (h == Scalar(0)) {
        return detail::finish(y, Vector<Scalar>(y), 0);
    }
    const Matrix<Scalar> a0 = detail::stage_matrix(p, t, y, opts, "A(t,y)");
    const Vector<Scalar> u = resolvent_apply(a0, h, y, eo);
    const Scalar eps_u = Scalar(1e-150) * std::max(Scalar(1), y.cwiseAbs().maxCoeff());
    Vector<Scalar> ratio(p.dim);
    for (Index i = 0; i < p.dim; ++i) {
        ratio(i) = std::abs(u(i)) < eps_u ? Scalar(0) : y(i) / u(i);
    }
    const Matrix<Scalar> a1 = detail::stage_matrix(p, t + h, u, opts, "A(t+h,u)");
    const Matrix<Scalar> combined = a0 * ratio.asDiagonal() + a1;
    return detail::finish(y, resolvent_apply(combined, h / Scalar(2), y, eo), 0);
}

enum class Baseline { Euler, RK4, ROS4 };

namespace detail {

/// Central-difference Jacobian of f(t, y) = A(t, y) y.
template <typename Scalar>
Matrix<Scalar> fd_jacobian(const OdeProblem<Scalar>& p, Scalar t, const Vector<Scalar>& y) {
    const Scalar step = std::cbrt(std::numeric_limits<Scalar>::epsilon());
    Matrix<Scalar> jac(p.dim, p.dim);
    for (Index j = 0; j < p.dim; ++j) {
        const Scalar delta = step * std::max(Scalar(1), std::abs(y(j)));
        Vector<Scalar> yp = y;
        Vector<Scalar> ym = y;
        yp(j) += delta;
        ym(j) -= delta;
        jac.col(j) = (p.rhs(t, yp) - p.rhs(t, ym)) / (Scalar(2) * delta);
    }
    return jac;
}

template <typename Scalar>
Vector<Scalar> fd_time_derivative(const OdeProblem<Scalar>& p, Scalar t, const Vector<Scalar>& y) {
    if (p.autonomous) {
        return Vector<Scalar>::Zero(p.dim);
    }
    const Scalar delta = std::cbrt(std::numeric_limits<Scalar>::epsilon()) * std::max(Scalar(1), std::abs(t));
    return (p.rhs(t + delta, y) - p.rhs(t - delta, y)) / (Scalar(2) * delta);
}

}  // namespace detail

/// Classical baselines applied to f = A(t, y) y. ROS4 is the L-stable
/// 4-stage Rosenbrock method of Shampine (the default coefficient set of the
/// Hairer-Wanner ROS4 code) with a central-difference Jacobian.
template <typename Scalar>
StepResult<Scalar> step_baseline(const OdeProblem<Scalar>& p, Scalar t, const Vector<Scalar>& y, Scalar h,
                                 Baseline which, const StepOptions& opts = {}) {
    detail::check_step_input(p, y, h, opts);
    auto f = [&](Scalar tt, const Vector<Scalar>& yy) { return p.rhs(tt, yy); };
    switch (which) {
        case Baseline::Euler:
            return detail::finish(y, Vector<Scalar>(y + h * f(t, y)), 0);
        case Baseline::RK4: {
            const Vector<Scalar> k1 = f(t, y);
            const Vector<Scalar> k2 = f(t + h / Scalar(2), y + h / Scalar(2) * k1);
            const Vector<Scalar> k3 = f(t + h / Scalar(2), y + h / Scalar(2) * k2);
            const Vector<Scalar> k4 = f(t + h, y + h * k3);
            return detail::finish(y, Vector<Scalar>(y + h / Scalar(6) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4)),
                                  0);
        }
        case Baseline::ROS4:
            break;
    }
    if (h == Scalar(0)) {
        return detail::finish(y, Vector<Scalar>(y), 0);
    }
    const Scalar gamma = Scalar(1) / Scalar(2);
    const Scalar a21 = 2, a31 = Scalar(48) / 25, a32 = Scalar(6) / 25;
    const Scalar c21 = -8, c31 = Scalar(372) / 25, c32 = Scalar(12) / 5;
    const Scalar c41 = Scalar(-112) / 125, c42 = Scalar(-54) / 125, c43 = Scalar(-2) / 5;
    const Scalar b1 = Scalar(19) / 9, b2 = Scalar(1) / 2, b3 = Scalar(25) / 108, b4 = Scalar(125) / 108;
    const Scalar ct2 = 1, ct3 = Scalar(3) / 5;
    const Scalar d1 = Scalar(1) / 2, d2 = Scalar(-3) / 2, d3 = Scalar(121) / 50, d4 = Scalar(29) / 250;

    const Matrix<Scalar> jac = detail::fd_jacobian(p, t, y);
    const Vector<Scalar> ft = detail::fd_time_derivative(p, t, y);
    Matrix<Scalar> lhs = -jac;
    lhs.diagonal().array() += Scalar(1) / (h * gamma);
    Eigen::PartialPivLU<Matrix<Scalar>> lu(lhs);
    if (!(lu.rcond() > std::numeric_limits<Scalar>::epsilon())) {
        fail(ErrorKind::Solve, p.name + ": ROS4 stage matrix is singular at t = " + std::to_string(static_cast<double>(t)));
    }
    const Vector<Scalar> k1 = lu.solve(Vector<Scalar>(f(t, y) + h * d1 * ft));
    const Vector<Scalar> k2 = lu.solve(Vector<Scalar>(f(t + ct2 * h, y + a21 * k1) + (c21 / h) * k1 + h * d2 * ft));
    const Vector<Scalar> f3 = f(t + ct3 * h, y + a31 * k1 + a32 * k2);
    const Vector<Scalar> k3 = lu.solve(Vector<Scalar>(f3 + (c31 / h) * k1 + (c32 / h) * k2 + h * d3 * ft));
    const Vector<Scalar> k4 =
        lu.solve(Vector<Scalar>(f3 + (c41 / h) * k1 + (c42 / h) * k2 + (c43 / h) * k3 + h * d4 * ft));
    return detail::finish(y, Vector<Scalar>(y + b1 * k1 + b2 * k2 + b3 * k3 + b4 * k4), 0);
}

/// One step of any method. ES2 is started from x = z = y and returns the
/// averaged state, with x_1 - z_1 as the error estimate.
template <typename Scalar>
StepResult<Scalar> step(const OdeProblem<Scalar>& p, MethodId method, Scalar t, const Vector<Scalar>& y, Scalar h,
                        const StepOptions& opts = {}) {
    switch (method) {
        case MethodId::EM1: return step_em1(p, t, y, h, opts);
        case MethodId::EM2_MID: return step_em2_mid(p, t, y, h, opts);
        case MethodId::EM2_TRAP: return step_em2_trap(p, t, y, h, opts);
        case MethodId::EM2_MID_CHEAP: return step_em2_cheap(p, t, y, h, CheapVariant::Mid, opts);
        case MethodId::EM2_TRAP_CHEAP: return step_em2_cheap(p, t, y, h, CheapVariant::Trap, opts);
        case MethodId::ES2: {
            auto s = step_es2(p, t, y, y, h, opts);
            auto r = detail::finish(y, std::move(s.y_avg), 3);
            r.err_estimate = std::move(s.err_estimate);
            return r;
        }
        case MethodId::EM3: return step_em3(p, t, y, h, opts);
        case MethodId::MPE: return step_mpe(p, t, y, h, opts);
        case MethodId::MPRK2: return step_mprk2(p, t, y, h, opts);
        case MethodId::EULER: return step_baseline(p, t, y, h, Baseline::Euler, opts);
        case MethodId::RK4: return step_baseline(p, t, y, h, Baseline::RK4, opts);
        case MethodId::ROS4: return step_baseline(p, t, y, h, Baseline::ROS4, opts);
    }
    fail(ErrorKind::Usage, "unknown method");
}

}  // namespace lapode
