#pragma once

// Dense matrix exponentials for (sign-)Laplacian matrices.
//
// Both kernels work on the shifted matrix t*A - a*I, which is entrywise
// nonnegative when A has the Laplacian sign pattern, so every intermediate
// quantity stays nonnegative and positivity survives roundoff.

#include "lapode/core.hpp"
#include "lapode/laplacian.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <type_traits>

namespace lapode {

enum class ExpMode { Accurate, PadePositive };

const char* to_string(ExpMode mode) noexcept;
ExpMode parse_exp_mode(const std::string& name);

struct ExpOptions {
    /// Negative times are ill-conditioned for Laplacians and rejected unless
    /// this is set (used by the time-reversibility checks).
    bool allow_negative_time = false;
};

namespace detail {

template <typename Scalar>
void check_time(Scalar t, const ExpOptions& opts, const char* what) {
    if (!std::isfinite(static_cast<double>(t))) {
        fail(ErrorKind::Domain, std::string(what) + ": time must be finite");
    }
    if (t < Scalar(0) && !opts.allow_negative_time) {
        fail(ErrorKind::Domain, std::string(what) + ": negative time rejected (ill-conditioned for Laplacians)");
    }
}

/// Truncated Taylor series of exp(X) for ||X||_1 <= 1, evaluated by Horner's
/// rule. With X >= 0 every partial sum is a sum of nonnegative terms.
template <typename Scalar>
int taylor_degree(Scalar norm) {
    const Scalar u = std::numeric_limits<Scalar>::epsilon() / Scalar(2) * std::exp(-norm);
    int degree = 0;
    Scalar term(1);
    while (degree < 40) {
        ++degree;
        term *= norm / Scalar(degree);
        // Tail bound: term * norm/(degree+1) / (1 - norm/(degree+2)).
        const Scalar tail = term * norm / Scalar(degree + 1) / (Scalar(1) - norm / Scalar(degree + 2));
        if (tail <= u) {
            break;
        }
    }
    return degree;
}

template <typename Scalar>
Matrix<Scalar> taylor_exp(const Matrix<Scalar>& x, Scalar norm) {
    const Index n = x.rows();
    const int degree = taylor_degree(norm);
    Matrix<Scalar> p = Matrix<Scalar>::Identity(n, n);
    for (int k = degree; k >= 1; --k) {
        p = (x * p) / Scalar(k);
        p.diagonal().array() += Scalar(1);
    }
    return p;
}

/// In-place Doolittle elimination without pivoting. Succeeds (and returns the
/// solution) only if `m` has nonpositive off-diagonal entries and every pivot
/// is positive, i.e. `m` is a nonsingular M-matrix. In that case the signs of
/// L and U make every operation a sum of nonnegative terms for b >= 0.
template <typename Scalar>
std::optional<Matrix<Scalar>> m_matrix_solve(Matrix<Scalar> m, Matrix<Scalar> b) {
    const Index n = m.rows();
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            if (i != j && m(i, j) > Scalar(0)) {
                return std::nullopt;
            }
        }
    }
    for (Index k = 0; k < n; ++k) {
        const Scalar pivot = m(k, k);
        if (!(pivot > Scalar(0))) {
            return std::nullopt;
        }
        for (Index i = k + 1; i < n; ++i) {
            const Scalar l = m(i, k) / pivot;  // <= 0
            if (l == Scalar(0)) {
                continue;
            }
            m.row(i).tail(n - k - 1) -= l * m.row(k).tail(n - k - 1);
            b.row(i) -= l * b.row(k);
        }
    }
    for (Index k = n - 1; k >= 0; --k) {
        for (Index j = k + 1; j < n; ++j) {
            if (m(k, j) != Scalar(0)) {
                b.row(k) -= m(k, j) * b.row(j);
            }
        }
        b.row(k) /= m(k, k);
    }
    return b;
}

template <typename Scalar>
Matrix<Scalar> general_solve(const Matrix<Scalar>& m, const Matrix<Scalar>& b, ErrorKind kind, const char* what) {
    Eigen::PartialPivLU<Matrix<Scalar>> lu(m);
    const Scalar rcond = lu.rcond();
    if (!(rcond > std::numeric_limits<Scalar>::epsilon())) {
        fail(kind, std::string(what) + ": linear system is singular or too ill-conditioned (rcond " +
                       std::to_string(static_cast<double>(rcond)) + "); reduce the step size");
    }
    return lu.solve(b);
}

/// Zeroes entries in [-tol*scale, 0).
template <typename Derived>
void clamp_roundoff(Eigen::MatrixBase<Derived>& v, typename Derived::Scalar scale, double tol = 1e-12) {
    using Scalar = typename Derived::Scalar;
    const Scalar floor = -Scalar(tol) * scale;
    for (Index j = 0; j < v.cols(); ++j) {
        for (Index i = 0; i < v.rows(); ++i) {
            if (v(i, j) < Scalar(0) && v(i, j) >= floor) {
                v(i, j) = Scalar(0);
            }
        }
    }
}

}  // namespace detail

/// exp(t*m) to roundoff accuracy by shifted scaling and squaring:
/// exp(t m) = (exp(t a*/2^s) exp(X/2^s))^(2^s) with X = t m - t a* I.
template <typename Derived>
Matrix<typename Derived::Scalar> expm_accurate(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar t,
                                               const ExpOptions& opts = {}) {
    using Scalar = typename Derived::Scalar;
    require_square(m, "expm_accurate");
    require_finite(m, "expm_accurate");
    detail::check_time(t, opts, "expm_accurate");
    Matrix<Scalar> x = t * m;
    const Scalar shift = x.diagonal().minCoeff();
    x.diagonal().array() -= shift;
    const Scalar norm = max_column_norm(x);
    int squarings = 0;
    if (norm > Scalar(1)) {
        squarings = static_cast<int>(std::ceil(std::log2(static_cast<double>(norm))));
    }
    const Scalar scale = std::ldexp(Scalar(1), -squarings);
    x *= scale;
    Matrix<Scalar> e = detail::taylor_exp<Scalar>(x, norm * scale);
    e *= std::exp(shift * scale);
    for (int k = 0; k < squarings; ++k) {
        e = (e * e).eval();
    }
    return e;
}

/// Structure-preserving Pade(1,1) exponential:
/// r(t a*) (I - X/2)^{-1} (I + X/2), X = t(m - a* I), r(x) = (1 + x/2)/(1 - x/2).
/// For a strict Laplacian the columns of the result sum to one; the result is
/// nonnegative as long as t |a*| < 2 (the positivity region; for a strict
/// Laplacian rho(Ã) = |a*|, so I - tÃ/2 is singular at t |a*| = 2). Outside
/// that region a StabilityRegion error is raised.
template <typename Derived>
Matrix<typename Derived::Scalar> expm_pade_positive(const Eigen::MatrixBase<Derived>& m,
                                                    typename Derived::Scalar t, const ExpOptions& opts = {}) {
    using Scalar = typename Derived::Scalar;
    require_square(m, "expm_pade_positive");
    require_finite(m, "expm_pade_positive");
    detail::check_time(t, opts, "expm_pade_positive");
    Matrix<Scalar> x = t * m;
    const Scalar shift = x.diagonal().minCoeff();
    x.diagonal().array() -= shift;

    const Scalar numer = Scalar(1) + shift / Scalar(2);
    const Scalar denom = Scalar(1) - shift / Scalar(2);
    if (!(denom > Scalar(0)) || (t >= Scalar(0) && numer < Scalar(0))) {
        fail(ErrorKind::StabilityRegion,
             "expm_pade_positive: t*|a*| = " + std::to_string(static_cast<double>(std::abs(shift))) +
                 " exceeds 2, outside the positivity region; reduce t");
    }
    const Scalar r = numer / denom;

    Matrix<Scalar> lhs = -x / Scalar(2);
    lhs.diagonal().array() += Scalar(1);
    Matrix<Scalar> rhs = x / Scalar(2);
    rhs.diagonal().array() += Scalar(1);

    const bool nonneg = (x.array() >= Scalar(0)).all();
    Matrix<Scalar> p;
    if (nonneg) {
        auto solved = detail::m_matrix_solve<Scalar>(lhs, rhs);
        if (!solved) {
            fail(ErrorKind::StabilityRegion,
                 "expm_pade_positive: I - tÃ/2 is not a nonsingular M-matrix; reduce t");
        }
        p = std::move(*solved);
    } else {
        p = detail::general_solve<Scalar>(lhs, rhs, ErrorKind::StabilityRegion, "expm_pade_positive");
    }
    return r * p;
}

template <typename Derived>
Matrix<typename Derived::Scalar> expm(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar t, ExpMode mode,
                                      const ExpOptions& opts = {}) {
    return mode == ExpMode::Accurate ? expm_accurate(m, t, opts) : expm_pade_positive(m, t, opts);
}

namespace detail {

/// Accurate exp(t m) v. Mildly scaled problems apply the shifted Taylor
/// series to the vector in ceil(||X||_1) substeps (matrix-vector work only,
/// every term nonnegative); otherwise the full matrix is formed.
template <typename Scalar>
Vector<Scalar> accurate_action(const Matrix<Scalar>& m, Scalar t, Vector<Scalar> v, const ExpOptions& opts) {
    require_square(m, "expm_action");
    require_finite(m, "expm_action");
    check_time(t, opts, "expm_action");
    Matrix<Scalar> x = t * m;
    const Scalar shift = x.diagonal().minCoeff();
    x.diagonal().array() -= shift;
    const Scalar norm = max_column_norm(x);
    const Scalar steps = std::max(Scalar(1), std::ceil(norm));
    if (steps > Scalar(m.rows())) {
        return expm_accurate(m, t, opts) * v;
    }
    const int count = static_cast<int>(steps);
    x /= steps;
    const int degree = taylor_degree(norm / steps);
    const Scalar decay = std::exp(shift / steps);
    Vector<Scalar> p(v.size());
    Vector<Scalar> xp(v.size());
    for (int s = 0; s < count; ++s) {
        p = v;
        for (int k = degree; k >= 1; --k) {
            xp.noalias() = x * p;
            p = v + xp / Scalar(k);
        }
        v = decay * p;
    }
    return v;
}

}  // namespace detail

/// exp(t m) v for the chosen kernel. For double input the accurate kernel
/// runs in long double: entries of exp(t m) near one otherwise lose the small
/// increment to biased rounding, which accumulates over many steps.
template <typename Derived, typename VDerived>
Vector<typename Derived::Scalar> expm_action(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar t,
                                             const Eigen::MatrixBase<VDerived>& v, ExpMode mode = ExpMode::Accurate,
                                             const ExpOptions& opts = {}) {
    using Scalar = typename Derived::Scalar;
    if (v.size() != m.rows()) {
        fail(ErrorKind::Dimension, "expm_action: vector length " + std::to_string(v.size()) +
                                       " does not match matrix size " + std::to_string(m.rows()));
    }
    if (t == Scalar(0)) {
        return v;
    }
    if (mode == ExpMode::Accurate) {
        if constexpr (std::is_same_v<Scalar, double>) {
            using Wide = long double;
            return detail::accurate_action<Wide>(m.template cast<Wide>(), Wide(t), v.template cast<Wide>(), opts)
                .template cast<double>();
        } else {
            return detail::accurate_action<Scalar>(m, t, v, opts);
        }
    }
    return expm_pade_positive(m, t, opts) * v;
}

/// (I - t m)^{-1} v. When I - t m is an M-matrix (m has the Laplacian sign
/// pattern and t >= 0) the solve is done without pivoting and the result is
/// exactly nonnegative for v >= 0; otherwise partial pivoting is used and
/// roundoff negatives above -1e-12 ||v||_1 are clamped.
template <typename Derived, typename VDerived>
Vector<typename Derived::Scalar> resolvent_apply(const Eigen::MatrixBase<Derived>& m, typename Derived::Scalar t,
                                                 const Eigen::MatrixBase<VDerived>& v, const ExpOptions& opts = {}) {
    using Scalar = typename Derived::Scalar;
    require_square(m, "resolvent_apply");
    require_finite(m, "resolvent_apply");
    detail::check_time(t, opts, "resolvent_apply");
    if (v.size() != m.rows()) {
        fail(ErrorKind::Dimension, "resolvent_apply: vector length " + std::to_string(v.size()) +
                                       " does not match matrix size " + std::to_string(m.rows()));
    }
    if (t == Scalar(0)) {
        return v;
    }
    Matrix<Scalar> lhs = -t * m;
    lhs.diagonal().array() += Scalar(1);
    Matrix<Scalar> rhs = v;
    if (auto solved = detail::m_matrix_solve<Scalar>(lhs, rhs)) {
        return solved->col(0);
    }
    Vector<Scalar> out = detail::general_solve<Scalar>(lhs, rhs, ErrorKind::Solve, "resolvent_apply").col(0);
    detail::clamp_roundoff(out, v.cwiseAbs().sum());
    return out;
}

}  // namespace lapode
