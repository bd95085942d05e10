#pragma once

#include "lapode/core.hpp"
#include "lapode/laplacian.hpp"

#include <functional>
#include <string>
#include <vector>

namespace lapode {

/// y' = A(t, y) y on [t0, tf] with y(t0) = y0 >= 0.
template <typename Scalar>
struct OdeProblem {
    using MatrixFn = std::function<Matrix<Scalar>(Scalar, const Vector<Scalar>&)>;

    std::string name;
    Index dim = 0;
    MatrixFn matrix_fn;
    Vector<Scalar> y0;
    Scalar t0 = Scalar(0);
    Scalar tf = Scalar(0);
    std::vector<ConservationVector<Scalar>> conservation;
    bool autonomous = true;
    /// Zero column sums for every admissible state (1^T y conserved).
    bool strict = true;

    Matrix<Scalar> matrix(Scalar t, const Vector<Scalar>& y) const {
        Matrix<Scalar> a = matrix_fn(t, y);
        if (a.rows() != dim || a.cols() != dim) {
            fail(ErrorKind::Dimension, name + ": matrix function returned " + std::to_string(a.rows()) + "x" +
                                           std::to_string(a.cols()) + ", expected " + std::to_string(dim));
        }
        return a;
    }

    Vector<Scalar> rhs(Scalar t, const Vector<Scalar>& y) const { return matrix(t, y) * y; }

    /// Checks dimensions, the initial state and (unless waived) the sign
    /// structure at (t0, y0).
    void validate(double tol = kDefaultLaplacianTol, bool allow_nonlaplacian = false) const {
        if (dim <= 0 || y0.size() != dim) {
            fail(ErrorKind::Dimension, name + ": initial state has length " + std::to_string(y0.size()) +
                                           ", expected " + std::to_string(dim));
        }
        if (!matrix_fn) {
            fail(ErrorKind::Domain, name + ": no matrix function");
        }
        require_finite(y0, "initial state");
        if ((y0.array() < Scalar(0)).any()) {
            fail(ErrorKind::Domain, name + ": initial state must be nonnegative");
        }
        if (!(t0 <= tf)) {
            fail(ErrorKind::Domain, name + ": time span must satisfy t0 <= tf");
        }
        for (const auto& c : conservation) {
            if (c.w.size() != dim) {
                fail(ErrorKind::Dimension, name + ": conservation vector '" + c.label + "' has wrong length");
            }
        }
        const Matrix<Scalar> a = matrix(t0, y0);
        require_finite(a, "matrix at (t0, y0)");
        if (allow_nonlaplacian) {
            return;
        }
        const auto report = validate_laplacian(a, strict, tol);
        if (!report.ok) {
            fail(ErrorKind::Structure, name + ": matrix at (t0, y0) is not a graph Laplacian: " + report.describe());
        }
    }
};

}  // namespace lapode
