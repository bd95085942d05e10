#pragma once

// Graph-Laplacian structure: sign pattern (nonnegative off-diagonal,
// nonpositive diagonal), optional zero column sums, and the shift
// A = a* I + Ã that turns a sign-valid matrix into a nonnegative one.

#include "lapode/core.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace lapode {

inline constexpr double kDefaultLaplacianTol = 1e-12;

enum class ViolationKind { OffDiagonalNegative, DiagonalPositive, ColumnSum };

struct Violation {
    ViolationKind kind;
    Index row;  // equal to col for ColumnSum
    Index col;
    double magnitude;  // signed offending value (entry or column sum)
};

struct ValidationReport {
    bool ok = true;
    double threshold = 0.0;  // absolute tolerance actually applied
    std::vector<Violation> violations;

    std::string describe() const;
};

/// Max over columns of the column 1-norm.
template <typename Derived>
typename Derived::Scalar max_column_norm(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    Scalar best(0);
    for (Index j = 0; j < m.cols(); ++j) {
        best = std::max<Scalar>(best, m.col(j).cwiseAbs().sum());
    }
    return best;
}

/// Checks the sign pattern and, if `strict`, the zero column sums. The
/// tolerance is relative: entries are compared against tol * (1 + max column
/// 1-norm).
template <typename Derived>
ValidationReport validate_laplacian(const Eigen::MatrixBase<Derived>& m, bool strict,
                                    double tol = kDefaultLaplacianTol) {
    require_square(m, "validate_laplacian");
    if (!(tol >= 0.0)) {
        fail(ErrorKind::Domain, "validate_laplacian: tolerance must be nonnegative");
    }
    ValidationReport report;
    report.threshold = tol * (1.0 + static_cast<double>(max_column_norm(m)));
    const double thr = report.threshold;
    const Index n = m.rows();
    for (Index j = 0; j < n; ++j) {
        double col_sum = 0.0;
        for (Index i = 0; i < n; ++i) {
            const double a = static_cast<double>(m(i, j));
            col_sum += a;
            if (!std::isfinite(a)) {
                report.violations.push_back({i == j ? ViolationKind::DiagonalPositive
                                                    : ViolationKind::OffDiagonalNegative,
                                             i, j, a});
            } else if (i == j && a > thr) {
                report.violations.push_back({ViolationKind::DiagonalPositive, i, j, a});
            } else if (i != j && a < -thr) {
                report.violations.push_back({ViolationKind::OffDiagonalNegative, i, j, a});
            }
        }
        if (strict && !(std::abs(col_sum) <= thr)) {
            report.violations.push_back({ViolationKind::ColumnSum, j, j, col_sum});
        }
    }
    report.ok = report.violations.empty();
    return report;
}

/// True iff the sign pattern holds (column sums are not checked).
template <typename Derived>
bool has_laplacian_signs(const Eigen::MatrixBase<Derived>& m, double tol = kDefaultLaplacianTol) {
    return validate_laplacian(m, false, tol).ok;
}

template <typename Scalar>
struct ShiftDecomposition {
    Scalar a_star;
    Matrix<Scalar> a_tilde;

    Matrix<Scalar> reconstruct() const {
        Matrix<Scalar> m = a_tilde;
        m.diagonal().array() += a_star;
        return m;
    }
};

/// a* = min diagonal entry, Ã = m - a* I.
template <typename Derived>
ShiftDecomposition<typename Derived::Scalar> shift_decompose(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    require_square(m, "shift_decompose");
    ShiftDecomposition<Scalar> out{m.diagonal().minCoeff(), m.eval()};
    out.a_tilde.diagonal().array() -= out.a_star;
    return out;
}

/// Radius of the column Gerschgorin discs measured from the origin:
/// max_l |m(l,l)| + sum_{k != l} |m(k,l)|.
template <typename Derived>
typename Derived::Scalar gerschgorin_column_bound(const Eigen::MatrixBase<Derived>& m) {
    require_square(m, "gerschgorin_column_bound");
    return max_column_norm(m);
}

/// A square matrix whose Laplacian structure has been checked on
/// construction. Immutable.
template <typename Scalar>
class GraphLaplacian {
  public:
    explicit GraphLaplacian(Matrix<Scalar> m, bool strict = true, double tol = kDefaultLaplacianTol)
        : matrix_(std::move(m)), strict_(strict), tol_(tol) {
        require_finite(matrix_, "GraphLaplacian");
        const auto report = validate_laplacian(matrix_, strict_, tol_);
        if (!report.ok) {
            fail(ErrorKind::Structure, "GraphLaplacian: " + report.describe());
        }
    }

    const Matrix<Scalar>& matrix() const noexcept { return matrix_; }
    bool strict() const noexcept { return strict_; }
    double tol() const noexcept { return tol_; }
    Index size() const noexcept { return matrix_.rows(); }
    ShiftDecomposition<Scalar> shift() const { return shift_decompose(matrix_); }

  private:
    Matrix<Scalar> matrix_;
    bool strict_;
    double tol_;
};

/// Nonnegative weight vector w with w^T y conserved by the flow.
template <typename Scalar>
struct ConservationVector {
    Vector<Scalar> w;
    std::string label;

    ConservationVector(Vector<Scalar> weights, std::string name) : w(std::move(weights)), label(std::move(name)) {
        if (w.size() == 0 || (w.array() < Scalar(0)).any() || (w.array() == Scalar(0)).all()) {
            fail(ErrorKind::Domain, "conservation vector '" + label + "' must be nonnegative and nonzero");
        }
    }
};

inline std::string ValidationReport::describe() const {
    if (ok) {
        return "ok";
    }
    std::ostringstream os;
    os.precision(6);
    bool first = true;
    for (const auto& v : violations) {
        if (!first) {
            os << "; ";
        }
        first = false;
        switch (v.kind) {
            case ViolationKind::OffDiagonalNegative:
                os << "negative off-diagonal entry (" << v.row + 1 << "," << v.col + 1 << ") = " << v.magnitude;
                break;
            case ViolationKind::DiagonalPositive:
                os << "positive diagonal entry (" << v.row + 1 << "," << v.col + 1 << ") = " << v.magnitude;
                break;
            case ViolationKind::ColumnSum:
                os << "column " << v.col + 1 << " sums to " << v.magnitude;
                break;
        }
    }
    os << " (threshold " << threshold << ")";
    return os.str();
}

}  // namespace lapode
