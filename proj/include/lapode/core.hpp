#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace lapode {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

enum class ErrorKind {
    Dimension,
    Domain,
    Structure,
    StabilityRegion,
    Solve,
    Schema,
    Io,
    Usage,
};

const char* to_string(ErrorKind kind) noexcept;

/// Library-wide exception. The kind drives the CLI exit code; the optional
/// step index is attached by the fixed-step driver when a stepper throws.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& what, std::optional<long> step = std::nullopt)
        : std::runtime_error(what), kind_(kind), step_(step) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<long> step() const noexcept { return step_; }

  private:
    ErrorKind kind_;
    std::optional<long> step_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

template <typename Derived>
void require_square(const Eigen::MatrixBase<Derived>& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        fail(ErrorKind::Dimension, std::string(what) + ": expected a non-empty square matrix, got " +
                                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
    for (Index j = 0; j < m.cols(); ++j) {
        for (Index i = 0; i < m.rows(); ++i) {
            if (!std::isfinite(static_cast<double>(m(i, j)))) {
                fail(ErrorKind::Domain, std::string(what) + ": non-finite entry at (" + std::to_string(i) +
                                            ", " + std::to_string(j) + ")");
            }
        }
    }
}

/// Smallest entry, NaN-aware: any NaN makes the result NaN.
template <typename Derived>
typename Derived::Scalar min_entry(const Eigen::MatrixBase<Derived>& v) {
    using Scalar = typename Derived::Scalar;
    Scalar lo = std::numeric_limits<Scalar>::infinity();
    for (Index j = 0; j < v.cols(); ++j) {
        for (Index i = 0; i < v.rows(); ++i) {
            const Scalar x = v(i, j);
            if (std::isnan(static_cast<double>(x))) {
                return x;
            }
            lo = std::min(lo, x);
        }
    }
    return lo;
}

}  // namespace lapode
