#pragma once

// Factorizers that write polynomial / mass-action right-hand sides as
// f(t, y) = A(t, y) y with A carrying the Laplacian sign pattern.

#include "lapode/core.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace lapode {

using MatrixD = Matrix<double>;
using VectorD = Vector<double>;

/// y' = B y + q(y), q homogeneous quadratic. The coefficient of y_i y_j
/// (i <= j, 0-based) in component k is stored under (k, i, j).
class QuadraticSystem {
  public:
    using Key = std::tuple<Index, Index, Index>;

    QuadraticSystem(Index d, MatrixD linear);
    explicit QuadraticSystem(Index d) : QuadraticSystem(d, MatrixD::Zero(d, d)) {}

    /// Adds c to the coefficient of y_i y_j in component k (i, j unordered).
    void add(Index k, Index i, Index j, double c);
    double coeff(Index k, Index i, Index j) const;

    Index dim() const noexcept { return d_; }
    const MatrixD& linear() const noexcept { return linear_; }
    const std::map<Key, double>& quad() const noexcept { return quad_; }

    /// Direct multinomial evaluation of B y + q(y).
    VectorD rhs(const VectorD& y) const;

  private:
    Index d_;
    MatrixD linear_;
    std::map<Key, double> quad_;
};

struct AssumptionViolation {
    int family;  // 0 = linear part, 1 = square terms, 2 = cross terms, 3 = zero sums
    Index k;     // component (-1 for column-sum families)
    Index i;
    Index j;
    double value;
};

struct AssumptionReport {
    bool ok = true;
    std::vector<AssumptionViolation> violations;
    std::string describe() const;
};

/// Sign conditions on square and cross coefficients, zero column sums of
/// the linear part and sum_k a_k^l = 0 for every quadratic monomial l.
AssumptionReport check_quadratic_assumptions(const QuadraticSystem& s, double tol = 1e-12);

/// A(y) = B + Q(y) with Q(y) y = q(y). Square terms a_k^{2e_l} y_l sit in
/// column l. A cross term of y_i y_j goes to column i for row i, column j for
/// row j, and is split c_i : c_j between the two columns for every other row,
/// where c_i = -a_i, c_j = -a_j; this keeps each column sum at zero.
class QuadraticLaplacian {
  public:
    explicit QuadraticLaplacian(const QuadraticSystem& s, double tol = 1e-12);

    MatrixD quadratic_part(const VectorD& y) const;
    MatrixD operator()(const VectorD& y) const;
    Index dim() const noexcept { return d_; }

  private:
    struct Term {
        Index row;
        Index col;
        Index var;  // multiplying state component
        double coeff;
    };
    Index d_;
    MatrixD linear_;
    std::vector<Term> terms_;
};

QuadraticLaplacian quadratic_laplacian(const QuadraticSystem& s, double tol = 1e-12);

using RateFn = std::function<double(double)>;

/// Mass-action network: reaction j turns sum_i r(j,i) G_i into sum_i q(j,i) G_i
/// at rate k_j(t) prod_i y_i^{r(j,i)}.
struct ReactionNetwork {
    Index species = 0;
    std::vector<std::string> species_names;
    std::vector<std::vector<int>> reactants;  // N x M
    std::vector<std::vector<int>> products;   // N x M
    std::vector<RateFn> rates;
    bool time_dependent = false;

    Index reactions() const noexcept { return static_cast<Index>(reactants.size()); }
    void add(std::vector<int> r, std::vector<int> q, RateFn k);
    void add(std::vector<int> r, std::vector<int> q, double k);
    /// Checks shapes and nonnegative orders; throws Schema/Dimension errors.
    void validate() const;

    MatrixD stoichiometry() const;  // M x N, S = q - r
    VectorD rate_vector(double t, const VectorD& y) const;
    VectorD rhs(double t, const VectorD& y) const;  // S p
};

/// L(t, y) with L y = S p and negative entries only on the diagonal.
/// Consumption terms are divided symbolically by the consumed species and sit
/// on the diagonal; production terms go to the column of the lowest-index
/// reactant other than the produced species.
class MassActionLaplacian {
  public:
    explicit MassActionLaplacian(ReactionNetwork net);

    MatrixD operator()(double t, const VectorD& y) const;
    const ReactionNetwork& network() const noexcept { return net_; }

  private:
    struct Term {
        Index row;
        Index col;
        Index reaction;
        double stoich;
        std::vector<int> powers;  // monomial p_j / y_col
    };
    ReactionNetwork net_;
    std::vector<Term> terms_;
};

MassActionLaplacian mass_action_laplacian(ReactionNetwork net);

struct RepresentationReport {
    double max_residual = 0.0;  // max ||A y - f|| / (1 + ||f||)
    VectorD worst_y;
    double worst_t = 0.0;
    int samples = 0;
};

using VectorFieldFn = std::function<VectorD(double, const VectorD&)>;
using MatrixFieldFn = std::function<MatrixD(double, const VectorD&)>;

/// Samples y uniformly on the simplex, scaled componentwise by `scale`
/// (ones if empty), and t uniformly in [t_lo, t_hi].
RepresentationReport verify_representation(const VectorFieldFn& f, const MatrixFieldFn& a, Index dim, int samples,
                                           std::uint64_t seed, double t_lo = 0.0, double t_hi = 0.0,
                                           const VectorD& scale = VectorD());

}  // namespace lapode
