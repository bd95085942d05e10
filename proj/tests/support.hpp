#pragma once

#include "lapode/core.hpp"
#include "lapode/structure.hpp"

#include <Eigen/Eigenvalues>

#include <random>

namespace testing_support {

using lapode::Index;
using M = lapode::Matrix<double>;
using V = lapode::Vector<double>;

/// Random strict Laplacian: off-diagonal entries exp-distributed with the
/// given sparsity, scaled by `scale`, diagonal fixing zero column sums.
inline M random_laplacian(std::mt19937_64& rng, Index n, double scale = 1.0, double density = 0.7) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::exponential_distribution<double> e(1.0);
    M a = M::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) {
            if (i != j && u(rng) < density) {
                a(i, j) = scale * e(rng);
            }
        }
        a(j, j) = -a.col(j).sum();
    }
    return a;
}

inline M random_symmetric_laplacian(std::mt19937_64& rng, Index n, double scale = 1.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    M a = M::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = j + 1; i < n; ++i) {
            a(i, j) = a(j, i) = scale * u(rng);
        }
    }
    for (Index j = 0; j < n; ++j) {
        a(j, j) = -(a.col(j).sum() - a(j, j));
    }
    return a;
}

inline V random_simplex(std::mt19937_64& rng, Index n) {
    std::exponential_distribution<double> e(1.0);
    V y(n);
    for (Index i = 0; i < n; ++i) {
        y(i) = e(rng);
    }
    return y / y.sum();
}

/// exp(tA) through the eigendecomposition (diagonalizable A).
inline M eig_exp(const M& a, double t) {
    Eigen::EigenSolver<M> es(a);
    const Eigen::MatrixXcd v = es.eigenvectors();
    const Eigen::VectorXcd d = (t * es.eigenvalues()).array().exp();
    return (v * d.asDiagonal() * v.inverse()).real();
}

/// Normalized null vector of a constant Laplacian (eigenvalue closest to 0).
inline V null_vector(const M& a) {
    Eigen::EigenSolver<M> es(a);
    Index best = 0;
    for (Index i = 1; i < a.rows(); ++i) {
        if (std::abs(es.eigenvalues()(i)) < std::abs(es.eigenvalues()(best))) {
            best = i;
        }
    }
    V v = es.eigenvectors().col(best).real();
    return v / v.sum();
}

/// Random system satisfying the sign and zero-sum conditions: nonnegative
/// coefficients in the rows not named by the monomial, the negated total
/// split between the named rows.
inline lapode::QuadraticSystem random_quadratic(std::mt19937_64& rng, Index d) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::exponential_distribution<double> e(1.0);
    lapode::QuadraticSystem s(d, random_laplacian(rng, d, 1.0, 0.5));
    for (Index i = 0; i < d; ++i) {
        for (Index j = i; j < d; ++j) {
            if (u(rng) < 0.3) {
                continue;
            }
            double total = 0.0;
            for (Index k = 0; k < d; ++k) {
                if (k != i && k != j && u(rng) < 0.6) {
                    const double c = e(rng);
                    s.add(k, i, j, c);
                    total += c;
                }
            }
            if (i == j) {
                s.add(i, i, i, -total);
            } else {
                const double w = u(rng);
                s.add(i, i, j, -w * total);
                s.add(j, i, j, -(1.0 - w) * total);
            }
        }
    }
    return s;
}

/// Random network whose reactions all have at least one reactant and never
/// produce a species that is its reaction's only reactant.
inline lapode::ReactionNetwork random_network(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> species(2, 6);
    std::uniform_int_distribution<int> reactions(1, 8);
    std::uniform_int_distribution<int> order(0, 2);
    std::uniform_real_distribution<double> rate(0.1, 10.0);
    lapode::ReactionNetwork net;
    net.species = species(rng);
    const int n = reactions(rng);
    while (net.reactions() < n) {
        std::vector<int> r(static_cast<std::size_t>(net.species)), q(r.size());
        int reactant_species = 0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] = order(rng);
            q[i] = order(rng);
            reactant_species += r[i] > 0;
        }
        bool ok = reactant_species > 0;
        if (reactant_species == 1) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                ok = ok && !(r[i] > 0 && q[i] > r[i]);
            }
        }
        if (ok) {
            net.add(r, q, rate(rng));
        }
    }
    return net;
}

}  // namespace testing_support
