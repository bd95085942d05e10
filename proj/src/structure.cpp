#include "lapode/structure.hpp"
#include "lapode/laplacian.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace lapode {

namespace {

double monomial(const VectorD& y, const std::vector<int>& powers) {
    double v = 1.0;
    for (std::size_t i = 0; i < powers.size(); ++i) {
        for (int e = 0; e < powers[i]; ++e) {
            v *= y(static_cast<Index>(i));
        }
    }
    return v;
}

}  // namespace

QuadraticSystem::QuadraticSystem(Index d, MatrixD linear) : d_(d), linear_(std::move(linear)) {
    if (d <= 0 || linear_.rows() != d || linear_.cols() != d) {
        fail(ErrorKind::Dimension, "quadratic system: linear part must be " + std::to_string(d) + "x" +
                                       std::to_string(d));
    }
    require_finite(linear_, "quadratic system linear part");
}

void QuadraticSystem::add(Index k, Index i, Index j, double c) {
    if (k < 0 || k >= d_ || i < 0 || i >= d_ || j < 0 || j >= d_) {
        fail(ErrorKind::Dimension, "quadratic system: index out of range");
    }
    if (!std::isfinite(c)) {
        fail(ErrorKind::Domain, "quadratic system: non-finite coefficient");
    }
    if (i > j) {
        std::swap(i, j);
    }
    quad_[{k, i, j}] += c;
}

double QuadraticSystem::coeff(Index k, Index i, Index j) const {
    if (i > j) {
        std::swap(i, j);
    }
    const auto it = quad_.find({k, i, j});
    return it == quad_.end() ? 0.0 : it->second;
}

VectorD QuadraticSystem::rhs(const VectorD& y) const {
    VectorD out = linear_ * y;
    for (const auto& [key, c] : quad_) {
        const auto [k, i, j] = key;
        out(k) += c * y(i) * y(j);
    }
    return out;
}

std::string AssumptionReport::describe() const {
    if (ok) {
        return "ok";
    }
    static const char* names[] = {"linear part not a strict Laplacian", "square-term sign", "cross-term sign",
                                  "monomial coefficients do not sum to zero"};
    std::ostringstream os;
    for (std::size_t n = 0; n < violations.size(); ++n) {
        const auto& v = violations[n];
        if (n > 0) {
            os << "; ";
        }
        os << names[v.family] << " (";
        if (v.k >= 0) {
            os << "k=" << v.k + 1 << ", ";
        }
        os << "monomial y" << v.i + 1 << "*y" << v.j + 1 << ") value " << v.value;
    }
    return os.str();
}

AssumptionReport check_quadratic_assumptions(const QuadraticSystem& s, double tol) {
    AssumptionReport rep;
    const auto lin = validate_laplacian(s.linear(), true, tol);
    for (const auto& v : lin.violations) {
        rep.violations.push_back({0, v.row, v.col, v.col, v.magnitude});
    }
    std::map<std::pair<Index, Index>, std::pair<double, double>> sums;  // monomial -> (sum, sum |.|)
    for (const auto& [key, c] : s.quad()) {
        const auto [k, i, j] = key;
        auto& acc = sums[{i, j}];
        acc.first += c;
        acc.second += std::abs(c);
        const bool own = (k == i || k == j);
        const double thr = tol * (1.0 + std::abs(c));
        if (i == j) {
            if ((own && c > thr) || (!own && c < -thr)) {
                rep.violations.push_back({1, k, i, j, c});
            }
        } else if ((own && c > thr) || (!own && c < -thr)) {
            rep.violations.push_back({2, k, i, j, c});
        }
    }
    for (const auto& [mono, acc] : sums) {
        if (std::abs(acc.first) > tol * (1.0 + acc.second)) {
            rep.violations.push_back({3, -1, mono.first, mono.second, acc.first});
        }
    }
    rep.ok = rep.violations.empty();
    return rep;
}

QuadraticLaplacian::QuadraticLaplacian(const QuadraticSystem& s, double tol) : d_(s.dim()), linear_(s.linear()) {
    const auto rep = check_quadratic_assumptions(s, tol);
    if (!rep.ok) {
        fail(ErrorKind::Structure, "quadratic system violates the factorization assumptions: " + rep.describe());
    }
    for (Index i = 0; i < d_; ++i) {
        for (Index j = i; j < d_; ++j) {
            if (i == j) {
                for (Index k = 0; k < d_; ++k) {
                    const double c = s.coeff(k, i, i);
                    if (c != 0.0) {
                        terms_.push_back({k, i, i, c});
                    }
                }
                continue;
            }
            const double ci = -s.coeff(i, i, j);
            const double cj = -s.coeff(j, i, j);
            const double total = ci + cj;
            for (Index k = 0; k < d_; ++k) {
                const double c = s.coeff(k, i, j);
                if (c == 0.0) {
                    continue;
                }
                if (k == i) {
                    terms_.push_back({k, i, j, c});
                } else if (k == j) {
                    terms_.push_back({k, j, i, c});
                } else if (total > 0.0) {
                    if (ci > 0.0) {
                        terms_.push_back({k, i, j, c * ci / total});
                    }
                    if (cj > 0.0) {
                        terms_.push_back({k, j, i, c * cj / total});
                    }
                } else {
                    // Zero-sum residue below tolerance: keep the representation exact.
                    terms_.push_back({k, i, j, c});
                }
            }
        }
    }
}

MatrixD QuadraticLaplacian::quadratic_part(const VectorD& y) const {
    if (y.size() != d_) {
        fail(ErrorKind::Dimension, "quadratic Laplacian: state has wrong length");
    }
    MatrixD q = MatrixD::Zero(d_, d_);
    for (const auto& t : terms_) {
        q(t.row, t.col) += t.coeff * y(t.var);
    }
    return q;
}

MatrixD QuadraticLaplacian::operator()(const VectorD& y) const { return linear_ + quadratic_part(y); }

QuadraticLaplacian quadratic_laplacian(const QuadraticSystem& s, double tol) { return QuadraticLaplacian(s, tol); }

void ReactionNetwork::add(std::vector<int> r, std::vector<int> q, RateFn k) {
    reactants.push_back(std::move(r));
    products.push_back(std::move(q));
    rates.push_back(std::move(k));
}

void ReactionNetwork::add(std::vector<int> r, std::vector<int> q, double k) {
    add(std::move(r), std::move(q), [k](double) { return k; });
}

void ReactionNetwork::validate() const {
    if (species <= 0) {
        fail(ErrorKind::Schema, "reaction network: no species");
    }
    if (!species_names.empty() && static_cast<Index>(species_names.size()) != species) {
        fail(ErrorKind::Dimension, "reaction network: species name count does not match species count");
    }
    if (reactants.size() != products.size() || reactants.size() != rates.size()) {
        fail(ErrorKind::Dimension, "reaction network: reactant, product and rate lists differ in length");
    }
    for (std::size_t j = 0; j < reactants.size(); ++j) {
        const std::string where = "reaction network: reaction " + std::to_string(j + 1);
        if (static_cast<Index>(reactants[j].size()) != species || static_cast<Index>(products[j].size()) != species) {
            fail(ErrorKind::Dimension, where + " has wrong number of species");
        }
        for (Index i = 0; i < species; ++i) {
            if (reactants[j][i] < 0 || products[j][i] < 0) {
                fail(ErrorKind::Schema, where + " has a negative stoichiometric coefficient");
            }
        }
        if (!rates[j]) {
            fail(ErrorKind::Schema, where + " has no rate");
        }
    }
}

MatrixD ReactionNetwork::stoichiometry() const {
    MatrixD s(species, reactions());
    for (Index j = 0; j < reactions(); ++j) {
        for (Index i = 0; i < species; ++i) {
            s(i, j) = products[j][i] - reactants[j][i];
        }
    }
    return s;
}

VectorD ReactionNetwork::rate_vector(double t, const VectorD& y) const {
    VectorD p(reactions());
    for (Index j = 0; j < reactions(); ++j) {
        p(j) = rates[j](t) * monomial(y, reactants[j]);
    }
    return p;
}

VectorD ReactionNetwork::rhs(double t, const VectorD& y) const { return stoichiometry() * rate_vector(t, y); }

MassActionLaplacian::MassActionLaplacian(ReactionNetwork net) : net_(std::move(net)) {
    net_.validate();
    const Index m = net_.species;
    for (Index j = 0; j < net_.reactions(); ++j) {
        const auto& r = net_.reactants[j];
        const auto& q = net_.products[j];
        bool any_reactant = false;
        for (Index i = 0; i < m; ++i) {
            any_reactant = any_reactant || r[i] > 0;
        }
        for (Index i = 0; i < m; ++i) {
            const int s = q[i] - r[i];
            if (s == 0) {
                continue;
            }
            const std::string where = "reaction " + std::to_string(j + 1) + ", species " + std::to_string(i + 1);
            if (!any_reactant) {
                fail(ErrorKind::Structure, where + ": a pure source term cannot be written as L(y) y");
            }
            Index col = i;
            if (s > 0) {
                col = -1;
                for (Index c = 0; c < m; ++c) {
                    if (c != i && r[c] > 0) {
                        col = c;
                        break;
                    }
                }
                if (col < 0) {
                    fail(ErrorKind::Structure,
                         where + ": species is its own only reactant and is produced; the production term "
                                 "would need a positive diagonal entry");
                }
            }
            std::vector<int> powers = r;
            --powers[col];
            terms_.push_back({i, col, j, static_cast<double>(s), std::move(powers)});
        }
    }
}

MatrixD MassActionLaplacian::operator()(double t, const VectorD& y) const {
    const Index m = net_.species;
    if (y.size() != m) {
        fail(ErrorKind::Dimension, "mass-action Laplacian: state has wrong length");
    }
    std::vector<double> k(net_.reactions());
    for (Index j = 0; j < net_.reactions(); ++j) {
        k[j] = net_.rates[j](t);
    }
    MatrixD l = MatrixD::Zero(m, m);
    for (const auto& term : terms_) {
        l(term.row, term.col) += term.stoich * k[term.reaction] * monomial(y, term.powers);
    }
    return l;
}

MassActionLaplacian mass_action_laplacian(ReactionNetwork net) { return MassActionLaplacian(std::move(net)); }

RepresentationReport verify_representation(const VectorFieldFn& f, const MatrixFieldFn& a, Index dim, int samples,
                                           std::uint64_t seed, double t_lo, double t_hi, const VectorD& scale) {
    if (dim <= 0 || samples <= 0) {
        fail(ErrorKind::Usage, "verify_representation: dimension and sample count must be positive");
    }
    if (scale.size() != 0 && scale.size() != dim) {
        fail(ErrorKind::Dimension, "verify_representation: scale vector has wrong length");
    }
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    RepresentationReport rep;
    for (int n = 0; n < samples; ++n) {
        VectorD y(dim);
        for (Index i = 0; i < dim; ++i) {
            y(i) = expo(rng);
        }
        y /= y.sum();
        if (scale.size() == dim) {
            y = y.cwiseProduct(scale);
        }
        const double t = t_lo + (t_hi - t_lo) * unif(rng);
        const VectorD fy = f(t, y);
        const MatrixD ay = a(t, y);
        if (fy.size() != dim || ay.rows() != dim || ay.cols() != dim) {
            fail(ErrorKind::Dimension, "verify_representation: callable returned wrong dimensions");
        }
        const double res = (ay * y - fy).norm() / (1.0 + fy.norm());
        if (n == 0 || !(res <= rep.max_residual)) {
            rep.max_residual = res;
            rep.worst_y = y;
            rep.worst_t = t;
        }
        ++rep.samples;
    }
    return rep;
}

}  // namespace lapode
