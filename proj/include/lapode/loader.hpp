#pragma once

// JSON problem files: a matrix template with monomial entries, or a
// mass-action reaction network.
//
// {
//   "name": "...", "dim": d, "autonomous": bool, "strict": bool,
//   "y0": [...], "tspan": [t0, tf],
//   "conservation": [{"label": "...", "w": [...]}],
//   "controls": {"h0": x, "levels": n, "components": [1-based ...]},
//   "system": {"kind": "matrix-template",
//              "entries": [{"row": i, "col": j,
//                           "monomials": [{"coeff": c, "powers": [...], "time_factor": f}]}],
//              "rhs": [[monomial, ...] per component]}            (optional)
//          | {"kind": "reaction-network", "species": ["A", ...],
//             "reactions": [{"reactants": {"A": 1}, "products": {"B": 1}, "rate": r}]}
// }
//
// Rows, columns and components are 1-based. A time factor is "sigma",
// "sigma2", "sigma3" (the stratospheric photolysis switch and its powers)
// or {"piecewise": {"breaks": [t1, ...], "values": [v0, v1, ...]}}, value v_k
// on [t_k, t_{k+1}). A rate is a number, a time-factor name, or
// {"coeff": c, "time_factor": f}. Unknown keys are rejected.

#include "lapode/models.hpp"
#include "lapode/structure.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace lapode {

struct LoadedProblem {
    ModelEntry entry;
    std::string kind;                   // "matrix-template" or "reaction-network"
    std::optional<VectorFieldFn> rhs;   // independent f(t, y), when the file provides one
};

/// Parses and validates a problem; `origin` prefixes error locations.
/// Schema violations throw Schema errors, wrong lengths Dimension errors and
/// a sign-pattern failure at (t0, y0) a Structure error.
LoadedProblem parse_problem(const std::string& text, const std::string& origin = "<input>",
                            bool allow_nonlaplacian = false);
/// Unreadable files throw Io errors.
LoadedProblem load_problem(const std::string& path, bool allow_nonlaplacian = false);

struct ProblemCheck {
    bool sign_ok = true;
    bool strict_ok = true;
    std::string first_failure;  // state and entry of the first failed check
    std::optional<RepresentationReport> representation;
    bool representation_ok = true;

    bool ok() const { return sign_ok && strict_ok && representation_ok; }
};

/// Property-1 (and, for strict problems, column-sum) checks at `samples`
/// random states scaled by max(y0, 1e-3 max y0) and times in [t0, tf], plus
/// verify_representation against the independent right-hand side if any.
ProblemCheck check_problem(const LoadedProblem& p, int samples, std::uint64_t seed, double residual_tol = 1e-12);

}  // namespace lapode
