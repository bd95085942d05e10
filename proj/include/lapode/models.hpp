#pragma once

// Built-in benchmark problems.

#include "lapode/laplacian.hpp"
#include "lapode/problem.hpp"
#include "lapode/structure.hpp"

#include <array>
#include <string>
#include <vector>

namespace lapode {

using Problem = OdeProblem<double>;

/// Suggested settings for convergence studies.
struct ReferenceControls {
    double h0 = 0.0;
    int levels = 6;
    std::vector<Index> error_components;  // empty = all
};

struct ModelEntry {
    std::string id;
    std::string description;
    Problem problem;
    ReferenceControls controls;
    bool requires_opt_in = false;
};

ModelEntry robertson();
/// Same ODE with a matrix that breaks the sign pattern; opt-in only.
ModelEntry robertson_nonlap();
/// Robertson's three reactions as a mass-action network.
ReactionNetwork robertson_network();
ModelEntry sir(double r0 = 2.28);

/// Photolysis switch: 1/2 + 1/2 cos(pi |x| x), x = (2 T_L - T_R - T_S)/(T_S - T_R)
/// during daylight T_R <= T_L <= T_S, zero otherwise; T_L is the local hour.
double stratospheric_sigma(double t);
/// Rate constants k1..k10 (index 0 unused) at time t.
std::array<double, 11> stratospheric_rates(double t);
/// `hours` after noon of the first day (72 for the full run).
ModelEntry stratospheric(double hours = 72.0);
ModelEntry mapk(double alpha = 1.0);
ModelEntry constant_laplacian(const GraphLaplacian<double>& m, const VectorD& y0, double tf = 1.0,
                              std::string id = "constant");

std::vector<std::string> model_ids(bool include_opt_in = false);
/// Catalog lookup. Unknown ids are a usage error; opt-in models need
/// allow_nonlaplacian.
ModelEntry find_model(const std::string& id, bool allow_nonlaplacian = false);

}  // namespace lapode
