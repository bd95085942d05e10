#include "lapode/models.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace lapode {

namespace {

std::string shortest(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

VectorD vec(std::initializer_list<double> xs) {
    VectorD v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) {
        v(i++) = x;
    }
    return v;
}

}  // namespace

ModelEntry robertson() {
    ModelEntry e;
    e.id = "robertson";
    e.description = "Robertson stiff kinetics, Laplacian form";
    auto& p = e.problem;
    p.name = e.id;
    p.dim = 3;
    p.matrix_fn = [](double, const VectorD& y) {
        MatrixD a = MatrixD::Zero(3, 3);
        a(0, 0) = -0.04;
        a(1, 0) = 0.04;
        a(0, 1) = 1e4 * y(2);
        a(1, 1) = -3e7 * y(1) - 1e4 * y(2);
        a(2, 1) = 3e7 * y(1);
        return a;
    };
    p.y0 = vec({1.0, 0.0, 0.0});
    p.t0 = 0.0;
    p.tf = 0.3;
    p.conservation.emplace_back(VectorD::Ones(3), "mass");
    e.controls = {0.3 / 512, 6, {}};
    return e;
}

ModelEntry robertson_nonlap() {
    ModelEntry e = robertson();
    e.id = "robertson-nonlap";
    e.description = "Robertson kinetics, non-Laplacian matrix form";
    e.requires_opt_in = true;
    e.problem.name = e.id;
    e.problem.strict = false;
    e.problem.matrix_fn = [](double, const VectorD& y) {
        MatrixD a = MatrixD::Zero(3, 3);
        a(0, 0) = -0.04;
        a(1, 0) = 0.04;
        a(1, 1) = -3e7 * y(1);
        a(2, 1) = 3e7 * y(1);
        a(0, 2) = 1e4 * y(1);
        a(1, 2) = -1e4 * y(1);
        return a;
    };
    return e;
}

ReactionNetwork robertson_network() {
    ReactionNetwork net;
    net.species = 3;
    net.species_names = {"A", "B", "C"};
    net.add({1, 0, 0}, {0, 1, 0}, 0.04);
    net.add({0, 2, 0}, {0, 1, 1}, 3e7);
    net.add({0, 1, 1}, {1, 0, 1}, 1e4);
    return net;
}

ModelEntry sir(double r0) {
    if (!(r0 > 0.0) || !std::isfinite(r0)) {
        fail(ErrorKind::Domain, "sir: R0 must be positive");
    }
    ModelEntry e;
    e.id = "sir";
    e.description = "SIR epidemic model, R0 = " + shortest(r0);
    auto& p = e.problem;
    p.name = e.id;
    p.dim = 3;
    p.matrix_fn = [r0](double, const VectorD& y) {
        MatrixD a = MatrixD::Zero(3, 3);
        a(0, 0) = -r0 * y(1);
        a(1, 0) = r0 * y(1);
        a(1, 1) = -1.0;
        a(2, 1) = 1.0;
        return a;
    };
    p.y0 = vec({0.99, 0.01, 0.0});
    p.y0 /= p.y0.sum();
    p.t0 = 0.0;
    p.tf = 20.0;
    p.conservation.emplace_back(VectorD::Ones(3), "population");
    e.controls = {0.5, 6, {}};
    return e;
}

double stratospheric_sigma(double t) {
    constexpr double tr = 4.5;
    constexpr double ts = 19.5;
    double tl = std::fmod(t / 3600.0, 24.0);
    if (tl < 0.0) {
        tl += 24.0;
    }
    if (tl < tr || tl > ts) {
        return 0.0;
    }
    const double x = (2.0 * tl - tr - ts) / (ts - tr);
    return 0.5 + 0.5 * std::cos(std::numbers::pi * std::abs(x) * x);
}

std::array<double, 11> stratospheric_rates(double t) {
    const double s = stratospheric_sigma(t);
    std::array<double, 11> k{};
    k[1] = 2.643e-10 * s * s * s;
    k[2] = 8.018e-17;
    k[3] = 6.120e-4 * s;
    k[4] = 1.576e-15;
    k[5] = 1.070e-3 * s * s;
    k[6] = 7.110e-11;
    k[7] = 1.200e-10;
    k[8] = 6.062e-15;
    k[9] = 1.069e-11;
    k[10] = 1.289e-2 * s;
    return k;
}

ModelEntry stratospheric(double hours) {
    if (!(hours >= 0.0)) {
        fail(ErrorKind::Domain, "stratospheric: duration must be nonnegative");
    }
    ModelEntry e;
    e.id = hours == 1.0 ? "stratospheric-1h" : "stratospheric";
    e.description = "stratospheric O/NOx mechanism (y = [O1D, O, O3, O2, NO, NO2])";
    auto& p = e.problem;
    p.name = e.id;
    p.dim = 6;
    p.autonomous = false;
    p.strict = false;
    p.matrix_fn = [](double t, const VectorD& y) {
        const auto k = stratospheric_rates(t);
        const double gamma = k[3] + k[5] + k[4] * y(1) + k[7] * y(0) + k[8] * y(4);
        MatrixD a = MatrixD::Zero(6, 6);
        a(0, 0) = -(k[6] + k[7] * y(2));
        a(0, 2) = k[5];

        a(1, 0) = k[6];
        a(1, 1) = -(k[2] * y(3) + k[4] * y(2) + k[9] * y(5));
        a(1, 2) = k[3];
        a(1, 3) = 2.0 * k[1];
        a(1, 5) = k[10];

        a(2, 1) = k[2] * y(3) / 3.0;
        a(2, 2) = -gamma;
        a(2, 3) = 2.0 * k[2] * y(1) / 3.0;

        a(3, 0) = 0.5 * k[7] * y(2);
        a(3, 1) = k[4] * y(2) + 0.5 * k[9] * y(5);
        a(3, 2) = gamma + 0.5 * k[7] * y(0);
        a(3, 3) = -(k[1] + k[2] * y(1));
        a(3, 5) = 0.5 * k[9] * y(1);

        a(4, 4) = -k[8] * y(2);
        a(4, 5) = k[10] + k[9] * y(1);

        a(5, 4) = k[8] * y(2);
        a(5, 5) = -(k[10] + k[9] * y(1));
        return a;
    };
    p.y0 = vec({9.906e1, 6.624e8, 5.326e11, 1.697e16, 8.725e8, 2.240e8});
    p.t0 = 12.0 * 3600.0;
    p.tf = p.t0 + hours * 3600.0;
    p.conservation.emplace_back(vec({1, 1, 3, 2, 1, 2}), "oxygen");
    p.conservation.emplace_back(vec({0, 0, 0, 0, 1, 1}), "nitrogen");
    e.controls = {hours == 1.0 ? 3600.0 / 8 : 3600.0, 6, {2, 3, 4, 5}};
    return e;
}

ModelEntry mapk(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        fail(ErrorKind::Domain, "mapk: alpha must lie in [0, 1]");
    }
    constexpr double k1 = 100.0 / 3.0, k2 = 1.0 / 3.0, k3 = 50.0, k4 = 0.5, k5 = 10.0 / 3.0, k6 = 0.1, k7 = 0.7;
    ModelEntry e;
    e.id = "mapk";
    e.description = "MAPK-type oscillator, alpha = " + shortest(alpha);
    auto& p = e.problem;
    p.name = e.id;
    p.dim = 6;
    p.strict = false;
    p.matrix_fn = [alpha](double, const VectorD& y) {
        MatrixD a = MatrixD::Zero(6, 6);
        a(0, 0) = -k7 - k1 * y(1);
        a(0, 3) = k2;
        a(0, 5) = k6;
        a(1, 1) = -k1 * y(0);
        a(1, 2) = k5;
        a(2, 2) = -k3 * y(0) - k5;
        a(2, 3) = k2;
        a(2, 4) = k4;
        a(3, 0) = (1.0 - alpha) * k1 * y(1);
        a(3, 1) = alpha * k1 * y(0);
        a(3, 3) = -k2;
        a(4, 2) = k3 * y(0);
        a(4, 4) = -k4;
        a(5, 0) = k7;
        a(5, 5) = -k6;
        return a;
    };
    p.y0 = vec({0.1, 0.175, 0.15, 1.15, 0.81, 0.5});
    p.t0 = 0.0;
    p.tf = 200.0;
    p.conservation.emplace_back(vec({1, 0, 0, 1, 0, 1}), "kinase-1");
    p.conservation.emplace_back(vec({0, 1, 1, 1, 1, 0}), "kinase-2");
    e.controls = {0.2, 6, {}};
    return e;
}

ModelEntry constant_laplacian(const GraphLaplacian<double>& m, const VectorD& y0, double tf, std::string id) {
    if (y0.size() != m.size()) {
        fail(ErrorKind::Dimension, "constant_laplacian: initial state has wrong length");
    }
    ModelEntry e;
    e.id = std::move(id);
    e.description = "constant graph Laplacian, n = " + std::to_string(m.size());
    auto& p = e.problem;
    p.name = e.id;
    p.dim = m.size();
    p.strict = m.strict();
    p.matrix_fn = [a = m.matrix()](double, const VectorD&) { return a; };
    p.y0 = y0;
    p.t0 = 0.0;
    p.tf = tf;
    if (m.strict()) {
        p.conservation.emplace_back(VectorD::Ones(m.size()), "mass");
    }
    e.controls = {tf / 4, 6, {}};
    return e;
}

std::vector<std::string> model_ids(bool include_opt_in) {
    std::vector<std::string> ids{"robertson", "sir", "stratospheric", "stratospheric-1h", "mapk"};
    if (include_opt_in) {
        ids.insert(ids.begin() + 1, "robertson-nonlap");
    }
    return ids;
}

ModelEntry find_model(const std::string& id, bool allow_nonlaplacian) {
    if (id == "robertson") {
        return robertson();
    }
    if (id == "robertson-nonlap") {
        if (!allow_nonlaplacian) {
            fail(ErrorKind::Usage, "model 'robertson-nonlap' is not a graph-Laplacian form; pass --allow-nonlaplacian");
        }
        return robertson_nonlap();
    }
    if (id == "sir") {
        return sir();
    }
    if (id == "stratospheric") {
        return stratospheric(72.0);
    }
    if (id == "stratospheric-1h") {
        return stratospheric(1.0);
    }
    if (id == "mapk") {
        return mapk(1.0);
    }
    fail(ErrorKind::Usage, "unknown model '" + id + "'");
}

}  // namespace lapode
