#include "lapode/models.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace lapode;
using testing_support::M;
using testing_support::V;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no lapode::Error thrown";
    return ErrorKind::Usage;
}

V robertson_f(const V& y) {
    V f(3);
    f(0) = -0.04 * y(0) + 1e4 * y(1) * y(2);
    f(1) = 0.04 * y(0) - 1e4 * y(1) * y(2) - 3e7 * y(1) * y(1);
    f(2) = 3e7 * y(1) * y(1);
    return f;
}

V sir_f(const V& y, double r0) {
    V f(3);
    f(0) = -r0 * y(0) * y(1);
    f(1) = r0 * y(0) * y(1) - y(1);
    f(2) = y(1);
    return f;
}

V mapk_f(const V& y, double alpha) {
    const double k1 = 100.0 / 3, k2 = 1.0 / 3, k3 = 50, k4 = 0.5, k5 = 10.0 / 3, k6 = 0.1, k7 = 0.7;
    V f(6);
    f(0) = -k7 * y(0) - k1 * y(0) * y(1) + k2 * y(3) + k6 * y(5);
    f(1) = -k1 * y(0) * y(1) + k5 * y(2);
    f(2) = -k3 * y(0) * y(2) - k5 * y(2) + k2 * y(3) + k4 * y(4);
    f(3) = (1 - alpha) * k1 * y(1) * y(0) + alpha * k1 * y(0) * y(1) - k2 * y(3);
    f(4) = k3 * y(0) * y(2) - k4 * y(4);
    f(5) = k7 * y(0) - k6 * y(5);
    return f;
}

double sigma_oracle(double t) {
    const double tl = std::fmod(t / 3600.0, 24.0);
    if (tl < 4.5 || tl > 19.5) {
        return 0.0;
    }
    const double x = (2 * tl - 4.5 - 19.5) / (19.5 - 4.5);
    return 0.5 + 0.5 * std::cos(std::numbers::pi * std::abs(x) * x);
}

V stratospheric_f(double t, const V& y) {
    const double s = sigma_oracle(t);
    const double k1 = 2.643e-10 * s * s * s, k2 = 8.018e-17, k3 = 6.120e-4 * s, k4 = 1.576e-15,
                 k5 = 1.070e-3 * s * s, k6 = 7.110e-11, k7 = 1.200e-10, k8 = 6.062e-15, k9 = 1.069e-11,
                 k10 = 1.289e-2 * s;
    const double y1 = y(0), y2 = y(1), y3 = y(2), y4 = y(3), y5 = y(4), y6 = y(5);
    V f(6);
    f(0) = k5 * y3 - k6 * y1 - k7 * y1 * y3;
    f(1) = 2 * k1 * y4 - k2 * y2 * y4 + k3 * y3 - k4 * y2 * y3 + k6 * y1 - k9 * y2 * y6 + k10 * y6;
    f(2) = k2 * y2 * y4 - k3 * y3 - k4 * y2 * y3 - k5 * y3 - k7 * y1 * y3 - k8 * y3 * y5;
    f(3) = -k1 * y4 - k2 * y2 * y4 + k3 * y3 + 2 * k4 * y2 * y3 + k5 * y3 + 2 * k7 * y1 * y3 + k8 * y3 * y5 +
           k9 * y2 * y6;
    f(4) = -k8 * y3 * y5 + k9 * y2 * y6 + k10 * y6;
    f(5) = k8 * y3 * y5 - k9 * y2 * y6 - k10 * y6;
    return f;
}

V scaled_uniform(std::mt19937_64& rng, const V& scale) {
    std::uniform_real_distribution<double> u(0.0, 2.0);
    V y(scale.size());
    for (Index i = 0; i < y.size(); ++i) {
        y(i) = scale(i) * u(rng);
    }
    return y;
}

double rel(const V& a, const V& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

}  // namespace

TEST(Robertson, Examples) {
    const auto m = robertson();
    const auto& p = m.problem;
    EXPECT_EQ(p.dim, 3);
    EXPECT_TRUE(p.autonomous);
    EXPECT_EQ(p.tf, 0.3);
    V expected(3);
    expected << -0.04, 0.04, 0;
    EXPECT_EQ(p.rhs(0.0, p.y0), expected);
    V y(3);
    y << 1, 1e-5, 1e-2;
    EXPECT_NEAR(p.matrix(0.0, y).diagonal().minCoeff(), -400.0, 1e-12);
}

TEST(Robertson, NonLaplacianVariantNeedsOptIn) {
    EXPECT_EQ(kind_of([] { find_model("robertson-nonlap"); }), ErrorKind::Usage);
    const auto m = find_model("robertson-nonlap", true);
    V y(3);
    y << 0.5, 0.1, 0.4;
    const auto rep = validate_laplacian(m.problem.matrix(0.0, y), false);
    ASSERT_FALSE(rep.ok);
    EXPECT_EQ(rep.violations.front().row, 1);
    EXPECT_EQ(rep.violations.front().col, 2);
    EXPECT_LE(rel(m.problem.rhs(0.0, y), robertson_f(y)), 1e-15);
}

TEST(Sir, FrozenSusceptiblesWithoutInfection) {
    const auto m = sir();
    V y(3);
    y << 0.7, 0.0, 0.3;
    M expected = M::Zero(3, 3);
    expected(1, 1) = -1;
    expected(2, 1) = 1;
    EXPECT_EQ(m.problem.matrix(0.0, y), expected);
    EXPECT_NEAR(m.problem.y0.sum(), 1.0, 1e-16);
    EXPECT_EQ(kind_of([] { sir(-1.0); }), ErrorKind::Domain);
}

TEST(Stratospheric, SigmaValues) {
    EXPECT_EQ(stratospheric_sigma(12 * 3600.0), 1.0);
    EXPECT_EQ(stratospheric_sigma(3 * 3600.0), 0.0);
    EXPECT_EQ(stratospheric_sigma(20 * 3600.0), 0.0);
    EXPECT_EQ(stratospheric_sigma((24 + 12) * 3600.0), 1.0);
    EXPECT_NEAR(stratospheric_sigma(4.5 * 3600.0), 0.0, 1e-15);
    EXPECT_NEAR(stratospheric_sigma(19.5 * 3600.0), 0.0, 1e-15);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> t(0.0, 96 * 3600.0);
    for (int k = 0; k < 200; ++k) {
        const double tk = t(rng);
        EXPECT_NEAR(stratospheric_sigma(tk), sigma_oracle(tk), 1e-15);
    }
}

TEST(Stratospheric, Setup) {
    const auto full = stratospheric();
    EXPECT_EQ(full.problem.t0, 12 * 3600.0);
    EXPECT_EQ(full.problem.tf, 84 * 3600.0);
    EXPECT_FALSE(full.problem.autonomous);
    const auto short_run = find_model("stratospheric-1h");
    EXPECT_EQ(short_run.problem.tf - short_run.problem.t0, 3600.0);
    ASSERT_EQ(full.problem.conservation.size(), 2u);
}

TEST(Stratospheric, NitrogenRowSumVanishes) {
    const auto m = stratospheric();
    const V w2 = m.problem.conservation[1].w;
    const V w1 = m.problem.conservation[0].w;
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> t(0.0, 96 * 3600.0);
    bool w1_row_nonzero = false;
    for (int k = 0; k < 100; ++k) {
        const V y = scaled_uniform(rng, m.problem.y0);
        const M a = m.problem.matrix(t(rng), y);
        EXPECT_LE((w2.transpose() * a).cwiseAbs().maxCoeff(), 1e-12 * a.cwiseAbs().maxCoeff());
        w1_row_nonzero = w1_row_nonzero || (w1.transpose() * a).cwiseAbs().maxCoeff() > 1e-6 * a.cwiseAbs().maxCoeff();
    }
    EXPECT_TRUE(w1_row_nonzero);
}

TEST(Mapk, ConservationIdentities) {
    std::mt19937_64 rng(14);
    for (double alpha : {0.0, 0.3, 1.0}) {
        const auto m = mapk(alpha);
        const V w1 = m.problem.conservation[0].w;
        const V w2 = m.problem.conservation[1].w;
        for (int k = 0; k < 50; ++k) {
            const V y = scaled_uniform(rng, V::Ones(6));
            const M a = m.problem.matrix(0.0, y);
            const V f = a * y;
            EXPECT_LE(std::abs(w1.dot(f)), 1e-13 * f.lpNorm<1>());
            EXPECT_LE(std::abs(w2.dot(f)), 1e-13 * f.lpNorm<1>());
            if (alpha == 1.0) {
                EXPECT_LE((w2.transpose() * a).cwiseAbs().maxCoeff(), 1e-14);
            }
            if (alpha == 0.0) {
                EXPECT_LE((w1.transpose() * a).cwiseAbs().maxCoeff(), 1e-14);
            }
        }
    }
    EXPECT_EQ(kind_of([] { mapk(1.5); }), ErrorKind::Domain);
}

TEST(ConstantLaplacian, WrapsMatrix) {
    M a(2, 2);
    a << -1, 1, 1, -1;
    V y0(2);
    y0 << 1, 0;
    const auto m = constant_laplacian(GraphLaplacian<double>(a, true), y0, 2.0);
    EXPECT_EQ(m.problem.matrix(0.7, V::Ones(2)), a);
    EXPECT_EQ(m.problem.tf, 2.0);
    const auto frozen = constant_laplacian(GraphLaplacian<double>(M::Zero(3, 3), true), V::Ones(3));
    EXPECT_TRUE(frozen.problem.rhs(0.0, V::Ones(3)).isZero(0));
    EXPECT_EQ(kind_of([&] { constant_laplacian(GraphLaplacian<double>(a, true), V::Ones(3)); }),
              ErrorKind::Dimension);
}

TEST(Catalog, ListsAndLooksUp) {
    const auto ids = model_ids();
    for (const char* id : {"robertson", "sir", "stratospheric", "mapk"}) {
        EXPECT_NE(std::find(ids.begin(), ids.end(), id), ids.end()) << id;
        EXPECT_EQ(find_model(id).id, id);
    }
    EXPECT_EQ(std::find(ids.begin(), ids.end(), "robertson-nonlap"), ids.end());
    EXPECT_EQ(kind_of([] { find_model("nope"); }), ErrorKind::Usage);
}

TEST(Properties, RhsMatchesHandTranscription) {
    std::mt19937_64 rng(15);
    const auto rob = robertson();
    const auto s = sir();
    const auto mk = mapk();
    const auto st = stratospheric();
    std::uniform_real_distribution<double> t(st.problem.t0, st.problem.tf);
    for (int k = 0; k < 100; ++k) {
        const V y3 = testing_support::random_simplex(rng, 3);
        EXPECT_LE(rel(rob.problem.rhs(0.0, y3), robertson_f(y3)), 1e-13);
        EXPECT_LE(rel(s.problem.rhs(0.0, y3), sir_f(y3, 2.28)), 1e-13);
        const V y6 = scaled_uniform(rng, V::Ones(6));
        EXPECT_LE(rel(mk.problem.rhs(0.0, y6), mapk_f(y6, 1.0)), 1e-13);
        const V ys = scaled_uniform(rng, st.problem.y0);
        const double tk = t(rng);
        // Cancellation between large production and loss terms: compare on
        // the scale of the individual terms.
        const V f = stratospheric_f(tk, ys);
        const M a = st.problem.matrix(tk, ys);
        const V scale = a.cwiseAbs() * ys;
        EXPECT_LE(((a * ys - f).cwiseAbs().array() / scale.array().max(1e-300)).maxCoeff(), 1e-13);
    }
}

TEST(Properties, SignPatternOnPhysicalStates) {
    std::mt19937_64 rng(16);
    for (const auto& id : model_ids()) {
        const auto m = find_model(id);
        const auto& p = m.problem;
        std::uniform_real_distribution<double> t(p.t0, std::max(p.tf, p.t0 + 1.0));
        const V scale = p.y0.cwiseMax(V::Constant(p.dim, p.y0.maxCoeff() * 1e-3));
        for (int k = 0; k < 100; ++k) {
            const V y = scaled_uniform(rng, scale);
            const M a = p.matrix(t(rng), y);
            EXPECT_TRUE(validate_laplacian(a, false).ok) << id;
            if (p.strict) {
                EXPECT_TRUE(validate_laplacian(a, true).ok) << id;
            }
        }
    }
}

TEST(Properties, StratosphericVectorConservation) {
    const auto st = stratospheric();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> t(st.problem.t0, st.problem.tf);
    for (int k = 0; k < 100; ++k) {
        const V y = scaled_uniform(rng, st.problem.y0);
        const V f = st.problem.rhs(t(rng), y);
        for (const auto& c : st.problem.conservation) {
            EXPECT_LE(std::abs(c.w.dot(f)), 1e-12 * f.lpNorm<1>()) << c.label;
        }
    }
}
