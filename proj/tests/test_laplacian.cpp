#include "lapode/laplacian.hpp"
#include "lapode/expm.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace lapode;
using testing_support::M;
using testing_support::V;

namespace {

M robertson_matrix(const V& y) {
    M a = M::Zero(3, 3);
    a << -0.04, 1e4 * y(2), 0, 0.04, -3e7 * y(1) - 1e4 * y(2), 0, 0, 3e7 * y(1), 0;
    return a;
}

M robertson_nonlap_matrix(const V& y) {
    M a = M::Zero(3, 3);
    a << -0.04, 0, 1e4 * y(1), 0.04, -3e7 * y(1), -1e4 * y(1), 0, 3e7 * y(1), 0;
    return a;
}

M sir_matrix(double i, double r0) {
    M a(3, 3);
    a << -r0 * i, 0, 0, r0 * i, -1, 0, 0, 1, 0;
    return a;
}

}  // namespace

TEST(Validate, TwoByTwoStrict) {
    M a(2, 2);
    a << -1, 2, 1, -2;
    const auto rep = validate_laplacian(a, true);
    EXPECT_TRUE(rep.ok) << rep.describe();
}

TEST(Validate, RobertsonAtInitialState) {
    EXPECT_TRUE(validate_laplacian(robertson_matrix(V::Unit(3, 0)), true).ok);
}

TEST(Validate, RobertsonAlternativeFormRejected) {
    V y(3);
    y << 0.5, 0.1, 0.4;
    const auto rep = validate_laplacian(robertson_nonlap_matrix(y), false);
    ASSERT_FALSE(rep.ok);
    ASSERT_EQ(rep.violations.size(), 1u);
    EXPECT_EQ(rep.violations[0].kind, ViolationKind::OffDiagonalNegative);
    EXPECT_EQ(rep.violations[0].row, 1);
    EXPECT_EQ(rep.violations[0].col, 2);
    EXPECT_DOUBLE_EQ(rep.violations[0].magnitude, -1e4 * 0.1);
    EXPECT_NE(rep.describe().find("(2,3)"), std::string::npos);
}

TEST(Validate, ReportsEveryViolation) {
    M a(3, 3);
    a << 1, -1, 0, 0, -1, 0, 0, 0, 0;
    const auto rep = validate_laplacian(a, true);
    ASSERT_FALSE(rep.ok);
    // (1,1) positive, (1,2) negative, column 1 sum 1, column 2 sum -2
    EXPECT_EQ(rep.violations.size(), 4u);
}

TEST(Validate, NonSquareIsDimensionError) {
    M a(2, 3);
    a.setZero();
    try {
        validate_laplacian(a, true);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Dimension);
    }
}

TEST(Validate, ToleranceIsRelative) {
    M a(2, 2);
    a << -1e6, 1e6, 1e6, -1e6;
    a(0, 0) += 1e-7;  // column sum 1e-7, threshold 1e-12 * (1 + 2e6)
    EXPECT_TRUE(validate_laplacian(a, true).ok);
    a(0, 0) += 1e-4;
    EXPECT_FALSE(validate_laplacian(a, true).ok);
}

TEST(Shift, Examples) {
    const auto z = shift_decompose(M::Zero(3, 3));
    EXPECT_EQ(z.a_star, 0.0);
    EXPECT_TRUE(z.a_tilde.isZero(0));

    M a(2, 2);
    a << -1, 2, 1, -2;
    const auto s = shift_decompose(a);
    EXPECT_EQ(s.a_star, -2.0);
    M expected(2, 2);
    expected << 1, 2, 1, 0;
    EXPECT_EQ(s.a_tilde, expected);

    V y(3);
    y << 1, 1e-5, 1e-2;
    EXPECT_NEAR(shift_decompose(robertson_matrix(y)).a_star, -400.0, 1e-9);
}

TEST(Gerschgorin, Examples) {
    EXPECT_EQ(gerschgorin_column_bound(M::Zero(2, 2)), 0.0);
    M a(2, 2);
    a << -1, 2, 1, -2;
    EXPECT_EQ(gerschgorin_column_bound(a), 4.0);
    EXPECT_NEAR(gerschgorin_column_bound(sir_matrix(0.5, 2.28)), 2.28, 1e-15);
}

TEST(GraphLaplacianType, ConstructionValidates) {
    M a(2, 2);
    a << -1, 2, 1, -2;
    GraphLaplacian<double> g(a);
    EXPECT_EQ(g.size(), 2);
    EXPECT_EQ(g.shift().a_star, -2.0);
    a(0, 1) = -0.5;
    try {
        GraphLaplacian<double> bad(a);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Structure);
    }
    M nonfinite = M::Zero(2, 2);
    nonfinite(0, 1) = std::nan("");
    EXPECT_THROW(GraphLaplacian<double>{nonfinite}, Error);
}

TEST(ConservationVectorType, RejectsNegativeOrZero) {
    EXPECT_THROW(ConservationVector<double>(V::Zero(3), "z"), Error);
    V w(2);
    w << 1, -1;
    EXPECT_THROW(ConservationVector<double>(w, "n"), Error);
    EXPECT_NO_THROW(ConservationVector<double>(V::Ones(2), "ok"));
}

TEST(Properties, RandomStrictLaplaciansHaveZeroColumnSums) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> size(2, 20);
    std::uniform_real_distribution<double> lscale(-3, 3);
    for (int trial = 0; trial < 1000; ++trial) {
        const M a = testing_support::random_laplacian(rng, size(rng), std::pow(10.0, lscale(rng)));
        const auto rep = validate_laplacian(a, true);
        ASSERT_TRUE(rep.ok) << rep.describe();
        const double scale = 1.0 + max_column_norm(a);
        EXPECT_LE((V::Ones(a.rows()).transpose() * a).cwiseAbs().maxCoeff(), 1e-12 * scale);

        const auto s = shift_decompose(a);
        EXPECT_GE(s.a_tilde.minCoeff(), 0.0);
        const double eps = std::numeric_limits<double>::epsilon();
        EXPECT_LE((s.reconstruct() - a).cwiseAbs().maxCoeff(), 4 * eps * a.cwiseAbs().maxCoeff());
    }
}

TEST(Properties, SpectrumInClosedLeftHalfPlane) {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> size(2, 20);
    for (int trial = 0; trial < 200; ++trial) {
        const M a = testing_support::random_laplacian(rng, size(rng));
        Eigen::EigenSolver<M> es(a, false);
        const Eigen::VectorXd re = es.eigenvalues().real();
        Index top = 0;
        const double max_re = re.maxCoeff(&top);
        EXPECT_NEAR(max_re, 0.0, 1e-8);
        for (Index i = 0; i < re.size(); ++i) {
            if (i != top) {
                EXPECT_LE(re(i), 1e-8);
            }
        }
    }
}

TEST(Properties, SymmetricLaplacianNormDecay) {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> size(2, 15);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const Index n = size(rng);
        const M a = testing_support::random_symmetric_laplacian(rng, n);
        V y0(n);
        for (Index i = 0; i < n; ++i) {
            y0(i) = u(rng);
        }
        for (double h : {0.1, 1.0, 10.0}) {
            EXPECT_LE(expm_action(a, h, y0).norm(), y0.norm() * (1 + 1e-14));
        }
    }
}
