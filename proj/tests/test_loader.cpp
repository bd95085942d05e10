#include "lapode/loader.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lapode;
using testing_support::M;
using testing_support::V;

namespace {

std::string problem_path(const std::string& file) { return std::string(LAPODE_PROBLEM_DIR) + "/" + file; }

struct Thrown {
    ErrorKind kind;
    std::string what;
};

Thrown thrown(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return {e.kind(), e.what()};
    }
    ADD_FAILURE() << "no lapode::Error thrown";
    return {ErrorKind::Usage, ""};
}

const char* kMinimal = R"({
  "name": "tiny", "dim": 2, "y0": [1, 0], "tspan": [0, 1],
  "system": {"kind": "matrix-template",
             "entries": [{"row": 1, "col": 1, "monomials": [{"coeff": -1}]},
                         {"row": 2, "col": 1, "monomials": [{"coeff": 1}]}]}
})";

std::string with(std::string base, const std::string& from, const std::string& to) {
    const auto pos = base.find(from);
    EXPECT_NE(pos, std::string::npos) << from;
    return base.replace(pos, from.size(), to);
}

}  // namespace

TEST(Loader, MinimalTemplate) {
    const auto lp = parse_problem(kMinimal);
    const auto& p = lp.entry.problem;
    EXPECT_EQ(lp.kind, "matrix-template");
    EXPECT_EQ(p.dim, 2);
    EXPECT_TRUE(p.autonomous);
    EXPECT_TRUE(p.strict);
    EXPECT_FALSE(lp.rhs.has_value());
    M expected(2, 2);
    expected << -1, 0, 1, 0;
    EXPECT_EQ(p.matrix(0.0, p.y0), expected);
    EXPECT_EQ(lp.entry.controls.h0, 1.0 / 8);
}

TEST(Loader, ShippedRobertsonMatchesCatalog) {
    const auto lp = load_problem(problem_path("robertson.json"));
    const auto builtin = robertson();
    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
        const V y = testing_support::random_simplex(rng, 3);
        EXPECT_LE((lp.entry.problem.matrix(0.0, y) - builtin.problem.matrix(0.0, y)).cwiseAbs().maxCoeff(), 0.0);
    }
    const auto check = check_problem(lp, 100, 7);
    EXPECT_TRUE(check.ok()) << check.first_failure;
    ASSERT_TRUE(check.representation.has_value());
    EXPECT_LE(check.representation->max_residual, 1e-12);
}

TEST(Loader, ShippedNetworkReproducesBuiltinRhs) {
    const auto lp = load_problem(problem_path("robertson-network.json"));
    EXPECT_EQ(lp.kind, "reaction-network");
    const auto builtin = robertson();
    std::mt19937_64 rng(2);
    for (int k = 0; k < 50; ++k) {
        const V y = testing_support::random_simplex(rng, 3);
        const V f = builtin.problem.rhs(0.0, y);
        EXPECT_LE((lp.entry.problem.rhs(0.0, y) - f).norm(), 1e-12 * (1 + f.norm()));
        EXPECT_LE(((*lp.rhs)(0.0, y) - f).norm(), 1e-12 * (1 + f.norm()));
    }
    EXPECT_TRUE(check_problem(lp, 100, 3).ok());
}

TEST(Loader, ShippedSirMatchesCatalog) {
    const auto lp = load_problem(problem_path("sir.json"));
    const auto builtin = sir();
    std::mt19937_64 rng(3);
    for (int k = 0; k < 50; ++k) {
        const V y = testing_support::random_simplex(rng, 3);
        EXPECT_LE((lp.entry.problem.matrix(0.0, y) - builtin.problem.matrix(0.0, y)).cwiseAbs().maxCoeff(), 0.0);
    }
    EXPECT_TRUE(check_problem(lp, 100, 4).ok());
    EXPECT_EQ(lp.entry.controls.h0, 0.5);
}

TEST(Loader, PiecewiseRates) {
    const auto lp = load_problem(problem_path("sir-lockdown.json"));
    const auto& p = lp.entry.problem;
    EXPECT_FALSE(p.autonomous);
    V y(3);
    y << 0.5, 0.5, 0.0;
    EXPECT_NEAR(p.matrix(5.0, y)(1, 0), 2.28 * 0.5, 1e-15);
    EXPECT_NEAR(p.matrix(10.0, y)(1, 0), 2.28 * 0.3 * 0.5, 1e-15);
    EXPECT_NEAR(p.matrix(45.0, y)(1, 0), 2.28 * 0.8 * 0.5, 1e-15);
    EXPECT_TRUE(check_problem(lp, 50, 5).ok());
}

TEST(Loader, SigmaTimeFactor) {
    const std::string text = with(kMinimal, R"({"coeff": 1})", R"({"coeff": 1, "time_factor": "sigma2"})");
    const auto bad = thrown([&] { parse_problem(text); });
    EXPECT_EQ(bad.kind, ErrorKind::Structure);  // column 1 no longer sums to zero
    const std::string relaxed = with(text, R"("dim": 2)", R"("dim": 2, "strict": false)");
    const auto lp = parse_problem(relaxed);
    EXPECT_FALSE(lp.entry.problem.autonomous);
    const double t = 10 * 3600.0;
    EXPECT_NEAR(lp.entry.problem.matrix(t, V::Ones(2))(1, 0), std::pow(stratospheric_sigma(t), 2), 1e-15);
}

TEST(Loader, Errors) {
    EXPECT_EQ(thrown([] { load_problem(problem_path("missing.json")); }).kind, ErrorKind::Io);
    EXPECT_EQ(thrown([] { parse_problem("{not json"); }).kind, ErrorKind::Schema);

    const auto unknown = thrown([] { parse_problem(with(kMinimal, R"("row": 1,)", R"("row": 1, "rwo": 2,)")); });
    EXPECT_EQ(unknown.kind, ErrorKind::Schema);
    EXPECT_NE(unknown.what.find("system.entries[0]"), std::string::npos) << unknown.what;
    EXPECT_NE(unknown.what.find("'rwo'"), std::string::npos) << unknown.what;

    EXPECT_EQ(thrown([] { parse_problem(with(kMinimal, "[1, 0]", "[1, 0, 0]")); }).kind, ErrorKind::Dimension);
    EXPECT_EQ(thrown([] { parse_problem(with(kMinimal, R"("row": 1)", R"("row": 3)")); }).kind, ErrorKind::Dimension);
    EXPECT_EQ(thrown([] { parse_problem(with(kMinimal, R"("name": "tiny", )", "")); }).kind, ErrorKind::Schema);
    EXPECT_EQ(thrown([] { parse_problem(with(kMinimal, "matrix-template", "matrix")); }).kind, ErrorKind::Schema);
    EXPECT_EQ(thrown([] { parse_problem(with(kMinimal, "[0, 1]", "[1, 0]")); }).kind, ErrorKind::Schema);
    EXPECT_EQ(thrown([] { parse_problem(with(kMinimal, R"("coeff": -1})", R"("coeff": -1, "time_factor": "tau"})")); })
                  .kind,
              ErrorKind::Schema);
    const auto declared = thrown([] {
        parse_problem(with(with(kMinimal, R"("dim": 2)", R"("dim": 2, "autonomous": true, "strict": false)"),
                           R"({"coeff": 1})", R"({"coeff": 1, "time_factor": "sigma"})"));
    });
    EXPECT_EQ(declared.kind, ErrorKind::Schema);
    EXPECT_NE(declared.what.find("autonomous"), std::string::npos);

    // Corrupted sign pattern: positive diagonal entry, negative off-diagonal.
    const auto sign = thrown([] {
        parse_problem(with(kMinimal, R"({"row": 2, "col": 1, "monomials": [{"coeff": 1}]})",
                           R"({"row": 2, "col": 1, "monomials": [{"coeff": -1}]})"),
                      "bad.json");
    });
    EXPECT_EQ(sign.kind, ErrorKind::Structure);
    EXPECT_NE(sign.what.find("bad.json"), std::string::npos);
    EXPECT_NE(sign.what.find("(2,1)"), std::string::npos) << sign.what;
}

TEST(Loader, NetworkErrors) {
    const std::string net = R"({
      "name": "n", "dim": 2, "y0": [1, 0], "tspan": [0, 1],
      "system": {"kind": "reaction-network", "species": ["A", "B"],
                 "reactions": [{"reactants": {"A": 1}, "products": {"B": 1}, "rate": 2}]}
    })";
    EXPECT_NO_THROW(parse_problem(net));
    const auto empty = thrown([&] { parse_problem(with(net, R"(["A", "B"])", "[]")); });
    EXPECT_EQ(empty.kind, ErrorKind::Schema);
    EXPECT_NE(empty.what.find("system.species"), std::string::npos) << empty.what;
    EXPECT_EQ(thrown([&] { parse_problem(with(net, R"({"B": 1})", R"({"C": 1})")); }).kind, ErrorKind::Schema);
    EXPECT_EQ(thrown([&] { parse_problem(with(net, R"("rate": 2)", R"("rate": -2)")); }).kind, ErrorKind::Schema);
    EXPECT_EQ(thrown([&] { parse_problem(with(net, R"({"A": 1})", R"({})")); }).kind, ErrorKind::Structure);
    EXPECT_EQ(thrown([&] { parse_problem(with(net, R"(["A", "B"])", R"(["A", "A"])")); }).kind, ErrorKind::Schema);
}

TEST(CheckProblem, FlagsDisagreeingRhs) {
    const std::string text = R"({
      "name": "t", "dim": 2, "y0": [1, 0], "tspan": [0, 1],
      "system": {"kind": "matrix-template",
                 "entries": [{"row": 1, "col": 1, "monomials": [{"coeff": -1}]},
                             {"row": 2, "col": 1, "monomials": [{"coeff": 1}]}],
                 "rhs": [[{"coeff": -1, "powers": [1, 0]}], [{"coeff": 2, "powers": [1, 0]}]]}
    })";
    const auto check = check_problem(parse_problem(text), 20, 9);
    EXPECT_FALSE(check.representation_ok);
    EXPECT_FALSE(check.ok());
    EXPECT_NE(check.first_failure.find("disagree"), std::string::npos);
}

TEST(CheckProblem, Deterministic) {
    const auto lp = load_problem(problem_path("robertson.json"));
    const auto a = check_problem(lp, 30, 11);
    const auto b = check_problem(lp, 30, 11);
    EXPECT_EQ(a.representation->max_residual, b.representation->max_residual);
    EXPECT_EQ(a.representation->worst_y, b.representation->worst_y);
}
