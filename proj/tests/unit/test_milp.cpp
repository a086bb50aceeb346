#include "doctest.h"

#include <random>

#include "../common/milp_oracle.hpp"
#include "weakres/error.hpp"
#include "weakres/milp/lp_format.hpp"
#include "weakres/milp/solver.hpp"

using namespace weakres;
using namespace weakres::milp;

TEST_CASE("solver examples") {
    {
        MilpProblem p;
        auto x = p.add_continuous("x", 0, 10);
        p.add_constraint(LinearExpr::var(x), Relation::Le, 5);
        p.set_objective(Sense::Maximize, LinearExpr::var(x));
        auto s = solve(p);
        REQUIRE(s.status == Status::Sat);
        CHECK(s.value(x) == doctest::Approx(5.0));
        CHECK(s.objective == doctest::Approx(5.0));
        auto text = export_lp(p);
        CHECK(text.find("Maximize") != std::string::npos);
        CHECK(text.find("x <= 5") != std::string::npos);
    }
    {
        MilpProblem p;
        auto x = p.add_binary("x");
        auto y = p.add_binary("y");
        p.add_constraint(LinearExpr::var(x) + LinearExpr::var(y), Relation::Ge, 1.5);
        p.set_objective(Sense::Minimize, LinearExpr::var(x) + LinearExpr::var(y));
        auto s = solve(p);
        REQUIRE(s.status == Status::Sat);
        CHECK(s.objective == doctest::Approx(2.0));
        auto text = export_lp(p);
        CHECK(text.find("Binaries\n x\n y\n") != std::string::npos);
    }
    {
        MilpProblem p;
        auto x = p.add_continuous("x", -kInf, kInf);
        p.add_constraint(LinearExpr::var(x), Relation::Ge, 1);
        p.add_constraint(LinearExpr::var(x), Relation::Le, 0);
        CHECK(solve(p).status == Status::Unsat);
    }
    {
        MilpProblem p;
        auto x = p.add_continuous("x", 0, kInf);
        auto y = p.add_continuous("y", 0, kInf);
        p.add_constraint(LinearExpr::var(x) - LinearExpr::var(y), Relation::Le, 1);
        p.set_objective(Sense::Maximize, LinearExpr::var(x));
        CHECK(solve(p).status == Status::Unbounded);
    }
}

TEST_CASE("problem validation") {
    MilpProblem p;
    CHECK_THROWS_AS(p.add_continuous("1x", 0, 1), InvalidInput);
    auto x = p.add_continuous("x", 0, 1);
    CHECK_THROWS_AS(p.add_continuous("x", 0, 1), InvalidInput);
    CHECK_THROWS_AS(p.add_constraint(LinearExpr::var(7), Relation::Le, 1), InvalidInput);
    CHECK_THROWS_AS(p.add_constraint(LinearExpr::var(x, std::nan("")), Relation::Le, 1), InvalidInput);
}

TEST_CASE("limits") {
    // Knapsack-like instance with a node cap of one: root LP is fractional.
    MilpProblem p;
    LinearExpr w, v;
    for (int i = 0; i < 8; ++i) {
        auto b = p.add_binary("b" + std::to_string(i));
        w.add(b, 3 + i);
        v.add(b, 5 + (i * 7) % 4);
    }
    p.add_constraint(w, Relation::Le, 17.5);
    p.set_objective(Sense::Maximize, v);
    SolveLimits lim;
    lim.max_nodes = 1;
    CHECK_THROWS_AS(solve(p, lim), LimitError);
    std::vector<std::string> lines;
    SolveLimits logged;
    logged.log = [&](const std::string& s) { lines.push_back(s); };
    auto s = solve(p, logged);
    CHECK(s.status == Status::Sat);
    CHECK_FALSE(lines.empty());
    CHECK(s.objective == doctest::Approx(oracle::enumerate(p).objective));
}

TEST_CASE("random problems against enumeration") {
    std::mt19937_64 rng(2024);
    int sat = 0;
    for (int trial = 0; trial < 300; ++trial) {
        auto p = oracle::random_problem(rng, 8);
        auto ref = oracle::enumerate(p);
        auto s = solve(p);
        CAPTURE(trial);
        CAPTURE(export_lp(p));
        REQUIRE((s.status == Status::Sat) == ref.feasible);
        if (ref.feasible) {
            ++sat;
            CHECK(std::abs(s.objective - ref.objective) <= 1e-6);
            CHECK(max_violation(p, s.values) <= 1e-6);
        }
    }
    CHECK(sat > 50);
}

TEST_CASE("lp format round trip") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        auto p = oracle::random_problem(rng, 6);
        if (trial % 3 == 0) {
            auto f = p.add_continuous("free_var", -kInf, kInf);
            p.add_constraint(LinearExpr::var(f, 2.5) + LinearExpr::var(0), Relation::Ge, -1.25);
        }
        auto text = export_lp(p);
        auto q = parse_lp(text);
        REQUIRE(q.num_variables() == p.num_variables());
        REQUIRE(q.num_constraints() == p.num_constraints());
        for (int j = 0; j < p.num_variables(); ++j) {
            CHECK(q.variable(j).name == p.variable(j).name);
            CHECK(q.variable(j).kind == p.variable(j).kind);
            CHECK(q.variable(j).lo == p.variable(j).lo);
            CHECK(q.variable(j).hi == p.variable(j).hi);
        }
        for (int r = 0; r < p.num_constraints(); ++r) {
            const auto& a = p.constraints()[r];
            const auto& b = q.constraints()[r];
            CHECK(a.name == b.name);
            CHECK(a.coeffs == b.coeffs);
            CHECK(a.rel == b.rel);
            CHECK(a.rhs == b.rhs);
        }
        CHECK(q.objective() == p.objective());
        CHECK(q.sense() == p.sense());
        CHECK(export_lp(q) == text);
    }
    CHECK_THROWS_AS(parse_lp("Minimize\n obj: x\nSubject To\n c: x ? 3\nEnd"), weakres::ParseError);
}
