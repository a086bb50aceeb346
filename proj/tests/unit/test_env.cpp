#include "doctest.h"

#include <random>

#include "weakres/env/lower.hpp"
#include "weakres/env/model.hpp"
#include "weakres/error.hpp"
#include "weakres/milp/solver.hpp"

using namespace weakres;
using namespace weakres::env;

namespace {

const char* kBattery = R"(
// battery drains while moving
const drain = 1.0;
state battery in [0, 100];
action move in [0, 1] binary;
init battery = 100;
next(battery) = if move then battery - drain else battery;
)";

const char* kPosition = R"(
state x in [-50, 50];
action vx in [-2, 2];
init x = 0;
x' = x + 1.0 * vx;
)";

} // namespace

TEST_CASE("model parsing") {
    auto b = parse_model(kBattery);
    REQUIRE(b.num_states() == 1);
    CHECK(b.rule(0).switched());
    CHECK(*b.rule(0).guard == "move");
    CHECK(b.actions()[0].kind == ActionKind::Binary);
    CHECK(b.initial_state()(0) == 100.0);

    auto plain = parse_model("state battery in [0,100]; next(battery) = battery - 1.0;");
    CHECK_FALSE(plain.rule(0).switched());
    CHECK(plain.rule(0).then_expr == AffineExpr::variable("battery") - 1.0);

    auto p = parse_model(kPosition);
    CHECK(p.then_action()(0, 0) == 1.0);
    CHECK(parse_model(print_model(p)).then_state() == p.then_state());
    auto again = parse_model(print_model(b));
    CHECK(print_model(again) == print_model(b));

    CHECK_THROWS_AS(parse_model("state x in [0,1]; state y in [0,1]; next(x) = x;"), ParseError);
    CHECK_THROWS_AS(parse_model("state x in [0,1]; next(x) = z;"), ParseError);
    CHECK_THROWS_AS(parse_model("state x in [0,1]; action u in [0,1]; next(x) = x * u;"), ParseError);
    CHECK_THROWS_AS(parse_model("state x in [0,1]; action u in [0,1]; next(x) = if u then x else 0;"),
                    ParseError);
    CHECK_THROWS_AS(parse_model("state x in [0,1]; init x = 3; next(x) = x;"), ParseError);
    CHECK_THROWS_AS(parse_model("state x in [0,1]; next(x) = x; next(x) = x;"), ParseError);
}

TEST_CASE("step and predict") {
    auto b = parse_model(kBattery);
    Eigen::VectorXd q(1), on(1), off(1);
    q << 100;
    on << 1;
    off << 0;
    CHECK(step(b, q, on)(0) == 99.0);
    CHECK(step(b, q, off)(0) == 100.0);
    auto s = predict(b, q, Eigen::MatrixXd::Ones(3, 1));
    REQUIRE(s.length() == 4);
    CHECK(s.samples().col(0) == Eigen::Vector4d(100, 99, 98, 97));

    auto p = parse_model(kPosition);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(1);
    CHECK(step(p, x0, Eigen::VectorXd::Zero(1))(0) == 0.0);
    auto one = predict(p, x0, Eigen::MatrixXd::Zero(1, 1));
    CHECK(one.length() == 2);
    CHECK(one(0, 0) == one(1, 0));
    auto two = predict(p, x0, Eigen::MatrixXd::Constant(2, 1, 2.0));
    CHECK(two.samples().col(0) == Eigen::Vector3d(0, 2, 4));

    std::vector<std::string> clamped;
    Eigen::VectorXd edge(1);
    edge << 49.5;
    CHECK(step(p, edge, Eigen::VectorXd::Constant(1, 2.0), &clamped)(0) == 50.0);
    CHECK(clamped == std::vector<std::string>{"x"});
    CHECK_THROWS_AS(step(p, edge, Eigen::VectorXd::Constant(1, 3.0)), InvalidInput);
    CHECK_THROWS_AS(step(b, q, Eigen::VectorXd::Constant(1, 0.5)), InvalidInput);
}

TEST_CASE("derived variables") {
    auto m = parse_model(R"(
state x in [-10, 10];
state y in [-10, 10];
action u in [-1, 1];
next(x) = x + u;
next(y) = y;
derived far = max(x - y, y - x);
derived near = min(x, y, 3);
)");
    Eigen::VectorXd q(2);
    q << 1, -2;
    auto d = derived_values(m, q);
    CHECK(d(0) == 3.0);
    CHECK(d(1) == -2.0);
    auto s = predict(m, q, Eigen::MatrixXd::Ones(2, 1));
    CHECK(s.variables() == std::vector<std::string>{"x", "y", "far", "near"});
    CHECK(s.value(2, "far") == 5.0);
}

TEST_CASE("lowering counts") {
    auto m = parse_model(kPosition);
    milp::MilpProblem p;
    auto low = lower_to_constraints(m, 0, 2, p);
    CHECK(p.num_variables() == 5);
    CHECK(p.num_constraints() == 2);
    CHECK(low.states.size() == 3);
    CHECK(low.actions.size() == 2);

    auto b = parse_model(kBattery);
    milp::MilpProblem q;
    lower_to_constraints(b, 0, 1, q);
    CHECK(q.num_constraints() == 4);
    CHECK(q.num_integer() == 1);
}

TEST_CASE("switched lowering by guard enumeration") {
    auto b = parse_model(kBattery);
    for (int g = 0; g <= 1; ++g) {
        milp::MilpProblem p;
        auto low = lower_to_constraints(b, 0, 1, p);
        p.set_bounds(low.states[0][0], 40, 40);
        p.set_bounds(low.actions[0][0], g, g);
        for (int sense = 0; sense < 2; ++sense) {
            p.set_objective(sense ? milp::Sense::Maximize : milp::Sense::Minimize,
                            milp::LinearExpr::var(low.states[1][0]));
            auto s = milp::solve(p);
            REQUIRE(s.status == milp::Status::Sat);
            CHECK(s.value(low.states[1][0]) == doctest::Approx(g ? 39.0 : 40.0));
        }
    }
}

TEST_CASE("battery chain lowering matches predict") {
    auto b = parse_model(kBattery);
    milp::MilpProblem p;
    auto low = lower_to_constraints(b, 0, 3, p);
    p.set_bounds(low.states[0][0], 100, 100);
    for (auto& row : low.actions)
        p.set_bounds(row[0], 1, 1);
    auto s = milp::solve(p);
    REQUIRE(s.status == milp::Status::Sat);
    for (int k = 0; k <= 3; ++k)
        CHECK(s.value(low.states[static_cast<std::size_t>(k)][0]) == doctest::Approx(100.0 - k));
}

TEST_CASE("symbolic and concrete agree on random action sequences") {
    auto m = parse_model(R"(
state x in [-100, 100];
state e in [0, 100];
action v in [-3, 3];
action fast in [0, 1] binary;
init x = 0;
init e = 80;
next(x) = if fast then x + 2*v else x + v;
next(e) = if fast then e - 2 else e - 0.5;
)");
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> v(-3, 3);
    for (int trial = 0; trial < 30; ++trial) {
        int N = 4;
        Eigen::MatrixXd acts(N, 2);
        for (int k = 0; k < N; ++k) {
            acts(k, 0) = std::round(v(rng) * 10) / 10;
            acts(k, 1) = static_cast<double>(rng() % 2);
        }
        auto q0 = m.initial_state();
        auto sig = predict(m, q0, acts);
        Eigen::MatrixXd lo, hi;
        reachable_boxes(m, q0, N, lo, hi);
        LowerOptions opt;
        opt.state_lo = &lo;
        opt.state_hi = &hi;
        milp::MilpProblem p;
        auto low = lower_to_constraints(m, 0, N, p, opt);
        for (int k = 0; k < N; ++k)
            for (int j = 0; j < 2; ++j)
                p.set_bounds(low.actions[k][j], acts(k, j), acts(k, j));
        auto s = milp::solve(p);
        REQUIRE(s.status == milp::Status::Sat);
        for (int k = 0; k <= N; ++k)
            for (int i = 0; i < 2; ++i) {
                CHECK(std::abs(s.value(low.states[k][i]) - sig(k, i)) <= 1e-6);
                CHECK(sig(k, i) >= lo(k, i) - 1e-9);
                CHECK(sig(k, i) <= hi(k, i) + 1e-9);
            }
    }
}
