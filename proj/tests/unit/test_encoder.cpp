#include "doctest.h"

#include <random>

#include "weakres/env/model.hpp"
#include "weakres/error.hpp"
#include "weakres/milp/encoder.hpp"
#include "weakres/milp/solver.hpp"

using namespace weakres;
using namespace weakres::milp;
using stl::Signal;

namespace {

Signal column(const std::string& name, std::vector<double> values) {
    Eigen::MatrixXd m(static_cast<Index>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i)
        m(static_cast<Index>(i), 0) = values[i];
    return Signal({name}, m);
}

// Optimum of rho in the given direction, everything else fixed.
double extreme(MilpProblem p, const Term& rho, Sense sense) {
    p.set_objective(sense, rho.expr);
    auto sol = solve(p);
    REQUIRE(sol.status == Status::Sat);
    return sol.objective;
}

int count_binaries(const MilpProblem& p) {
    int n = 0;
    for (const auto& v : p.variables())
        n += v.kind == VarKind::Binary;
    return n;
}

struct RandomFormulas {
    std::mt19937_64 rng;
    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

    std::string leaf(bool annotate) {
        std::string s = "(" + std::string(uniform(0, 1) ? "a" : "2*b - a") + " > " +
                        std::to_string(uniform(-2, 2)) + ")";
        if (annotate && uniform(0, 1))
            s += "{" + std::to_string(uniform(0, 2)) + "}";
        return s;
    }

    std::string gen(int depth, bool annotate) {
        if (depth == 0)
            return leaf(annotate);
        int lo = uniform(0, 1), hi = lo + uniform(1, 2);
        std::string win = "[" + std::to_string(lo) + "," + std::to_string(hi) + "]";
        std::string ann;
        if (annotate && uniform(0, 1)) {
            int p = uniform(0, 1);
            ann = "{" + std::to_string(p) + "," + std::to_string(uniform(0, hi - lo - p)) + "}";
        }
        switch (uniform(0, 6)) {
        case 0: return "!(" + gen(depth - 1, annotate) + ")";
        case 1: return "(" + gen(depth - 1, annotate) + " & " + gen(depth - 1, annotate) + ")";
        case 2: return "(" + gen(depth - 1, annotate) + " | " + gen(depth - 1, annotate) + ")";
        case 3: return "G" + win + ann + "(" + gen(depth - 1, annotate) + ")";
        case 4: return "F" + win + ann + "(" + gen(depth - 1, annotate) + ")";
        case 5: return "(" + gen(depth - 1, annotate) + " U" + win + " " + gen(depth - 1, annotate) + ")";
        default: return leaf(annotate);
        }
    }

    Signal signal(Index len) {
        Eigen::MatrixXd m(len, 2);
        for (Index i = 0; i < m.size(); ++i)
            m.data()[i] = uniform(-6, 6) * 0.5;
        return Signal({"a", "b"}, m);
    }
};

template <class F> void for_each_theta(const std::vector<int>& bounds, F&& fn) {
    std::vector<int> v(bounds.size(), 0);
    for (;;) {
        fn(v);
        std::size_t i = 0;
        while (i < v.size() && v[i] == bounds[i])
            v[i++] = 0;
        if (i == v.size())
            return;
        ++v[i];
    }
}

} // namespace

TEST_CASE("predicate encoding") {
    MilpProblem p;
    auto s = column("alt", {6.0, 3.0, 5.5});
    auto sig = signal_variables(p, s, -100, 100);
    auto rho = encode_robustness(p, stl::parse_stl("alt - 5 > 0"), sig, 3, 0);
    CHECK(count_binaries(p) == 0);
    CHECK(extreme(p, rho, Sense::Minimize) == doctest::Approx(1.0));
    CHECK(extreme(p, rho, Sense::Maximize) == doctest::Approx(1.0));
}

TEST_CASE("two-step always builds one two-way min") {
    MilpProblem p;
    auto sig = signal_variables(p, column("alt", {6.0, 3.0}), -100, 100);
    auto rho = encode_robustness(p, stl::parse_stl("G[0,1](alt - 5 > 0)"), sig, 2, 0);
    CHECK(count_binaries(p) == 2);
    int one_hot = 0;
    for (const auto& c : p.constraints())
        one_hot += c.rel == Relation::Eq && c.rhs == 1.0 && c.coeffs.size() == 2 &&
                   p.variable(c.coeffs.front().first).kind == VarKind::Binary;
    CHECK(one_hot == 1);
    CHECK(extreme(p, rho, Sense::Minimize) == doctest::Approx(-2.0));
    CHECK(extreme(p, rho, Sense::Maximize) == doctest::Approx(-2.0));
}

TEST_CASE("pruning drops dominated arguments") {
    MilpProblem p;
    VarId a = p.add_continuous("a", 0, 1);
    VarId b = p.add_continuous("b", 5, 6);
    RobustnessEncoder enc(p, {}, 0);
    auto m = enc.min_of({Term::variable(a, 0, 1), Term::variable(b, 5, 6), Term::constant(3)});
    CHECK(m.expr == LinearExpr::var(a));
    CHECK(count_binaries(p) == 0);
    auto c = enc.min_of({Term::constant(4), Term::constant(-2)});
    CHECK(c.is_constant());
    CHECK(c.expr.constant() == -2);
}

TEST_CASE("encoding agrees with the monitor on random formulas") {
    RandomFormulas g{std::mt19937_64(17)};
    for (int trial = 0; trial < 60; ++trial) {
        auto f = stl::parse_stl(g.gen(2, false));
        Index len = stl::horizon(f) + 2;
        auto s = g.signal(len);
        MilpProblem p;
        auto sig = signal_variables(p, s, -20, 20);
        auto rho = encode_robustness(p, f, sig, len, 1);
        double want = stl::robustness(f, s, 1);
        CAPTURE(stl::to_string(f));
        CHECK(extreme(p, rho, Sense::Minimize) == doctest::Approx(want));
        CHECK(extreme(p, rho, Sense::Maximize) == doctest::Approx(want));
    }
}

TEST_CASE("weakened robustness examples") {
    {
        MilpProblem p;
        auto sig = signal_variables(p, column("alt", {4.0}), -100, 100);
        auto w = encode_weak_robustness(p, weak::parse_weakstl("(alt - 5 > 0){3}"), sig, 1, 0);
        REQUIRE(w.theta.size() == 1);
        p.set_bounds(w.theta[0], 3, 3);
        CHECK(extreme(p, w.rho, Sense::Minimize) == doctest::Approx(2.0));
    }
    {
        MilpProblem p;
        auto sig = signal_variables(p, column("alt", {6.0, 3.0, 5.5, 7.0, 7.0}), -100, 100);
        auto w = encode_weak_robustness(p, weak::parse_weakstl("G[0,2]{0,2}(alt - 5 > 0)"), sig, 5, 0);
        REQUIRE(w.theta.size() == 2);
        p.set_bounds(w.theta[0], 0, 0);
        p.set_bounds(w.theta[1], 2, 2);
        CHECK(extreme(p, w.rho, Sense::Maximize) == doctest::Approx(1.0));
        CHECK(extreme(p, w.rho, Sense::Minimize) == doctest::Approx(1.0));
    }
}

TEST_CASE("weak encoding agrees with instantiation for every theta") {
    RandomFormulas g{std::mt19937_64(23)};
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        auto f = weak::parse_weakstl(g.gen(2, true));
        auto bounds = weak::theta_bounds(f);
        if (bounds.empty() || bounds.size() > 4)
            continue;
        Index len = weak::max_horizon(f) + 1;
        auto s = g.signal(len);
        MilpProblem p;
        auto sig = signal_variables(p, s, -20, 20);
        auto w = encode_weak_robustness(p, f, sig, len, 0);
        CAPTURE(weak::to_string(f));
        for_each_theta(bounds, [&](const std::vector<int>& v) {
            MilpProblem q = p;
            for (std::size_t i = 0; i < v.size(); ++i)
                q.set_bounds(w.theta[i], v[i], v[i]);
            std::optional<double> want;
            try {
                want = stl::robustness(weak::instantiate(f, weak::Theta(v, bounds)), s, 0);
            } catch (const InvalidInput&) {
                // An emptied window under strengthening is not a valid choice.
            }
            q.set_objective(Sense::Minimize, w.rho.expr);
            auto lo = solve(q);
            if (!want) {
                CHECK(lo.status == Status::Unsat);
                return;
            }
            REQUIRE(lo.status == Status::Sat);
            CHECK(lo.objective == doctest::Approx(*want));
            q.set_objective(Sense::Maximize, w.rho.expr);
            CHECK(solve(q).objective == doctest::Approx(*want));
        });
        ++checked;
    }
    CHECK(checked > 15);
}

TEST_CASE("resolution encoding on the one-dimensional toy") {
    auto model = env::parse_model("state x in [-10, 10]; action v in [-1, 1]; init x = 0; x' = x + v;");
    auto phi = weak::parse_weakstl("G[0,2](x > 1){2}");
    auto psi = weak::parse_weakstl("G[0,2](x < -1){2}");
    auto past = column("x", {0.0});
    auto enc = encode_resolution(phi, psi, model, past, 3);
    CHECK(enc.t == 0);
    CHECK(enc.theta_phi.size() == 1);
    auto sol = solve(enc.problem);
    REQUIRE(sol.status == Status::Sat);
    CHECK(sol.objective == doctest::Approx(2.0));
    CHECK(sol.value(enc.theta_phi[0]) + sol.value(enc.theta_psi[0]) == doctest::Approx(2.0));

    CHECK_THROWS_AS(encode_resolution(phi, psi, model, past, 1), HorizonError);
    CHECK_THROWS_AS(encode_resolution(phi, psi, model, column("y", {0.0}), 3), InvalidInput);

    // Unweakenable conflict.
    auto hard = encode_resolution(weak::parse_weakstl("G[0,2](x > 1)"), weak::parse_weakstl("G[0,2](x < -1)"),
                                  model, past, 3);
    CHECK(solve(hard.problem).status == Status::Unsat);

    // Past samples are fixed and the evaluation step is the last one.
    auto later = encode_resolution(phi, psi, model, column("x", {0.0, 1.0, 0.5}), 3);
    CHECK(later.t == 2);
    auto s2 = solve(later.problem);
    REQUIRE(s2.status == Status::Sat);
    CHECK(s2.objective == doctest::Approx(3.0));
    CHECK(solve(encode_resolution(phi, psi, model, column("x", {0.0, 2.0}), 3).problem).status == Status::Unsat);
}
