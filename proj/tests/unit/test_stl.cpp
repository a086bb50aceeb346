#include "doctest.h"

#include <random>

#include "weakres/error.hpp"
#include "weakres/stl/monitor.hpp"

using namespace weakres;
using namespace weakres::stl;

namespace {

Signal altitude(std::vector<double> values) {
    Eigen::MatrixXd m(static_cast<Index>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i)
        m(static_cast<Index>(i), 0) = values[i];
    return Signal({"alt"}, m);
}

} // namespace

TEST_CASE("parse examples") {
    auto f = parse_stl("G[0,2](alt - 5 > 0)");
    CHECK(f == always({0, 2}, pred(AffineExpr::variable("alt") - 5.0)));
    CHECK(parse_stl("true") == truth());
    CHECK(parse_stl("(a > 0) U[1,3] (b > 0)") ==
          until({1, 3}, pred(AffineExpr::variable("a")), pred(AffineExpr::variable("b"))));
}

TEST_CASE("comparison sugar normalises to f > 0") {
    auto x = AffineExpr::variable("x");
    CHECK(parse_stl("x > 3") == pred(x - 3.0));
    CHECK(parse_stl("x >= 3") == pred(x - 3.0));
    CHECK(parse_stl("x < 3") == pred(AffineExpr(3.0) - x));
    CHECK(parse_stl("2*x + 1 <= x/2") == pred(AffineExpr(0.0) - x * 1.5 - 1.0));
    CHECK(parse_stl("x > 0 -> y > 0") ==
          disj(negate(pred(x)), pred(AffineExpr::variable("y"))));
    CHECK(parse_stl("a > 0 -> b > 0 -> c > 0") == parse_stl("a > 0 -> (b > 0 -> c > 0)"));
}

TEST_CASE("precedence") {
    CHECK(parse_stl("a > 0 | b > 0 & c > 0") == parse_stl("(a > 0) | ((b > 0) & (c > 0))"));
    CHECK(parse_stl("!a > 0 & b > 0") == parse_stl("(!(a > 0)) & (b > 0)"));
    CHECK(parse_stl("G[0,1] a > 0 U[0,2] b > 0") == parse_stl("(G[0,1](a > 0)) U[0,2] (b > 0)"));
    CHECK(parse_stl("((x + 1) > 0)") == parse_stl("x > -1"));
}

TEST_CASE("parse errors carry positions") {
    auto fails_at = [](const char* text, int line, int column) {
        try {
            parse_stl(text);
        } catch (const ParseError& e) {
            CHECK(e.line() == line);
            CHECK(e.column() == column);
            return;
        }
        FAIL("no parse error for " << text);
    };
    fails_at("G[2,1](x > 0)", 1, 3);
    fails_at("x > 0 &", 1, 8);
    fails_at("x * y > 0", 1, 3);
    fails_at("x > 0\n & X[0,1](y > 0)", 2, 4);
    CHECK_THROWS_AS(parse_stl("G[0,2]{0,1}(x > 0)"), ParseError);
    CHECK_THROWS_AS(parse_stl("x == 1"), ParseError);
    CHECK_THROWS_AS(parse_stl("G(x > 0)"), ParseError);
    CHECK_THROWS_WITH_AS(parse_stl("x > 0 W y > 0"), doctest::Contains("unknown operator"), ParseError);
}

TEST_CASE("golden robustness") {
    auto s = altitude({6.0, 3.0, 5.5});
    CHECK(robustness(parse_stl("G[0,2](alt - 5 > 0)"), s, 0) == -2.0);
    CHECK_FALSE(satisfied(parse_stl("G[0,2](alt - 5 > 0)"), s, 0));
    CHECK(robustness(parse_stl("F[0,2](alt - 5 > 0)"), s, 0) == 1.0);
    CHECK(satisfied(parse_stl("F[0,2](alt - 5 > 0)"), s, 0));
    CHECK(robustness(parse_stl("alt - 5 > 0"), altitude({5.0}), 0) == 0.0);
    CHECK(satisfied(parse_stl("alt - 5 > 0"), altitude({5.0}), 0));
    CHECK(robustness(truth(), s, 2) == 1000.0);
}

TEST_CASE("until") {
    Eigen::MatrixXd m(4, 2);
    m << 1, -1, 2, -2, 3, 5, -1, 7;
    Signal s({"a", "b"}, m);
    // t1 = 2: min(5, min(1, 2)) = 1 ; t1 = 3: min(7, min(1,2,3)) = 1 ; t1 = 1: min(-2, 1)
    CHECK(robustness(parse_stl("(a > 0) U[1,3] (b > 0)"), s, 0) == 1.0);
    CHECK(robustness(parse_stl("(a > 0) U[0,0] (b > 0)"), s, 0) == -1.0);
}

TEST_CASE("horizon") {
    CHECK(horizon(parse_stl("alt - 5 > 0")) == 0);
    CHECK(horizon(parse_stl("G[0,1] F[0,1] p > 0")) == 2);
    CHECK(horizon(parse_stl("G[0,2] p > 0")) == 2);
    CHECK(horizon(parse_stl("(a > 0) U[1,3] F[0,2] b > 0")) == 5);
    CHECK_THROWS_AS(robustness(parse_stl("G[0,3] alt > 0"), altitude({1, 2, 3}), 0), HorizonError);
    CHECK_THROWS_AS(robustness(parse_stl("z > 0"), altitude({1}), 0), InvalidInput);
}

namespace {

struct RandomFormulas {
    std::mt19937_64 rng;
    std::vector<std::string> vars{"a", "b"};

    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

    StlFormula leaf() {
        AffineExpr e(uniform(-3, 3) * 0.5);
        e.add_term(vars[static_cast<std::size_t>(uniform(0, 1))], uniform(1, 2));
        return pred(e);
    }

    StlFormula gen(int depth) {
        if (depth == 0)
            return leaf();
        int lo = uniform(0, 1);
        Interval w{lo, lo + uniform(0, 1)};
        switch (uniform(0, 6)) {
        case 0: return negate(gen(depth - 1));
        case 1: return conj(gen(depth - 1), gen(depth - 1));
        case 2: return disj(gen(depth - 1), gen(depth - 1));
        case 3: return always(w, gen(depth - 1));
        case 4: return eventually(w, gen(depth - 1));
        case 5: return until(w, gen(depth - 1), gen(depth - 1));
        default: return leaf();
        }
    }

    Signal signal(Index len) {
        Eigen::MatrixXd m(len, 2);
        for (Index i = 0; i < m.size(); ++i)
            m.data()[i] = uniform(-8, 8) * 0.5;
        return Signal(vars, m);
    }
};

} // namespace

TEST_CASE("robustness algebra on random formulas") {
    RandomFormulas g{std::mt19937_64(11)};
    for (int trial = 0; trial < 300; ++trial) {
        auto f = g.gen(3);
        auto h = g.gen(2);
        auto s = g.signal(horizon(f) + horizon(h) + 4);
        Index t = 1;
        double rf = robustness(f, s, t);
        double rh = robustness(h, s, t);
        CHECK(robustness(negate(f), s, t) == -rf);
        CHECK(robustness(conj(f, h), s, t) == std::min(rf, rh));
        CHECK(robustness(disj(f, h), s, t) == std::max(rf, rh));
        CHECK(robustness(negate(conj(f, h)), s, t) == robustness(disj(negate(f), negate(h)), s, t));
        CHECK(parse_stl(to_string(f)) == f);
        CHECK(to_string(parse_stl(to_string(f))) == to_string(f));

        double lo = 1e300, hi = -1e300;
        for (Index k = t + 1; k <= t + 2; ++k) {
            lo = std::min(lo, robustness(f, s, k));
            hi = std::max(hi, robustness(f, s, k));
        }
        CHECK(robustness(always({1, 2}, f), s, t) == lo);
        CHECK(robustness(eventually({1, 2}, f), s, t) == hi);
    }
}

TEST_CASE("monotonicity in a positively weighted variable") {
    // Formulas without negation whose predicates weight `a` nonnegatively.
    auto f = parse_stl("G[0,2](a - b > 0) | F[1,2](2*a + b > 1) & (a > 0) U[0,2] (a + b > 2)");
    RandomFormulas g{std::mt19937_64(5)};
    for (int trial = 0; trial < 100; ++trial) {
        auto s = g.signal(6);
        Eigen::MatrixXd up = s.samples();
        up.col(0).array() += Eigen::ArrayXd::LinSpaced(6, 0.0, 1.0);
        Signal s2(s.variables(), up);
        CHECK(robustness(f, s2, 0) >= robustness(f, s, 0));
    }
}

TEST_CASE("signal csv round trip") {
    std::istringstream in("# step_duration=0.5\nalt,v\n6,1\n3,-2.25\n");
    auto s = read_signal_csv(in);
    CHECK(s.step_duration() == 0.5);
    CHECK(s.length() == 2);
    CHECK(s.value(1, "v") == -2.25);
    std::ostringstream out;
    write_signal_csv(out, s);
    std::istringstream back(out.str());
    auto s2 = read_signal_csv(back);
    CHECK(s2.samples() == s.samples());
    CHECK(s2.variables() == s.variables());
    std::istringstream bad("a,b\n1,2\n3,x\n");
    CHECK_THROWS_AS(read_signal_csv(bad), ParseError);
    CHECK_THROWS_AS(Signal({"a", "a"}, Eigen::MatrixXd::Zero(1, 2)), InvalidInput);
}
