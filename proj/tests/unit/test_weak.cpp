#include "doctest.h"

#include <random>

#include "weakres/error.hpp"
#include "weakres/weak/weakstl.hpp"

using namespace weakres;
using namespace weakres::stl;
using namespace weakres::weak;

namespace {

Signal altitude(std::vector<double> values) {
    Eigen::MatrixXd m(static_cast<Index>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i)
        m(static_cast<Index>(i), 0) = values[i];
    return Signal({"alt"}, m);
}

} // namespace

TEST_CASE("weakSTL parsing") {
    auto f = parse_weakstl("G[0,2]{0,2}(alt - 5 > 0)");
    REQUIRE(f.root().window_slack);
    CHECK(f.root().window_slack->left == 0);
    CHECK(f.root().window_slack->right == 2);
    CHECK(f.root().interval == Interval{0, 2});
    CHECK_FALSE(f.root().lhs->pred_slack);

    auto plain = parse_weakstl("G[0,2](alt - 5 > 0)");
    CHECK_FALSE(has_annotations(plain.root()));
    CHECK(strip(f) == parse_stl("G[0,2](alt - 5 > 0)"));

    auto p = parse_weakstl("(alt - 5 > 0){3}");
    REQUIRE(p.root().pred_slack);
    CHECK(p.root().pred_slack->bound == 3);
    CHECK(parse_weakstl("alt > 5{3}") == p);

    auto scaled = parse_weakstl("(x > 0){4*2.5}");
    CHECK(scaled.root().pred_slack->scale == 2.5);
    CHECK(parse_weakstl(to_string(scaled)) == scaled);

    CHECK_THROWS_AS(parse_weakstl("(a > 0) U[0,2]{1,1} (b > 0)"), ParseError);
    CHECK_THROWS_AS(parse_weakstl("(alt > 5){-1}"), ParseError);
    CHECK_THROWS_AS(parse_weakstl("G[0,2]{1,-1}(alt > 5)"), ParseError);
    CHECK_THROWS_AS(parse_weakstl("(a > 0 & b > 0){2}"), ParseError);
    CHECK_THROWS_AS(parse_weakstl("G[0,2]{2,1}(alt > 5)"), InvalidInput);
}

TEST_CASE("parameter counting") {
    CHECK(weaken_param_count(parse_weakstl("true")) == 0);
    CHECK(weaken_param_count(parse_weakstl("G[0,2]{0,2}(alt - 5 > 0)")) == 2);
    CHECK(weaken_param_count(parse_weakstl("(p > 0){2} & (q > 0){1}")) == 2);
    CHECK(weaken_param_count(parse_weakstl("!F[0,1]{1,1}(p > 0){2} U[0,1] (q > 0){1}")) == 4);
    auto params = parameters(parse_weakstl("!F[0,1]{1,3}(p > 0){2} | (q > 0){1}"));
    REQUIRE(params.size() == 4);
    CHECK(params[0].kind == ParamKind::WindowLeft);
    CHECK(params[1].bound == 3);
    CHECK(params[2].kind == ParamKind::PredicateSlack);
    CHECK(params[2].polarity == Polarity::Strengthen);
    CHECK(params[3].polarity == Polarity::Weaken);
}

TEST_CASE("instantiation examples") {
    auto f = parse_weakstl("G[0,2]{0,2}(alt - 5 > 0)");
    Theta th({0, 2}, theta_bounds(f));
    CHECK(instantiate(f, th) == parse_stl("G[0,0](alt - 5 > 0)"));

    auto p = parse_weakstl("(alt - 5 > 0){3}");
    CHECK(instantiate(p, Theta({3}, {3})) == parse_stl("alt > 2"));
    CHECK(minimal_requirement(p) == parse_stl("alt > 2"));

    auto n = parse_weakstl("!((40 - battery > 0){20})");
    auto w = instantiate(n, Theta({20}, {20}));
    CHECK(w == parse_stl("!(20 - battery > 0)"));
    Eigen::MatrixXd b(1, 1);
    b << 20.0;
    CHECK(robustness(w, Signal({"battery"}, b), 0) == 0.0);

    auto land = parse_weakstl("G[0,1]((battery < 40){20} -> F[0,1](100*is_landing >= 100))");
    CHECK(minimal_requirement(land) ==
          parse_stl("G[0,1]((battery < 20) -> F[0,1](100*is_landing >= 100))"));

    CHECK(minimal_requirement(parse_weakstl("F[1,3](x > 0)")) == parse_stl("F[1,3](x > 0)"));
    CHECK_THROWS_AS(instantiate(f, Theta({0, 1}, {1, 1})), InvalidInput);
    CHECK_THROWS_AS(Theta({3}, {2}), InvalidInput);
}

TEST_CASE("eventually clamps at zero and strengthening can empty a window") {
    auto f = parse_weakstl("F[1,2]{3,1}(x > 0)");
    InstantiateReport rep;
    CHECK(instantiate(f, Theta({3, 1}, {3, 1}), Polarity::Weaken, &rep) == parse_stl("F[0,3](x > 0)"));
    CHECK(rep.clamped == 1);
    CHECK(max_horizon(f) == 3);
    CHECK(max_horizon(f, Polarity::Strengthen) == 2);
    CHECK_THROWS_AS(instantiate(f, Theta({1, 1}, {3, 1}), Polarity::Strengthen), InvalidInput);
}

TEST_CASE("degree of weakening") {
    auto s = altitude({6.0, 3.0, 5.5});
    auto f = parse_weakstl("G[0,2]{0,2}(alt - 5 > 0)");
    Theta th({0, 2}, {0, 2});
    CHECK(robustness(instantiate(f, th), s, 0) == 1.0);
    CHECK(degree_of_weakening(f, th, s, 0) == 3.0);
    CHECK(degree_of_weakening(f, Theta::zeros(f), s, 0) == 0.0);
    auto p = parse_weakstl("(alt - 5 > 0){3}");
    CHECK(degree_of_weakening(p, Theta({3}, {3}), altitude({4.0}), 0) == 3.0);
}

namespace {

struct RandomWeak {
    std::mt19937_64 rng;
    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

    std::string leaf() {
        std::string s = "(" + std::string(uniform(0, 1) ? "a" : "b") + " > " +
                        std::to_string(uniform(-2, 2)) + ")";
        if (uniform(0, 1))
            s += "{" + std::to_string(uniform(0, 2)) + "}";
        return s;
    }

    std::string gen(int depth) {
        if (depth == 0)
            return leaf();
        int lo = uniform(0, 1), hi = lo + uniform(1, 2);
        std::string win = "[" + std::to_string(lo) + "," + std::to_string(hi) + "]";
        std::string ann;
        if (uniform(0, 1)) {
            int p = uniform(0, 1);
            ann = "{" + std::to_string(p) + "," + std::to_string(uniform(0, hi - lo - p)) + "}";
        }
        switch (uniform(0, 5)) {
        case 0: return "!(" + gen(depth - 1) + ")";
        case 1: return "(" + gen(depth - 1) + " & " + gen(depth - 1) + ")";
        case 2: return "(" + gen(depth - 1) + " | " + gen(depth - 1) + ")";
        case 3: return "G" + win + ann + "(" + gen(depth - 1) + ")";
        case 4: return "F" + win + "(" + gen(depth - 1) + ")";
        default: return "(" + gen(depth - 1) + " U" + win + " " + gen(depth - 1) + ")";
        }
    }

    Signal signal(Index len) {
        Eigen::MatrixXd m(len, 2);
        for (Index i = 0; i < m.size(); ++i)
            m.data()[i] = uniform(-6, 6) * 0.5;
        return Signal({"a", "b"}, m);
    }

    std::vector<int> random_theta(const std::vector<int>& bounds) {
        std::vector<int> v;
        for (int b : bounds)
            v.push_back(uniform(0, b));
        return v;
    }
};

// Enumerate every theta within bounds.
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

TEST_CASE("weakening properties on random formulas") {
    RandomWeak g{std::mt19937_64(3)};
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        auto f = parse_weakstl(g.gen(2));
        auto bounds = theta_bounds(f);
        if (bounds.size() > 6)
            continue;
        auto s = g.signal(max_horizon(f) + 2);
        auto zero = strip(f);
        CHECK(instantiate(f, Theta::zeros(f)) == zero);
        double r0 = robustness(zero, s, 0);

        auto v1 = g.random_theta(bounds);
        auto v2 = v1;
        for (std::size_t i = 0; i < v2.size(); ++i)
            v2[i] = std::min(bounds[i], v2[i] + g.uniform(0, 1));
        double r1 = robustness(instantiate(f, Theta(v1, bounds)), s, 0);
        double r2 = robustness(instantiate(f, Theta(v2, bounds)), s, 0);
        CHECK(r1 >= r0);
        CHECK(r2 >= r1);

        // Duality: weakening a negation strengthens the body.
        WeakStlFormula neg(std::make_shared<const Node>(Node{Op::Not, {}, {}, f.node(), {}, {}, {}}));
        bool strengthen_ok = true;
        StlFormula strong;
        try {
            strong = instantiate(f, Theta(v1, bounds), Polarity::Strengthen);
        } catch (const InvalidInput&) {
            strengthen_ok = false;
        }
        if (strengthen_ok)
            CHECK(instantiate(neg, Theta(v1, bounds)) == negate(strong));

        // Satisfaction of the weak formula equals existence of a satisfying theta.
        bool any = false;
        for_each_theta(bounds, [&](const std::vector<int>& v) {
            any = any || satisfied(instantiate(f, Theta(v, bounds)), s, 0);
        });
        CHECK(any == satisfied(minimal_requirement(f), s, 0));
        CHECK(max_horizon(f) >= horizon(minimal_requirement(f)));
        ++checked;
    }
    CHECK(checked > 200);
}
