#include "doctest.h"

#include <random>

#include "../common/toy_family.hpp"
#include "weakres/error.hpp"
#include "weakres/resolver/resolver.hpp"

using namespace weakres;
using namespace weakres::resolver;

namespace {

FeatureAction velocity(const std::string& id, double vx, double vy) {
    FeatureAction a;
    a.feature_id = id;
    a.action_space = "velocity";
    a.payload = Eigen::Vector2d(vx, vy);
    return a;
}

} // namespace

TEST_CASE("detect") {
    auto north = velocity("runaway", 0, 5), south = velocity("boundary", 0, -5);
    auto d = detect({north, south}, 1.0);
    REQUIRE(d.conflicts.size() == 1);
    CHECK(d.conflicts[0] == std::make_pair(std::string("runaway"), std::string("boundary")));

    FeatureAction camera;
    camera.feature_id = "survey";
    camera.action_space = "camera";
    camera.tag = "capture";
    CHECK(detect({north, camera}, 1.0).consistent());
    CHECK(detect({north}, 1.0).consistent());
    CHECK(detect({north, velocity("other", 0.3, 5)}, 1.0).consistent());
    south.active = false;
    CHECK(detect({north, south}, 1.0).consistent());

    FeatureAction bad = north;
    bad.feature_id = "x";
    bad.payload = Eigen::Vector3d(0, 0, 0);
    CHECK_THROWS_AS(detect({north, bad}, 1.0), InvalidInput);
}

TEST_CASE("priority baseline") {
    auto land = velocity("land", 0, 0), deliver = velocity("deliver", 3, 0);
    CHECK(resolve_priority({land, deliver}, {"land", "deliver"}).feature_id == "land");
    CHECK(resolve_priority({land, deliver}, {"deliver", "land"}).feature_id == "deliver");
    land.active = false;
    CHECK(resolve_priority({land, deliver}, {"land", "deliver"}).feature_id == "deliver");
    deliver.active = false;
    CHECK_THROWS_AS(resolve_priority({land, deliver}, {"land", "deliver"}), InvalidInput);
    CHECK_THROWS_AS(resolve_priority({velocity("z", 0, 0)}, {"land"}), InvalidInput);

    // Payload scaling does not change the choice.
    auto a = velocity("a", 1, 1), b = velocity("b", -1, 2);
    for (double k : {0.0, 0.5, 100.0}) {
        auto sa = a, sb = b;
        sa.payload *= k;
        sb.payload *= k;
        CHECK(resolve_priority({sa, sb}, {"b", "a"}).feature_id == "b");
    }
}

TEST_CASE("feature files") {
    auto f = parse_feature(R"(
# safe landing
id = land
requirement = G[0,1]((battery < 40){20} -> F[0,1](is_landing >= 1))
activation = battery < 40
action_space = velocity
)");
    CHECK(f.id == "land");
    CHECK(weak::theta_bounds(f.requirement) == std::vector<int>{20});
    CHECK(parse_feature(print_feature(f)).requirement == f.requirement);

    CHECK_THROWS_AS(parse_feature("id = a\naction_space = v\n"), ParseError);
    CHECK_THROWS_AS(parse_feature("id = a\ncolour = red\n"), ParseError);
    try {
        parse_feature("id = a\nrequirement = G[0,1](x >)\naction_space = v\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 25);
    }
    CHECK_THROWS_AS(parse_feature("id = a\nrequirement = x > 0\nactivation = F[0,1](x > 0)\naction_space = v\n"),
                    ParseError);

    auto model = toy::model();
    CHECK_NOTHROW(check_against(toy::feature("a", "G[0,1](x > 0){1}"), model));
    CHECK_THROWS_AS(check_against(toy::feature("a", "G[0,1](y > 0)"), model), InvalidInput);
}

TEST_CASE("resolve on the toy conflict") {
    auto model = toy::model();
    auto up = toy::feature("up", "G[1,3](x > 1){2}");
    auto down = toy::feature("down", "G[1,3](x < -1){2}");
    auto fb = velocity("up", 1, 0);
    auto r = resolve(up, down, model, toy::start(0.0), 3, fb);
    REQUIRE(r.kind == ResolutionKind::Weakened);
    // Delta-optimal choices are (0,2), (1,1), (2,0); the smallest wins.
    CHECK(r.theta1 == std::vector<int>{0});
    CHECK(r.theta2 == std::vector<int>{2});
    CHECK(r.delta() == doctest::Approx(2.0));
    CHECK(r.actions.rows() == 3);

    // Closure: replaying the actions satisfies both weakened requirements.
    auto trace = env::predict(model, Eigen::VectorXd::Constant(1, 0.0), r.actions);
    CHECK(stl::robustness(weak::instantiate(up.requirement, weak::Theta(r.theta1, {2})), trace, 0) >= -1e-6);
    CHECK(stl::robustness(weak::instantiate(down.requirement, weak::Theta(r.theta2, {2})), trace, 0) >= -1e-6);

    // From x = 0 the first step is pinned, so only (1,1) works.
    auto pinned = resolve(toy::feature("up", "G[0,2](x > 1){2}"), toy::feature("down", "G[0,2](x < -1){2}"),
                          model, toy::start(0.0), 3, fb);
    CHECK(pinned.theta1 == std::vector<int>{1});
    CHECK(pinned.theta2 == std::vector<int>{1});

    auto easy = resolve(toy::feature("a", "G[0,2](x > -3){2}"), toy::feature("b", "G[0,2](x < 3){1}"), model,
                        toy::start(0.0), 3, fb.feature_id == "a" ? fb : velocity("a", 0, 0));
    CHECK(easy.kind == ResolutionKind::NoConflict);
    CHECK(easy.actions.rows() == 3);
    CHECK(easy.theta1 == std::vector<int>{0});
    CHECK(easy.theta2 == std::vector<int>{0});
    CHECK(easy.delta() == doctest::Approx(0.0));

    auto hard = resolve(toy::feature("up", "G[0,2](x > 3){1}"), toy::feature("down", "G[0,2](x < -3){1}"), model,
                        toy::start(0.0), 3, fb);
    CHECK(hard.kind == ResolutionKind::Fallback);
    REQUIRE(hard.fallback_action);
    CHECK(hard.fallback_action->feature_id == "up");
    CHECK(hard.fallback_action->payload == fb.payload);

    CHECK_THROWS_AS(resolve(up, down, model, toy::start(0.0), 3, velocity("other", 0, 0)), InvalidInput);

    // Identical inputs give identical answers.
    auto again = resolve(up, down, model, toy::start(0.0), 3, fb);
    CHECK(again.actions == r.actions);
    CHECK(again.theta1 == r.theta1);
}

TEST_CASE("resolve matches the brute-force oracle on random toys") {
    std::mt19937_64 rng(41);
    auto model = toy::model();
    for (int trial = 0; trial < 12; ++trial) {
        auto in = toy::random_instance(rng);
        CAPTURE(in.phi);
        CAPTURE(in.psi);
        CAPTURE(in.x0);
        auto want = toy::brute_force(in);
        auto r = resolve(toy::feature("p", in.phi), toy::feature("q", in.psi), model, toy::start(in.x0), in.N,
                         velocity("p", 0, 0));
        CHECK((r.kind != ResolutionKind::Fallback) == want.sat);
        if (!want.sat || r.kind == ResolutionKind::Fallback)
            continue;
        auto theta = r.theta1;
        theta.insert(theta.end(), r.theta2.begin(), r.theta2.end());
        CHECK(r.delta() == doctest::Approx(want.delta).epsilon(1e-9));
        CHECK(theta == want.theta);
    }
}
