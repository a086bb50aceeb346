#include "weakres/sim/world.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "weakres/error.hpp"

namespace weakres::sim {

namespace {

const char* kFeatures[] = {
    R"(id = deliver
requirement = G[0,1](curr_speed - required_speed > 0)
activation = distance_to_dest > 0.001 & is_landing < 0.5
action_space = velocity
)",
    R"(id = land
requirement = G[0,1]((battery < 40){20} -> F[0,1](100*is_landing >= 100))
activation = battery < 40
action_space = velocity
)",
    R"(id = runaway
requirement = G[0,1](distance_to_chaser > 10){8}
activation = distance_to_chaser < 25
action_space = velocity
)",
    R"(id = boundary
requirement = G[0,1](distance_to_boundary <= 20 -> F[0,1](distance_to_boundary > 20){18})
activation = distance_to_boundary <= 20
action_space = velocity
)",
};

double norm(Point p) { return std::hypot(p.x, p.y); }
Point sub(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
Point scale(Point p, double k) { return {p.x * k, p.y * k}; }
Point unit(Point p) {
    double n = norm(p);
    return n > 1e-12 ? scale(p, 1.0 / n) : Point{1.0, 0.0};
}
Point clip(Point v, double vmax) {
    double n = norm(v);
    return n > vmax ? scale(v, vmax / n) : v;
}
std::string num(double v) { return fmt::format("{}", v); }

constexpr double kArrived = 1e-3;
constexpr double kWaypointRadius = 3.0;

} // namespace

std::vector<resolver::FeatureSpec> builtin_features() {
    std::vector<resolver::FeatureSpec> out;
    for (const char* text : kFeatures)
        out.push_back(resolver::parse_feature(text));
    return out;
}

const resolver::FeatureSpec& builtin_feature(const std::string& id) {
    static const auto all = builtin_features();
    for (const auto& f : all)
        if (f.id == id)
            return f;
    throw InvalidInput("unknown feature '" + id + "'");
}

std::pair<std::string, std::string> case_features(CaseStudy c) {
    if (c == CaseStudy::OrganDelivery)
        return {"deliver", "land"};
    return {"runaway", "boundary"};
}

double normalizer(const std::string& feature, const ScenarioConfig& c) {
    if (feature == "deliver")
        return std::hypot(c.destination.x - c.start.x, c.destination.y - c.start.y) / c.delivery_time;
    auto bounds = weak::theta_bounds(builtin_feature(feature).requirement);
    int slack = 0;
    for (int b : bounds)
        slack = std::max(slack, b);
    return slack > 0 ? slack : 1.0;
}

World::World(ScenarioConfig c) : cfg_(std::move(c)) {
    validate(cfg_);
    s_.ego = cfg_.start;
    s_.z = cfg_.altitude;
    s_.battery = cfg_.battery;
    s_.chaser = cfg_.chaser;
    s_.remaining_time = cfg_.delivery_time;
}

double World::distance_to_dest() const { return norm(sub(cfg_.destination, s_.ego)); }
double World::distance_to_chaser() const { return norm(sub(s_.chaser, s_.ego)); }
double World::distance_to_boundary() const {
    return std::min({s_.ego.x, cfg_.width - s_.ego.x, s_.ego.y, cfg_.height - s_.ego.y});
}
double World::required_speed() const { return distance_to_dest() / std::max(1, s_.remaining_time); }

std::vector<std::string> World::signal_variables() const {
    if (cfg_.case_study == CaseStudy::OrganDelivery)
        return {"x", "y", "z", "distance_to_dest", "battery", "curr_speed", "required_speed",
                "remaining_delivery_time", "is_landing"};
    return {"x", "y", "chaser_x", "chaser_y", "curr_speed", "distance_to_chaser", "distance_to_boundary"};
}

Eigen::VectorXd World::sample() const {
    double speed = norm(s_.velocity);
    if (cfg_.case_study == CaseStudy::OrganDelivery) {
        Eigen::VectorXd v(9);
        v << s_.ego.x, s_.ego.y, s_.z, distance_to_dest(), s_.battery, speed, required_speed(), s_.remaining_time,
            s_.landing ? 1.0 : 0.0;
        return v;
    }
    Eigen::VectorXd v(7);
    v << s_.ego.x, s_.ego.y, s_.chaser.x, s_.chaser.y, speed, distance_to_chaser(), distance_to_boundary();
    return v;
}

// Pursuit for chase_steps, then the chaser gives up and flies off.
Point World::chaser_velocity(Point ego) const {
    Point gap = sub(ego, s_.chaser);
    if (s_.clock < cfg_.chase_steps)
        return scale(unit(gap), std::min(cfg_.chaser_speed, norm(gap)));
    return scale(unit(gap), -cfg_.chaser_speed);
}

bool World::finished() const {
    if (cfg_.case_study == CaseStudy::OrganDelivery)
        return s_.landed || distance_to_dest() <= kArrived;
    return s_.waypoint >= cfg_.waypoints.size();
}

void World::apply(const Command& cmd) {
    double before = s_.battery;
    if (cfg_.case_study == CaseStudy::OrganDelivery) {
        if (s_.landing || cmd.land) {
            s_.landing = true;
            s_.velocity = {};
            s_.z = std::max(0.0, s_.z - cfg_.descent_rate);
            s_.landed = s_.z <= 0.0;
            s_.battery -= cfg_.drain_hover;
        } else {
            Point v = clip(cmd.velocity, std::min(cfg_.max_speed, distance_to_dest()));
            s_.ego = {s_.ego.x + v.x, s_.ego.y + v.y};
            s_.velocity = v;
            s_.battery -= cfg_.drain_hover + cfg_.drain_move * norm(v);
        }
        s_.battery = std::clamp(s_.battery, 0.0, before);
        --s_.remaining_time;
    } else {
        Point v = clip(cmd.velocity, cfg_.max_speed);
        Point old = s_.ego;
        s_.ego = {s_.ego.x + v.x, s_.ego.y + v.y};
        s_.velocity = v;
        Point step = chaser_velocity(old);
        s_.chaser = {s_.chaser.x + step.x, s_.chaser.y + step.y};
        if (s_.waypoint < cfg_.waypoints.size() && norm(sub(cfg_.waypoints[s_.waypoint], s_.ego)) <= kWaypointRadius)
            ++s_.waypoint;
    }
    ++s_.clock;
}

resolver::FeatureAction World::native_action(const std::string& feature) const {
    resolver::FeatureAction a;
    a.feature_id = feature;
    a.action_space = "velocity";
    Point v;
    if (feature == "deliver") {
        v = scale(unit(sub(cfg_.destination, s_.ego)), std::min(cfg_.max_speed, distance_to_dest()));
    } else if (feature == "land") {
        a.tag = "land";
    } else if (feature == "runaway") {
        v = scale(unit(sub(s_.ego, s_.chaser)), cfg_.max_speed);
    } else if (feature == "boundary") {
        // Inward normal of the nearest wall.
        double d[4] = {s_.ego.x, cfg_.width - s_.ego.x, s_.ego.y, cfg_.height - s_.ego.y};
        int k = static_cast<int>(std::min_element(d, d + 4) - d);
        Point normals[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        v = scale(normals[k], cfg_.max_speed);
    } else {
        throw InvalidInput("unknown feature '" + feature + "'");
    }
    a.payload = Eigen::Vector2d(v.x, v.y);
    return a;
}

Command World::mission() const {
    if (cfg_.case_study == CaseStudy::OrganDelivery)
        return from_feature(native_action("deliver"));
    if (s_.waypoint >= cfg_.waypoints.size())
        return {};
    Point gap = sub(cfg_.waypoints[s_.waypoint], s_.ego);
    return {scale(unit(gap), std::min(cfg_.max_speed, norm(gap))), false};
}

Command World::from_feature(const resolver::FeatureAction& a) const {
    Command c;
    if (a.payload.size() == 2)
        c.velocity = {a.payload(0), a.payload(1)};
    c.land = a.tag == "land";
    return c;
}

env::TransitionSystem World::runtime_model() const {
    std::string m;
    if (cfg_.case_study == CaseStudy::OrganDelivery) {
        double k = 1.0 / std::max(1, s_.remaining_time - 1);
        double dmax = std::max(distance_to_dest(), 1.0);
        m += fmt::format("const k = {};\nconst hover = {};\nconst move = {};\n", k, cfg_.drain_hover, cfg_.drain_move);
        m += fmt::format("state distance_to_dest in [0, {}];\n", num(dmax));
        m += "state battery in [0, 100];\n";
        m += fmt::format("state curr_speed in [0, {}];\n", num(cfg_.max_speed));
        m += fmt::format("state required_speed in [0, {}];\n", num(std::max(dmax, required_speed())));
        m += "state is_landing in [0, 1];\n";
        m += fmt::format("action speed in [0, {}];\n", num(cfg_.max_speed));
        m += s_.landing ? "action land in [1, 1] binary;\n" : "action land in [0, 1] binary;\n";
        m += "next(distance_to_dest) = if land then distance_to_dest else distance_to_dest - speed;\n"
             "next(battery) = if land then battery - hover else battery - hover - move * speed;\n"
             "next(curr_speed) = if land then 0 else speed;\n"
             "next(required_speed) = if land then k * distance_to_dest else k * distance_to_dest - k * speed;\n"
             "next(is_landing) = if land then 1 else is_landing;\n";
        return env::parse_model(m);
    }
    Point vc = chaser_velocity(s_.ego);
    double a = cfg_.max_speed / std::sqrt(2.0);
    double pad = 10.0 * cfg_.max_speed + 50.0;
    m += fmt::format("const vcx = {};\nconst vcy = {};\nconst r = {};\n", vc.x, vc.y, 1.0 / std::sqrt(2.0));
    // Boxes cover the area and wherever the drones are now, plus room to move.
    double cpad = pad + 10.0 * cfg_.chaser_speed;
    auto box = [](double p, double q, double extent, double margin) {
        return std::pair{std::min({0.0, p, q}) - margin, std::max({extent, p, q}) + margin};
    };
    auto [xlo, xhi] = box(s_.ego.x, s_.chaser.x, cfg_.width, cpad);
    auto [ylo, yhi] = box(s_.ego.y, s_.chaser.y, cfg_.height, cpad);
    m += fmt::format("state x in [{}, {}];\nstate y in [{}, {}];\n", xlo, xhi, ylo, yhi);
    m += fmt::format("state chaser_x in [{}, {}];\nstate chaser_y in [{}, {}];\n", xlo, xhi, ylo, yhi);
    m += fmt::format("action vx in [{}, {}];\naction vy in [{}, {}];\n", -a, a, -a, a);
    m += "x' = x + vx;\ny' = y + vy;\nchaser_x' = chaser_x + vcx;\nchaser_y' = chaser_y + vcy;\n";
    // Octagonal under-approximation of the Euclidean distance.
    m += "derived distance_to_chaser = max(x - chaser_x, chaser_x - x, y - chaser_y, chaser_y - y,"
         " r * (x - chaser_x + y - chaser_y), r * (x - chaser_x - y + chaser_y),"
         " r * (chaser_x - x + y - chaser_y), r * (chaser_x - x + chaser_y - y));\n";
    m += fmt::format("derived distance_to_boundary = min(x, {} - x, y, {} - y);\n", cfg_.width, cfg_.height);
    return env::parse_model(m);
}

Eigen::VectorXd World::model_state() const {
    if (cfg_.case_study == CaseStudy::OrganDelivery) {
        Eigen::VectorXd q(5);
        q << distance_to_dest(), s_.battery, norm(s_.velocity), required_speed(), s_.landing ? 1.0 : 0.0;
        return q;
    }
    Eigen::VectorXd q(4);
    q << s_.ego.x, s_.ego.y, s_.chaser.x, s_.chaser.y;
    return q;
}

Command World::from_model(const Eigen::VectorXd& action) const {
    Command c;
    if (cfg_.case_study == CaseStudy::OrganDelivery) {
        c.land = action(1) > 0.5;
        if (!c.land)
            c.velocity = scale(unit(sub(cfg_.destination, s_.ego)), action(0));
        return c;
    }
    c.velocity = {action(0), action(1)};
    return c;
}

} // namespace weakres::sim
