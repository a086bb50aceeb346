#include "weakres/sim/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "weakres/error.hpp"

namespace weakres::sim {

std::string to_string(CaseStudy c) {
    return c == CaseStudy::OrganDelivery ? "organ_delivery" : "surveillance";
}

CaseStudy parse_case(std::string_view s) {
    if (s == "organ_delivery")
        return CaseStudy::OrganDelivery;
    if (s == "surveillance")
        return CaseStudy::Surveillance;
    throw InvalidInput("unknown case study '" + std::string(s) + "'");
}

namespace {

std::string trim(std::string_view s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos)
        return {};
    std::size_t b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    for (;;) {
        std::size_t next = s.find(sep, pos);
        out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
        if (next == std::string_view::npos)
            return out;
        pos = next + 1;
    }
}

double to_double(const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty() || !std::isfinite(v))
        throw InvalidInput("expected a number, got '" + s + "'");
    return v;
}

long to_long(const std::string& s) {
    double v = to_double(s);
    if (v != std::floor(v))
        throw InvalidInput("expected an integer, got '" + s + "'");
    return static_cast<long>(v);
}

std::uint64_t to_seed(const std::string& s) {
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size())
        throw InvalidInput("expected an unsigned integer seed, got '" + s + "'");
    return v;
}

Point to_point(const std::string& s) {
    auto parts = split(s, ',');
    if (parts.size() != 2)
        throw InvalidInput("expected 'x, y', got '" + s + "'");
    return {to_double(parts[0]), to_double(parts[1])};
}

std::string num(double v) { return fmt::format("{}", v); }
std::string pt(Point p) { return num(p.x) + ", " + num(p.y); }

} // namespace

std::string to_string(const Mode& m) {
    if (m.kind == ModeKind::Weakening)
        return "weakening:" + m.fallback;
    std::string s = "priority:";
    for (std::size_t i = 0; i < m.ordering.size(); ++i)
        s += (i ? "," : "") + m.ordering[i];
    return s;
}

Mode parse_mode(std::string_view s) {
    auto colon = s.find(':');
    if (colon == std::string_view::npos)
        throw InvalidInput("mode must be 'weakening:<fallback>' or 'priority:<a>,<b>'");
    std::string kind = trim(s.substr(0, colon));
    std::string rest = trim(s.substr(colon + 1));
    Mode m;
    if (kind == "weakening") {
        m.kind = ModeKind::Weakening;
        m.fallback = rest;
        if (rest.empty())
            throw InvalidInput("weakening mode needs a fallback feature");
    } else if (kind == "priority") {
        m.kind = ModeKind::Priority;
        m.ordering = split(rest, ',');
        if (m.ordering.size() < 2)
            throw InvalidInput("priority mode needs an ordering of two features");
    } else {
        throw InvalidInput("unknown mode '" + kind + "'");
    }
    return m;
}

std::vector<Mode> default_modes(CaseStudy c) {
    std::string a = c == CaseStudy::OrganDelivery ? "deliver" : "runaway";
    std::string b = c == CaseStudy::OrganDelivery ? "land" : "boundary";
    return {parse_mode("weakening:" + a), parse_mode("weakening:" + b), parse_mode("priority:" + a + "," + b),
            parse_mode("priority:" + b + "," + a)};
}

ScenarioConfig parse_scenario(std::string_view text) {
    ScenarioConfig c;
    using Setter = std::function<void(const std::string&)>;
    std::map<std::string, Setter> keys = {
        {"seed", [&](const std::string& v) { c.seed = to_seed(v); }},
        {"case", [&](const std::string& v) { c.case_study = parse_case(v); }},
        {"mode", [&](const std::string& v) { c.mode = parse_mode(v); }},
        {"horizon", [&](const std::string& v) { c.horizon = static_cast<int>(to_long(v)); }},
        {"step_cap", [&](const std::string& v) { c.step_cap = static_cast<int>(to_long(v)); }},
        {"step_seconds", [&](const std::string& v) { c.step_seconds = to_double(v); }},
        {"tolerance", [&](const std::string& v) { c.tolerance = to_double(v); }},
        {"start", [&](const std::string& v) { c.start = to_point(v); }},
        {"altitude", [&](const std::string& v) { c.altitude = to_double(v); }},
        {"max_speed", [&](const std::string& v) { c.max_speed = to_double(v); }},
        {"destination", [&](const std::string& v) { c.destination = to_point(v); }},
        {"delivery_time", [&](const std::string& v) { c.delivery_time = static_cast<int>(to_long(v)); }},
        {"battery", [&](const std::string& v) { c.battery = to_double(v); }},
        {"drain_hover", [&](const std::string& v) { c.drain_hover = to_double(v); }},
        {"drain_move", [&](const std::string& v) { c.drain_move = to_double(v); }},
        {"descent_rate", [&](const std::string& v) { c.descent_rate = to_double(v); }},
        {"width", [&](const std::string& v) { c.width = to_double(v); }},
        {"height", [&](const std::string& v) { c.height = to_double(v); }},
        {"waypoints",
         [&](const std::string& v) {
             c.waypoints.clear();
             for (const auto& p : split(v, ';'))
                 if (!p.empty())
                     c.waypoints.push_back(to_point(p));
         }},
        {"chaser", [&](const std::string& v) { c.chaser = to_point(v); }},
        {"chaser_speed", [&](const std::string& v) { c.chaser_speed = to_double(v); }},
        {"chase_steps", [&](const std::string& v) { c.chase_steps = static_cast<int>(to_long(v)); }},
        {"cornered",
         [&](const std::string& v) {
             if (v != "true" && v != "false")
                 throw InvalidInput("expected true or false");
             c.cornered = v == "true";
         }},
    };
    std::istringstream in{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string body = trim(raw.substr(0, raw.find('#')));
        if (body.empty())
            continue;
        auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", line, 1);
        std::string key = trim(body.substr(0, eq));
        auto it = keys.find(key);
        if (it == keys.end())
            throw ParseError("unknown key '" + key + "'", line, 1);
        try {
            it->second(trim(body.substr(eq + 1)));
        } catch (const InvalidInput& e) {
            throw ParseError(key + ": " + e.what(), line, static_cast<int>(raw.find('=')) + 2);
        }
    }
    validate(c);
    return c;
}

ScenarioConfig parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open scenario file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string print_scenario(const ScenarioConfig& c) {
    std::string s;
    auto kv = [&](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
    kv("seed", std::to_string(c.seed));
    kv("case", to_string(c.case_study));
    kv("mode", to_string(c.mode));
    kv("horizon", std::to_string(c.horizon));
    kv("step_cap", std::to_string(c.step_cap));
    kv("step_seconds", num(c.step_seconds));
    kv("tolerance", num(c.tolerance));
    kv("start", pt(c.start));
    kv("altitude", num(c.altitude));
    kv("max_speed", num(c.max_speed));
    if (c.case_study == CaseStudy::OrganDelivery) {
        kv("destination", pt(c.destination));
        kv("delivery_time", std::to_string(c.delivery_time));
        kv("battery", num(c.battery));
        kv("drain_hover", num(c.drain_hover));
        kv("drain_move", num(c.drain_move));
        kv("descent_rate", num(c.descent_rate));
    } else {
        kv("width", num(c.width));
        kv("height", num(c.height));
        std::string w;
        for (std::size_t i = 0; i < c.waypoints.size(); ++i)
            w += (i ? "; " : "") + pt(c.waypoints[i]);
        kv("waypoints", w);
        kv("chaser", pt(c.chaser));
        kv("chaser_speed", num(c.chaser_speed));
        kv("chase_steps", std::to_string(c.chase_steps));
        kv("cornered", c.cornered ? "true" : "false");
    }
    return s;
}

void validate(const ScenarioConfig& c) {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok)
            throw InvalidInput(msg);
    };
    need(c.horizon >= 1, "horizon must be at least 1");
    need(c.step_cap >= 1, "step_cap must be at least 1");
    need(c.step_seconds > 0, "step_seconds must be positive");
    need(c.max_speed > 0, "max_speed must be positive");
    need(c.altitude > 0, "altitude must be positive");
    if (c.mode.kind == ModeKind::Weakening)
        need(!c.mode.fallback.empty(), "weakening mode needs a fallback");
    if (c.case_study == CaseStudy::OrganDelivery) {
        need(c.delivery_time >= 1, "delivery_time must be at least 1");
        need(c.battery >= 0 && c.battery <= 100, "battery must lie in [0, 100]");
        need(c.drain_hover >= 0 && c.drain_move >= 0, "drain rates must be nonnegative");
        need(c.descent_rate > 0, "descent_rate must be positive");
    } else {
        need(c.width > 0 && c.height > 0, "boundary must have positive size");
        need(c.chaser_speed > c.max_speed, "the chaser must be faster than the ego drone");
        need(!c.waypoints.empty(), "surveillance needs at least one waypoint");
        auto inside = [&](Point p) { return p.x >= 0 && p.x <= c.width && p.y >= 0 && p.y <= c.height; };
        for (auto w : c.waypoints)
            need(inside(w), "waypoint outside the boundary");
        need(inside(c.start), "ego start outside the boundary");
        need(c.chase_steps >= 0, "chase_steps must be nonnegative");
    }
}

std::vector<ScenarioConfig> generate_scenarios(CaseStudy cs, int count, std::uint64_t master_seed) {
    if (count < 1)
        throw InvalidInput("scenario count must be at least 1");
    std::mt19937_64 master(master_seed);
    std::vector<ScenarioConfig> out;
    for (int i = 0; i < count; ++i) {
        ScenarioConfig c;
        c.seed = master();
        c.case_study = cs;
        c.mode = default_modes(cs).front();
        std::mt19937_64 rng(c.seed);
        auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
        auto round1 = [](double v) { return std::round(v * 10.0) / 10.0; };
        if (cs == CaseStudy::OrganDelivery) {
            double dist = uni(250, 600), heading = uni(0, 2 * M_PI);
            c.start = {round1(uni(-50, 50)), round1(uni(-50, 50))};
            c.destination = {round1(c.start.x + dist * std::cos(heading)), round1(c.start.y + dist * std::sin(heading))};
            dist = std::hypot(c.destination.x - c.start.x, c.destination.y - c.start.y);
            c.max_speed = round1(uni(8, 14));
            double steps = dist / c.max_speed;
            c.delivery_time = static_cast<int>(std::ceil(steps * uni(1.1, 1.5)));
            c.battery = round1(uni(45, 70));
            double arrival = uni(14, 36);
            double per_step = (c.battery - arrival) / std::ceil(steps);
            c.drain_hover = 0.3 * per_step;
            c.drain_move = 0.7 * per_step / c.max_speed;
            c.altitude = round1(uni(20, 40));
            c.descent_rate = 6.0;
        } else {
            c.width = round1(uni(120, 200));
            c.height = round1(uni(120, 200));
            c.max_speed = round1(uni(4, 6));
            c.chaser_speed = round1(c.max_speed * uni(1.15, 1.4));
            c.chase_steps = static_cast<int>(uni(25, 50));
            int n = static_cast<int>(uni(3, 6));
            for (int k = 0; k < n; ++k)
                c.waypoints.push_back({round1(uni(25, c.width - 25)), round1(uni(25, c.height - 25))});
            c.cornered = i % 5 == 0;
            if (c.cornered) {
                // Ego tucked into a corner; the chaser arrives from the inside.
                c.start = {round1(uni(10, 14)), round1(uni(10, 14))};
                c.chaser = {round1(c.start.x + uni(14, 20)), round1(c.start.y + uni(14, 20))};
                c.chaser_speed = round1(c.max_speed * 1.4);
            } else {
                c.start = {round1(uni(30, c.width - 30)), round1(uni(30, c.height - 30))};
                double r = uni(40, 70), a = uni(0, 2 * M_PI);
                c.chaser = {round1(c.start.x + r * std::cos(a)), round1(c.start.y + r * std::sin(a))};
            }
        }
        out.push_back(c);
    }
    return out;
}

} // namespace weakres::sim
