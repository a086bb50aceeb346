#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace weakres::sim {

enum class CaseStudy { OrganDelivery, Surveillance };
std::string to_string(CaseStudy c);
CaseStudy parse_case(std::string_view s);

enum class ModeKind { Weakening, Priority };

/// weakening(fallback) or priority(first, second).
struct Mode {
    ModeKind kind = ModeKind::Weakening;
    std::string fallback;              // weakening
    std::vector<std::string> ordering; // priority, highest first
};
/// "weakening:land", "priority:land,deliver".
std::string to_string(const Mode& m);
Mode parse_mode(std::string_view s);
/// The four modes of a case study: weakening with either fallback, then
/// priority with either ordering.
std::vector<Mode> default_modes(CaseStudy c);

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct ScenarioConfig {
    std::uint64_t seed = 0;
    CaseStudy case_study = CaseStudy::OrganDelivery;
    Mode mode;
    int horizon = 3;
    int step_cap = 600;
    double step_seconds = 0.5;
    /// Conflict tolerance; <= 0 means half the ego's max speed.
    double tolerance = 0.0;

    // Ego drone.
    Point start;
    double altitude = 30.0;
    double max_speed = 10.0; // m/step

    // Organ delivery.
    Point destination;
    int delivery_time = 60; // steps
    double battery = 60.0;
    double drain_hover = 0.2;  // percent per step
    double drain_move = 0.05;  // percent per (m/step) per step
    double descent_rate = 6.0; // m/step

    // Surveillance.
    double width = 150.0;
    double height = 150.0;
    std::vector<Point> waypoints;
    Point chaser;
    double chaser_speed = 12.0;
    int chase_steps = 40;
    /// Generated next to a corner with the chaser closing in.
    bool cornered = false;
};

/// Key/value text, one `key = value` per line; points are `x, y` and
/// waypoints `x, y; x, y; ...`. Unknown keys are errors. See docs/grammar.md.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig parse_scenario_file(const std::string& path);
std::string print_scenario(const ScenarioConfig& c);

/// Throws InvalidInput on violated invariants (chaser not faster than the
/// ego, destination outside the boundary, nonpositive speeds, ...).
void validate(const ScenarioConfig& c);

/// Deterministic per master_seed; the mode is left at its default.
/// Ranges:
///   organ delivery: distance 250..600 m, max speed 8..14 m/step, delivery
///     time feasible at max speed with 10..50% margin, battery 45..70,
///     drain tuned so the battery at arrival (flying at max speed) lands in
///     14..36, 30% of it speed independent;
///   surveillance: box 120..200 m, ego 4..6 m/step, chaser 1.15..1.4x
///     faster, chase 25..50 steps, 3..5 waypoints 25 m inside the box;
///     every fifth scenario is cornered.
std::vector<ScenarioConfig> generate_scenarios(CaseStudy c, int count, std::uint64_t master_seed);

} // namespace weakres::sim
