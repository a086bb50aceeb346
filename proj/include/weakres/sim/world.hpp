#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "weakres/env/model.hpp"
#include "weakres/resolver/feature.hpp"
#include "weakres/sim/scenario.hpp"

namespace weakres::sim {

/// The four drone features with their original requirements; annotation
/// bounds give the minimal ones.
std::vector<resolver::FeatureSpec> builtin_features();
const resolver::FeatureSpec& builtin_feature(const std::string& id);
/// The conflicting pair of a case study.
std::pair<std::string, std::string> case_features(CaseStudy c);
/// Divisor used to normalise a requirement's robustness: its largest
/// weakening slack, or the initial required speed for the delivery planner.
double normalizer(const std::string& feature, const ScenarioConfig& c);

struct WorldState {
    Point ego;
    double z = 0.0;
    Point velocity;
    double battery = 100.0;
    Point chaser;
    int remaining_time = 0;
    int clock = 0;
    bool landing = false;
    bool landed = false;
    std::size_t waypoint = 0;
};

struct Command {
    Point velocity;
    bool land = false;
};

/// Deterministic discrete-time drone world. Distances are metres, speeds
/// metres per step.
class World {
  public:
    explicit World(ScenarioConfig c);

    const ScenarioConfig& config() const { return cfg_; }
    const WorldState& state() const { return s_; }

    std::vector<std::string> signal_variables() const;
    Eigen::VectorXd sample() const;
    /// Delivered, touched down, or every waypoint visited.
    bool finished() const;
    void apply(const Command& cmd);

    resolver::FeatureAction native_action(const std::string& feature) const;
    /// What the drone does when no feature is active.
    Command mission() const;
    Command from_feature(const resolver::FeatureAction& a) const;

    /// Affine model used for resolution from the current state; fast-changing
    /// quantities (time to deadline, chaser velocity) are frozen.
    env::TransitionSystem runtime_model() const;
    Eigen::VectorXd model_state() const;
    Command from_model(const Eigen::VectorXd& action) const;

    double distance_to_dest() const;
    double distance_to_chaser() const;
    Point chaser_velocity(Point ego) const;
    double distance_to_boundary() const;
    double required_speed() const;

  private:
    ScenarioConfig cfg_;
    WorldState s_;
};

} // namespace weakres::sim
