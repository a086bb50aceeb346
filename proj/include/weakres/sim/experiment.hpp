#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "weakres/sim/scenario.hpp"
#include "weakres/sim/world.hpp"
#include "weakres/stl/signal.hpp"

namespace weakres::sim {

using stl::Index;

/// What was executed in one step.
struct StepRecord {
    bool active1 = false;
    bool active2 = false;
    bool conflict = false;
    /// "mission", a feature id, "agree", "weakened", "no_conflict",
    /// "fallback:<id>" or "end".
    std::string decision;
    double solve_seconds = 0.0;
    std::vector<int> theta1, theta2;
    /// Replaying the resolution's actions through the runtime model satisfies
    /// both weakened requirements (weakened steps only).
    bool closure_ok = true;
    double closure_margin = 0.0;
};

struct FeatureMetrics {
    std::string id;
    /// Robustness of the original requirement at every window step.
    Eigen::VectorXd series;
    double avg = 0.0;
    double min = 0.0;
    double divisor = 1.0;
    double normalized = 0.0;
    /// Worst robustness of the minimal requirement over the window.
    double minimal_min = 0.0;
    /// Same, restricted to steps whose resolution was SAT.
    double minimal_min_sat = 0.0;
};

struct RunMetrics {
    bool interaction = false;
    Index window_start = 0;
    Index window_end = 0; // exclusive
    FeatureMetrics f1, f2;
    /// Mean of the two normalised averages.
    double overall = 0.0;
    int resolutions = 0;
    int unsat = 0;
    double solver_mean = 0.0;
    double solver_max = 0.0;
    int closure_failures = 0;
    bool cap_hit = false;
    int steps = 0;
};

struct RunResult {
    /// One row per step; columns are World::signal_variables().
    stl::Signal trace;
    std::vector<StepRecord> steps;
    RunMetrics metrics;
};

RunResult run_scenario(const ScenarioConfig& cfg);

/// Trace CSV: step, time, the world's signal variables, activation flags,
/// conflict flag and decision.
std::string trace_csv(const RunResult& r, const ScenarioConfig& cfg);

struct ExperimentRow {
    CaseStudy case_study = CaseStudy::OrganDelivery;
    int scenario = 0;
    ScenarioConfig config;
    RunMetrics metrics;
    /// Non-empty when the run failed; the row carries no metrics then.
    std::string error;
};

struct ExperimentOptions {
    std::vector<CaseStudy> cases{CaseStudy::OrganDelivery, CaseStudy::Surveillance};
    int count = 25;
    std::uint64_t seed = 1;
    /// Empty: the four default modes of each case.
    std::vector<Mode> modes;
    int horizon = 3;
    /// 0: hardware concurrency.
    int workers = 0;
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;
};

/// Every scenario under every mode; rows ordered by case, scenario, mode.
ExperimentReport run_experiment(const ExperimentOptions& opt);

/// One row per run. Timing columns break byte-for-byte reproducibility and
/// can be left out.
std::string metrics_csv(const ExperimentReport& r, bool timing = true);
std::string summary(const ExperimentReport& r);

/// Mean overall robustness of all runs of a case under the given mode kind
/// (and, for priority, ordering); NaN when there are none.
double mean_overall(const ExperimentReport& r, CaseStudy c, const Mode& m);
double mean_overall(const ExperimentReport& r, CaseStudy c, ModeKind kind);

} // namespace weakres::sim
