#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "weakres/env/model.hpp"
#include "weakres/milp/problem.hpp"

namespace weakres::env {

struct LowerOptions {
    /// Fallback constant when a switched rule has no finite bound.
    double big_M = 1000.0;
    /// Optional per-step state boxes (rows 0..N) that replace the declared
    /// bounds, e.g. from reachable_boxes.
    const Eigen::MatrixXd* state_lo = nullptr;
    const Eigen::MatrixXd* state_hi = nullptr;
};

/// Decision variables created for steps t0..t0+N.
struct LoweredModel {
    int t0 = 0;
    int horizon = 0;
    std::vector<std::vector<milp::VarId>> states;  // N+1 rows, one column per state variable
    std::vector<std::vector<milp::VarId>> actions; // N rows, one column per action variable
};

/// Fresh variables per state x step and action x step with their bounds, one
/// equality per affine update and step, and four big-M inequalities per
/// switched update and step.
LoweredModel lower_to_constraints(const TransitionSystem& t, int t0, int N, milp::MilpProblem& p,
                                  const LowerOptions& opt = {});

} // namespace weakres::env
