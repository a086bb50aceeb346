#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "weakres/env/model.hpp"
#include "weakres/milp/encoder.hpp"
#include "weakres/milp/solver.hpp"
#include "weakres/resolver/feature.hpp"

namespace weakres::resolver {

struct Detection {
    std::vector<std::pair<std::string, std::string>> conflicts;
    bool consistent() const { return conflicts.empty(); }
};

/// Pairs of active actions in the same space whose payloads differ by more
/// than tol (L2), or whose tags differ. Throws InvalidInput on a payload
/// dimension mismatch within a space.
Detection detect(const std::vector<FeatureAction>& actions, double tol);

enum class ResolutionKind { NoConflict, Weakened, Fallback };
std::string to_string(ResolutionKind k);

struct Resolution {
    ResolutionKind kind = ResolutionKind::NoConflict;
    /// N rows, one column per model action (weakened only).
    Eigen::MatrixXd actions;
    /// Predicted states for steps t..t+N under the returned actions.
    Eigen::MatrixXd states;
    std::vector<int> theta1, theta2;
    double delta1 = 0.0, delta2 = 0.0;
    milp::SolveStats stats;
    /// Wall time of encoding plus all solver stages.
    double seconds = 0.0;
    std::string fallback_feature;
    std::optional<FeatureAction> fallback_action;
    std::vector<std::string> warnings;

    double delta() const { return delta1 + delta2; }
};

struct ResolveOptions {
    milp::EncodingOptions encoding;
    milp::SolveLimits limits;
    /// Among Delta-optimal answers prefer the lexicographically smallest
    /// theta (first feature first) with a second solve.
    bool tie_break = true;
    /// Then, with Delta and theta fixed, maximise rho(phi0) + rho(psi0).
    bool prefer_margin = true;
};

/// Weakening-based resolution of two active features over horizon N. When
/// no admissible weakening is feasible the result is a fallback carrying
/// `fallback`, which must belong to f1 or f2. Solver failures propagate as
/// NumericError / LimitError.
Resolution resolve(const FeatureSpec& f1, const FeatureSpec& f2, const env::TransitionSystem& model,
                   const stl::Signal& past, int N, const FeatureAction& fallback,
                   const ResolveOptions& opt = {});

/// Action of the highest-ranked active feature. Throws InvalidInput when no
/// action is active or the ordering misses an active feature.
FeatureAction resolve_priority(const std::vector<FeatureAction>& actions,
                               const std::vector<std::string>& ordering);

} // namespace weakres::resolver
