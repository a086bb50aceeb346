#pragma once

#include <Eigen/Core>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "weakres/stl/affine.hpp"
#include "weakres/stl/signal.hpp"

namespace weakres::env {

using stl::AffineExpr;
using stl::Index;

enum class ActionKind { Continuous, Binary };

struct StateVar {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
};

struct ActionVar {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
    ActionKind kind = ActionKind::Continuous;
};

/// next = then_expr, or next = guard ? then_expr : else_expr when a binary
/// action guards the rule.
struct UpdateRule {
    std::optional<std::string> guard;
    AffineExpr then_expr;
    AffineExpr else_expr;
    bool switched() const { return guard.has_value(); }
};

struct InitSpec {
    double lo = 0.0;
    double hi = 0.0;
};

enum class DerivedKind { Max, Min };

/// Output variable max(...) or min(...) of affine terms over state variables.
struct DerivedVar {
    std::string name;
    DerivedKind kind = DerivedKind::Max;
    std::vector<AffineExpr> terms;
};

/// Affine discrete-time transition system T = (Q, A, delta, Q_i).
class TransitionSystem {
  public:
    TransitionSystem() = default;
    /// Validates: unique names, finite bounds, one rule per state variable,
    /// rules over declared variables, guards that are binary actions,
    /// derived terms over state variables, init inside bounds.
    TransitionSystem(std::vector<StateVar> states, std::vector<ActionVar> actions,
                     std::map<std::string, UpdateRule, std::less<>> updates,
                     std::map<std::string, InitSpec, std::less<>> init = {},
                     std::vector<DerivedVar> derived = {});

    const std::vector<StateVar>& states() const { return states_; }
    const std::vector<ActionVar>& actions() const { return actions_; }
    const std::vector<DerivedVar>& derived() const { return derived_; }
    const UpdateRule& rule(int state) const { return rules_[static_cast<std::size_t>(state)]; }
    const std::map<std::string, InitSpec, std::less<>>& init() const { return init_; }

    int num_states() const { return static_cast<int>(states_.size()); }
    int num_actions() const { return static_cast<int>(actions_.size()); }
    std::optional<int> state_index(std::string_view name) const;
    std::optional<int> action_index(std::string_view name) const;
    std::optional<int> derived_index(std::string_view name) const;

    /// State variables followed by derived variables.
    std::vector<std::string> signal_variables() const;

    /// Initial state: point inits as given, ranges at their midpoint,
    /// undeclared at the midpoint of the state bounds.
    Eigen::VectorXd initial_state() const;

    /// Compiled rule: next = A q + B a + c (then branch; else branch for switched rules).
    const Eigen::MatrixXd& then_state() const { return a_then_; }
    const Eigen::MatrixXd& then_action() const { return b_then_; }
    const Eigen::VectorXd& then_offset() const { return c_then_; }
    const Eigen::MatrixXd& else_state() const { return a_else_; }
    const Eigen::MatrixXd& else_action() const { return b_else_; }
    const Eigen::VectorXd& else_offset() const { return c_else_; }
    /// Action index of each state's guard, or -1.
    const std::vector<int>& guards() const { return guards_; }

  private:
    std::vector<StateVar> states_;
    std::vector<ActionVar> actions_;
    std::vector<UpdateRule> rules_;
    std::map<std::string, InitSpec, std::less<>> init_;
    std::vector<DerivedVar> derived_;
    Eigen::MatrixXd a_then_, b_then_, a_else_, b_else_;
    Eigen::VectorXd c_then_, c_else_;
    std::vector<int> guards_;
};

/// Declarative model text; see docs/grammar.md.
TransitionSystem parse_model(std::string_view text);
TransitionSystem parse_model_file(const std::string& path);
std::string print_model(const TransitionSystem& t);

/// One transition. Throws InvalidInput for out-of-bounds inputs; the result
/// is clamped to the state bounds and clamped variables are reported.
Eigen::VectorXd step(const TransitionSystem& t, const Eigen::VectorXd& q, const Eigen::VectorXd& a,
                     std::vector<std::string>* clamped = nullptr);

Eigen::VectorXd derived_values(const TransitionSystem& t, const Eigen::VectorXd& q);

/// N+1 samples q, delta(q, a_0), ... Columns are signal_variables().
/// actions has one row per step.
stl::Signal predict(const TransitionSystem& t, const Eigen::VectorXd& q, const Eigen::MatrixXd& actions,
                    double step_duration = 1.0);

/// Per-step interval boxes reachable from q within N steps (rows 0..N),
/// intersected with the declared bounds.
void reachable_boxes(const TransitionSystem& t, const Eigen::VectorXd& q, int N, Eigen::MatrixXd& lo,
                     Eigen::MatrixXd& hi);

} // namespace weakres::env
