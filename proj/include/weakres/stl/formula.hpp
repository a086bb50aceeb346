#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "weakres/stl/affine.hpp"

namespace weakres::stl {

/// Closed step window [lo, hi] relative to the evaluation step.
struct Interval {
    int lo = 0;
    int hi = 0;
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Admissible slack on a predicate: f(s) + x * scale > 0 with 0 <= x <= bound.
struct PredicateSlack {
    int bound = 0;
    double scale = 1.0;
    friend bool operator==(const PredicateSlack&, const PredicateSlack&) = default;
};

/// Admissible adjustment of a temporal window: x <= left, y <= right.
struct WindowSlack {
    int left = 0;
    int right = 0;
    friend bool operator==(const WindowSlack&, const WindowSlack&) = default;
};

enum class Op { True, Pred, Not, And, Or, Until, Eventually, Always };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// One AST node. Plain STL trees never carry slack annotations; weakSTL
/// trees may carry them on Pred / Always / Eventually nodes only.
struct Node {
    Op op = Op::True;
    AffineExpr expr;                  // Pred: f in f(s(t)) > 0
    Interval interval;                // Until / Eventually / Always
    NodePtr lhs;                      // Not / Eventually / Always child, or left operand
    NodePtr rhs;                      // right operand of And / Or / Until
    std::optional<PredicateSlack> pred_slack;
    std::optional<WindowSlack> window_slack;
};

bool structurally_equal(const Node& a, const Node& b);
bool has_annotations(const Node& n);
/// Canonical, fully parenthesised text; parses back to an equal tree.
std::string print(const Node& n);

/// Signal Temporal Logic formula. Immutable; copies share structure.
class StlFormula {
  public:
    StlFormula();
    /// Adopts a tree; throws InvalidInput if it carries weakening annotations
    /// or an invalid interval.
    explicit StlFormula(NodePtr root);

    const Node& root() const { return *root_; }
    const NodePtr& node() const { return root_; }

    friend bool operator==(const StlFormula& a, const StlFormula& b) {
        return structurally_equal(*a.root_, *b.root_);
    }

  private:
    NodePtr root_;
};

std::string to_string(const StlFormula& f);

/// Smallest H such that robustness at t depends only on samples t..t+H.
int horizon(const StlFormula& f);
int horizon(const Node& n);

/// Signal variables mentioned anywhere in the tree, sorted.
std::vector<std::string> variables(const Node& n);

// Expression-style builders.
StlFormula truth();
StlFormula pred(AffineExpr f);
StlFormula negate(const StlFormula& f);
StlFormula conj(const StlFormula& a, const StlFormula& b);
StlFormula disj(const StlFormula& a, const StlFormula& b);
StlFormula implies(const StlFormula& a, const StlFormula& b);
StlFormula until(Interval window, const StlFormula& a, const StlFormula& b);
StlFormula eventually(Interval window, const StlFormula& f);
StlFormula always(Interval window, const StlFormula& f);

/// Throws InvalidInput unless 0 <= lo <= hi.
void validate_interval(const Interval& i);

} // namespace weakres::stl
