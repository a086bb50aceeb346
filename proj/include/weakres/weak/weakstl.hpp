#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "weakres/stl/formula.hpp"
#include "weakres/stl/monitor.hpp"
#include "weakres/stl/signal.hpp"

namespace weakres::weak {

using stl::Index;
using stl::Node;
using stl::NodePtr;
using stl::StlFormula;

enum class Polarity { Weaken, Strengthen };

inline Polarity flip(Polarity p) {
    return p == Polarity::Weaken ? Polarity::Strengthen : Polarity::Weaken;
}

/// STL tree whose Pred / Always / Eventually nodes may carry weakening bounds.
class WeakStlFormula {
  public:
    WeakStlFormula();
    /// Throws InvalidInput on invalid intervals, annotated Until nodes, or an
    /// annotated Always whose window could become empty (lo + p > hi - q).
    explicit WeakStlFormula(NodePtr root);
    /// Wraps a plain formula; no parameters.
    explicit WeakStlFormula(const StlFormula& f) : WeakStlFormula(f.node()) {}

    const Node& root() const { return *root_; }
    const NodePtr& node() const { return root_; }

    friend bool operator==(const WeakStlFormula& a, const WeakStlFormula& b) {
        return stl::structurally_equal(*a.root_, *b.root_);
    }

  private:
    NodePtr root_;
};

WeakStlFormula parse_weakstl(std::string_view text);
std::string to_string(const WeakStlFormula& f);

enum class ParamKind { PredicateSlack, WindowLeft, WindowRight };

/// One entry of theta, in pre-order: node's own parameters, then lhs, then rhs.
struct ParamInfo {
    const Node* node = nullptr;
    ParamKind kind = ParamKind::PredicateSlack;
    int bound = 0;
    /// Polarity of the node when the whole formula is weakened.
    Polarity polarity = Polarity::Weaken;
};

std::vector<ParamInfo> parameters(const WeakStlFormula& f);
int weaken_param_count(const WeakStlFormula& f);
std::vector<int> theta_bounds(const WeakStlFormula& f);

/// Integer weakening values with per-entry bounds.
class Theta {
  public:
    Theta() = default;
    /// Throws InvalidInput unless sizes match and 0 <= values[i] <= bounds[i].
    Theta(std::vector<int> values, std::vector<int> bounds);

    static Theta zeros(const WeakStlFormula& f);
    static Theta maximal(const WeakStlFormula& f);

    const std::vector<int>& values() const { return values_; }
    const std::vector<int>& bounds() const { return bounds_; }
    std::size_t size() const { return values_.size(); }
    int operator[](std::size_t i) const { return values_[i]; }
    bool is_zero() const;

    friend bool operator==(const Theta&, const Theta&) = default;

  private:
    std::vector<int> values_;
    std::vector<int> bounds_;
};

std::string to_string(const Theta& theta);

struct InstantiateReport {
    /// Eventually windows whose left end was clamped at step 0.
    int clamped = 0;
};

/// Plain STL formula for the given theta. Throws InvalidInput when theta does
/// not fit the formula or a resulting window is empty.
StlFormula instantiate(const WeakStlFormula& f, const Theta& theta,
                       Polarity polarity = Polarity::Weaken, InstantiateReport* report = nullptr);

/// Annotation-stripped original (theta = 0).
StlFormula strip(const WeakStlFormula& f);

/// Every parameter at its bound.
StlFormula minimal_requirement(const WeakStlFormula& f);

/// rho(f_theta, s, t) - rho(f_0, s, t).
double degree_of_weakening(const WeakStlFormula& f, const Theta& theta, const stl::Signal& s,
                           Index t, const stl::MonitorOptions& opt = {});

/// Largest horizon over all admissible theta under the given top-level polarity.
int max_horizon(const WeakStlFormula& f, Polarity polarity = Polarity::Weaken);

/// Window of an Always / Eventually node after adjustment (x, y).
stl::Interval adjusted_window(const Node& n, int x, int y, Polarity polarity, bool* clamped = nullptr);

} // namespace weakres::weak
