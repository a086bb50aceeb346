#include "weakres/weak/weakstl.hpp"

#include <algorithm>

#include "weakres/error.hpp"
#include "weakres/text/lexer.hpp"

namespace weakres::weak {

using stl::Op;

namespace {

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

void check(const Node& n) {
    if (n.pred_slack) {
        if (n.op != Op::Pred)
            throw InvalidInput("predicate slack on a non-predicate node");
        if (n.pred_slack->bound < 0)
            throw InvalidInput("negative weakening bound");
        if (!(n.pred_slack->scale > 0.0))
            throw InvalidInput("slack scale must be positive");
    }
    if (n.window_slack) {
        if (n.op != Op::Always && n.op != Op::Eventually)
            throw InvalidInput(n.op == Op::Until ? "the until operator takes no weakening parameters"
                                                 : "window slack on a non-temporal node");
        if (n.window_slack->left < 0 || n.window_slack->right < 0)
            throw InvalidInput("negative weakening bound");
        if (n.op == Op::Always &&
            n.interval.lo + n.window_slack->left > n.interval.hi - n.window_slack->right)
            throw InvalidInput("weakened window of G[" + std::to_string(n.interval.lo) + "," +
                               std::to_string(n.interval.hi) + "] can become empty");
    }
    switch (n.op) {
    case Op::True:
    case Op::Pred:
        return;
    case Op::Not:
        check(*n.lhs);
        return;
    case Op::And:
    case Op::Or:
        check(*n.lhs);
        check(*n.rhs);
        return;
    case Op::Until:
        stl::validate_interval(n.interval);
        check(*n.lhs);
        check(*n.rhs);
        return;
    case Op::Eventually:
    case Op::Always:
        stl::validate_interval(n.interval);
        check(*n.lhs);
        return;
    }
}

void collect(const Node& n, Polarity pol, std::vector<ParamInfo>& out) {
    if (n.op == Op::Pred && n.pred_slack)
        out.push_back({&n, ParamKind::PredicateSlack, n.pred_slack->bound, pol});
    if (n.window_slack) {
        out.push_back({&n, ParamKind::WindowLeft, n.window_slack->left, pol});
        out.push_back({&n, ParamKind::WindowRight, n.window_slack->right, pol});
    }
    if (n.lhs)
        collect(*n.lhs, n.op == Op::Not ? flip(pol) : pol, out);
    if (n.rhs)
        collect(*n.rhs, pol, out);
}

struct Instantiator {
    const std::vector<int>& values;
    std::size_t next = 0;
    InstantiateReport* report;

    NodePtr run(const Node& n, Polarity pol) {
        Node out;
        out.op = n.op;
        out.expr = n.expr;
        out.interval = n.interval;
        if (n.op == Op::Pred && n.pred_slack) {
            double shift = values[next++] * n.pred_slack->scale;
            out.expr.add_constant(pol == Polarity::Weaken ? shift : -shift);
        }
        if (n.window_slack) {
            int x = values[next++];
            int y = values[next++];
            bool clamped = false;
            out.interval = adjusted_window(n, x, y, pol, &clamped);
            if (clamped && report)
                ++report->clamped;
        }
        if (n.lhs)
            out.lhs = run(*n.lhs, n.op == Op::Not ? flip(pol) : pol);
        if (n.rhs)
            out.rhs = run(*n.rhs, pol);
        return make(std::move(out));
    }
};

int max_h(const Node& n, Polarity pol) {
    switch (n.op) {
    case Op::True:
    case Op::Pred:
        return 0;
    case Op::Not:
        return max_h(*n.lhs, flip(pol));
    case Op::And:
    case Op::Or:
        return std::max(max_h(*n.lhs, pol), max_h(*n.rhs, pol));
    case Op::Until:
        return n.interval.hi + std::max(max_h(*n.lhs, pol), max_h(*n.rhs, pol));
    case Op::Eventually:
    case Op::Always: {
        int hi = n.interval.hi;
        bool grows = (n.op == Op::Eventually) == (pol == Polarity::Weaken);
        if (n.window_slack && grows)
            hi += n.window_slack->right;
        return hi + max_h(*n.lhs, pol);
    }
    }
    return 0;
}

} // namespace

stl::Interval adjusted_window(const Node& n, int x, int y, Polarity pol, bool* clamped) {
    // Shrinking an Always or enlarging an Eventually weakens it.
    bool shrink = (n.op == Op::Always) == (pol == Polarity::Weaken);
    stl::Interval w = n.interval;
    if (shrink) {
        w.lo += x;
        w.hi -= y;
    } else {
        w.lo -= x;
        w.hi += y;
        if (w.lo < 0) {
            w.lo = 0;
            if (clamped)
                *clamped = true;
        }
    }
    if (w.lo > w.hi)
        throw InvalidInput("adjusted window [" + std::to_string(w.lo) + "," + std::to_string(w.hi) +
                           "] is empty");
    return w;
}

WeakStlFormula::WeakStlFormula() : root_(make(Node{})) {}

WeakStlFormula::WeakStlFormula(NodePtr root) : root_(std::move(root)) {
    if (!root_)
        throw InvalidInput("null formula");
    check(*root_);
}

WeakStlFormula parse_weakstl(std::string_view text) {
    text::TokenStream ts(text::tokenize(text));
    NodePtr root = text::parse_formula(ts, true);
    if (ts.at(text::Tok::Ident))
        ts.fail("unknown operator '" + ts.peek().text + "'");
    if (!ts.at(text::Tok::End))
        ts.fail("unexpected '" + ts.peek().text + "' after formula");
    return WeakStlFormula(root);
}

std::string to_string(const WeakStlFormula& f) { return stl::print(f.root()); }

std::vector<ParamInfo> parameters(const WeakStlFormula& f) {
    std::vector<ParamInfo> out;
    collect(f.root(), Polarity::Weaken, out);
    return out;
}

int weaken_param_count(const WeakStlFormula& f) { return static_cast<int>(parameters(f).size()); }

std::vector<int> theta_bounds(const WeakStlFormula& f) {
    std::vector<int> b;
    for (const auto& p : parameters(f))
        b.push_back(p.bound);
    return b;
}

Theta::Theta(std::vector<int> values, std::vector<int> bounds)
    : values_(std::move(values)), bounds_(std::move(bounds)) {
    if (values_.size() != bounds_.size())
        throw InvalidInput("theta has " + std::to_string(values_.size()) + " values but " +
                           std::to_string(bounds_.size()) + " bounds");
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (values_[i] < 0 || values_[i] > bounds_[i])
            throw InvalidInput("theta[" + std::to_string(i) + "] = " + std::to_string(values_[i]) +
                               " outside [0," + std::to_string(bounds_[i]) + "]");
}

Theta Theta::zeros(const WeakStlFormula& f) {
    auto b = theta_bounds(f);
    return Theta(std::vector<int>(b.size(), 0), b);
}

Theta Theta::maximal(const WeakStlFormula& f) {
    auto b = theta_bounds(f);
    return Theta(b, b);
}

bool Theta::is_zero() const {
    return std::all_of(values_.begin(), values_.end(), [](int v) { return v == 0; });
}

std::string to_string(const Theta& theta) {
    std::string s = "(";
    for (std::size_t i = 0; i < theta.size(); ++i)
        s += (i ? ", " : "") + std::to_string(theta[i]);
    return s + ")";
}

StlFormula instantiate(const WeakStlFormula& f, const Theta& theta, Polarity polarity,
                       InstantiateReport* report) {
    auto bounds = theta_bounds(f);
    if (bounds != theta.bounds())
        throw InvalidInput("theta bounds do not match the formula's weakening parameters");
    Instantiator inst{theta.values(), 0, report};
    return StlFormula(inst.run(f.root(), polarity));
}

StlFormula strip(const WeakStlFormula& f) { return instantiate(f, Theta::zeros(f)); }

StlFormula minimal_requirement(const WeakStlFormula& f) { return instantiate(f, Theta::maximal(f)); }

double degree_of_weakening(const WeakStlFormula& f, const Theta& theta, const stl::Signal& s,
                           Index t, const stl::MonitorOptions& opt) {
    return stl::robustness(instantiate(f, theta), s, t, opt) - stl::robustness(strip(f), s, t, opt);
}

int max_horizon(const WeakStlFormula& f, Polarity polarity) { return max_h(f.root(), polarity); }

} // namespace weakres::weak
