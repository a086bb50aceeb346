#include "weakres/stl/formula.hpp"

#include <algorithm>

#include "weakres/error.hpp"

namespace weakres::stl {

namespace {

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

void check_tree(const Node& n) {
    switch (n.op) {
    case Op::True:
    case Op::Pred:
        return;
    case Op::Not:
        check_tree(*n.lhs);
        return;
    case Op::And:
    case Op::Or:
        check_tree(*n.lhs);
        check_tree(*n.rhs);
        return;
    case Op::Until:
        validate_interval(n.interval);
        check_tree(*n.lhs);
        check_tree(*n.rhs);
        return;
    case Op::Eventually:
    case Op::Always:
        validate_interval(n.interval);
        check_tree(*n.lhs);
        return;
    }
}

std::string print_interval(const Interval& i) {
    return "[" + std::to_string(i.lo) + "," + std::to_string(i.hi) + "]";
}

} // namespace

void validate_interval(const Interval& i) {
    if (i.lo < 0 || i.lo > i.hi)
        throw InvalidInput("malformed interval " + print_interval(i) + ": need 0 <= lo <= hi");
}

bool structurally_equal(const Node& a, const Node& b) {
    if (&a == &b)
        return true;
    if (a.op != b.op || a.pred_slack != b.pred_slack || a.window_slack != b.window_slack)
        return false;
    switch (a.op) {
    case Op::True:
        return true;
    case Op::Pred:
        return a.expr == b.expr;
    case Op::Not:
        return structurally_equal(*a.lhs, *b.lhs);
    case Op::And:
    case Op::Or:
        return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
    case Op::Until:
        return a.interval == b.interval && structurally_equal(*a.lhs, *b.lhs) &&
               structurally_equal(*a.rhs, *b.rhs);
    case Op::Eventually:
    case Op::Always:
        return a.interval == b.interval && structurally_equal(*a.lhs, *b.lhs);
    }
    return false;
}

bool has_annotations(const Node& n) {
    if (n.pred_slack || n.window_slack)
        return true;
    return (n.lhs && has_annotations(*n.lhs)) || (n.rhs && has_annotations(*n.rhs));
}

std::string print(const Node& n) {
    switch (n.op) {
    case Op::True:
        return "true";
    case Op::Pred: {
        std::string s = "(" + to_string(n.expr) + " > 0)";
        if (n.pred_slack) {
            s += "{" + std::to_string(n.pred_slack->bound);
            if (n.pred_slack->scale != 1.0)
                s += "*" + format_number(n.pred_slack->scale);
            s += "}";
        }
        return s;
    }
    case Op::Not:
        return "!" + print(*n.lhs);
    case Op::And:
        return "(" + print(*n.lhs) + " & " + print(*n.rhs) + ")";
    case Op::Or:
        return "(" + print(*n.lhs) + " | " + print(*n.rhs) + ")";
    case Op::Until:
        return "(" + print(*n.lhs) + " U" + print_interval(n.interval) + " " + print(*n.rhs) + ")";
    case Op::Eventually:
    case Op::Always: {
        std::string s = (n.op == Op::Always ? "G" : "F") + print_interval(n.interval);
        if (n.window_slack)
            s += "{" + std::to_string(n.window_slack->left) + "," +
                 std::to_string(n.window_slack->right) + "}";
        return s + print(*n.lhs);
    }
    }
    return {};
}

int horizon(const Node& n) {
    switch (n.op) {
    case Op::True:
    case Op::Pred:
        return 0;
    case Op::Not:
        return horizon(*n.lhs);
    case Op::And:
    case Op::Or:
        return std::max(horizon(*n.lhs), horizon(*n.rhs));
    case Op::Until:
        return n.interval.hi + std::max(horizon(*n.lhs), horizon(*n.rhs));
    case Op::Eventually:
    case Op::Always:
        return n.interval.hi + horizon(*n.lhs);
    }
    return 0;
}

namespace {

void collect(const Node& n, std::vector<std::string>& out) {
    for (const auto& [v, c] : n.expr.coefficients())
        out.push_back(v);
    if (n.lhs)
        collect(*n.lhs, out);
    if (n.rhs)
        collect(*n.rhs, out);
}

} // namespace

std::vector<std::string> variables(const Node& n) {
    std::vector<std::string> out;
    collect(n, out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

StlFormula::StlFormula() : root_(make(Node{})) {}

StlFormula::StlFormula(NodePtr root) : root_(std::move(root)) {
    if (!root_)
        throw InvalidInput("null formula");
    if (has_annotations(*root_))
        throw InvalidInput("STL formula carries weakening annotations");
    check_tree(*root_);
}

std::string to_string(const StlFormula& f) { return print(f.root()); }
int horizon(const StlFormula& f) { return horizon(f.root()); }

StlFormula truth() { return StlFormula(); }

StlFormula pred(AffineExpr f) {
    Node n;
    n.op = Op::Pred;
    n.expr = std::move(f);
    return StlFormula(make(std::move(n)));
}

StlFormula negate(const StlFormula& f) {
    Node n;
    n.op = Op::Not;
    n.lhs = f.node();
    return StlFormula(make(std::move(n)));
}

StlFormula conj(const StlFormula& a, const StlFormula& b) {
    Node n;
    n.op = Op::And;
    n.lhs = a.node();
    n.rhs = b.node();
    return StlFormula(make(std::move(n)));
}

StlFormula disj(const StlFormula& a, const StlFormula& b) {
    Node n;
    n.op = Op::Or;
    n.lhs = a.node();
    n.rhs = b.node();
    return StlFormula(make(std::move(n)));
}

StlFormula implies(const StlFormula& a, const StlFormula& b) { return disj(negate(a), b); }

StlFormula until(Interval window, const StlFormula& a, const StlFormula& b) {
    Node n;
    n.op = Op::Until;
    n.interval = window;
    n.lhs = a.node();
    n.rhs = b.node();
    return StlFormula(make(std::move(n)));
}

StlFormula eventually(Interval window, const StlFormula& f) {
    Node n;
    n.op = Op::Eventually;
    n.interval = window;
    n.lhs = f.node();
    return StlFormula(make(std::move(n)));
}

StlFormula always(Interval window, const StlFormula& f) {
    Node n;
    n.op = Op::Always;
    n.interval = window;
    n.lhs = f.node();
    return StlFormula(make(std::move(n)));
}

} // namespace weakres::stl
