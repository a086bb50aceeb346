#include "weakres/stl/monitor.hpp"

#include <algorithm>
#include <limits>

#include "weakres/error.hpp"
#include "weakres/text/lexer.hpp"

namespace weakres::stl {

namespace {

double eval(const Node& n, const Signal& s, Index t, const MonitorOptions& opt) {
    switch (n.op) {
    case Op::True:
        return opt.true_value;
    case Op::Pred:
        return s.evaluate(n.expr, t);
    case Op::Not:
        return -eval(*n.lhs, s, t, opt);
    case Op::And:
        return std::min(eval(*n.lhs, s, t, opt), eval(*n.rhs, s, t, opt));
    case Op::Or:
        return std::max(eval(*n.lhs, s, t, opt), eval(*n.rhs, s, t, opt));
    case Op::Always: {
        double r = std::numeric_limits<double>::infinity();
        for (Index k = t + n.interval.lo; k <= t + n.interval.hi; ++k)
            r = std::min(r, eval(*n.lhs, s, k, opt));
        return r;
    }
    case Op::Eventually: {
        double r = -std::numeric_limits<double>::infinity();
        for (Index k = t + n.interval.lo; k <= t + n.interval.hi; ++k)
            r = std::max(r, eval(*n.lhs, s, k, opt));
        return r;
    }
    case Op::Until: {
        double best = -std::numeric_limits<double>::infinity();
        double prefix = std::numeric_limits<double>::infinity();
        for (Index k = t; k <= t + n.interval.hi; ++k) {
            if (k >= t + n.interval.lo)
                best = std::max(best, std::min(eval(*n.rhs, s, k, opt), prefix));
            prefix = std::min(prefix, eval(*n.lhs, s, k, opt));
        }
        return best;
    }
    }
    return 0.0;
}

void check_window(const Node& n, const Signal& s, Index t) {
    if (t < 0)
        throw InvalidInput("negative evaluation step");
    Index need = t + horizon(n);
    if (need > s.last_step())
        throw HorizonError("formula needs samples up to step " + std::to_string(need) +
                           " but the signal ends at step " + std::to_string(s.last_step()));
}

} // namespace

double robustness(const Node& n, const Signal& s, Index t, const MonitorOptions& opt) {
    check_window(n, s, t);
    return eval(n, s, t, opt);
}

double robustness(const StlFormula& f, const Signal& s, Index t, const MonitorOptions& opt) {
    return robustness(f.root(), s, t, opt);
}

bool satisfied(const StlFormula& f, const Signal& s, Index t, const MonitorOptions& opt) {
    return robustness(f, s, t, opt) >= 0.0;
}

Eigen::VectorXd robustness_trace(const StlFormula& f, const Signal& s, const MonitorOptions& opt) {
    Index count = std::max<Index>(0, s.length() - horizon(f));
    Eigen::VectorXd out(count);
    for (Index t = 0; t < count; ++t)
        out(t) = eval(f.root(), s, t, opt);
    return out;
}

StlFormula parse_stl(std::string_view text) {
    text::TokenStream ts(text::tokenize(text));
    NodePtr root = text::parse_formula(ts, false);
    if (ts.at(text::Tok::Ident))
        ts.fail("unknown operator '" + ts.peek().text + "'");
    if (!ts.at(text::Tok::End))
        ts.fail("unexpected '" + ts.peek().text + "' after formula");
    return StlFormula(root);
}

} // namespace weakres::stl
