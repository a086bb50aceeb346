#include "weakres/env/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "weakres/error.hpp"
#include "weakres/text/lexer.hpp"

namespace weakres::env {

namespace {

constexpr double kTol = 1e-9;

void check_bounds(const std::string& name, double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
        throw InvalidInput("invalid bounds [" + stl::format_number(lo) + ", " + stl::format_number(hi) +
                           "] for '" + name + "'");
}

} // namespace

TransitionSystem::TransitionSystem(std::vector<StateVar> states, std::vector<ActionVar> actions,
                                   std::map<std::string, UpdateRule, std::less<>> updates,
                                   std::map<std::string, InitSpec, std::less<>> init,
                                   std::vector<DerivedVar> derived)
    : states_(std::move(states)), actions_(std::move(actions)), init_(std::move(init)),
      derived_(std::move(derived)) {
    std::set<std::string, std::less<>> names;
    auto declare = [&](const std::string& n) {
        if (n.empty() || text::is_reserved(n))
            throw InvalidInput("invalid variable name '" + n + "'");
        if (!names.insert(n).second)
            throw InvalidInput("duplicate declaration of '" + n + "'");
    };
    for (const auto& s : states_) {
        declare(s.name);
        check_bounds(s.name, s.lo, s.hi);
    }
    for (const auto& a : actions_) {
        declare(a.name);
        check_bounds(a.name, a.lo, a.hi);
        if (a.kind == ActionKind::Binary && (a.lo < 0.0 || a.hi > 1.0))
            throw InvalidInput("binary action '" + a.name + "' must lie in [0,1]");
    }
    for (const auto& d : derived_) {
        declare(d.name);
        if (d.terms.empty())
            throw InvalidInput("derived variable '" + d.name + "' has no terms");
        for (const auto& t : d.terms)
            for (const auto& [v, c] : t.coefficients())
                if (!state_index(v))
                    throw InvalidInput("derived variable '" + d.name + "' references '" + v +
                                       "', which is not a state variable");
    }

    int ns = num_states(), na = num_actions();
    a_then_ = Eigen::MatrixXd::Zero(ns, ns);
    b_then_ = Eigen::MatrixXd::Zero(ns, na);
    c_then_ = Eigen::VectorXd::Zero(ns);
    a_else_ = a_then_;
    b_else_ = b_then_;
    c_else_ = c_then_;
    guards_.assign(static_cast<std::size_t>(ns), -1);

    auto compile = [&](const std::string& target, const AffineExpr& e, Eigen::MatrixXd& a,
                       Eigen::MatrixXd& b, Eigen::VectorXd& c, int row) {
        c(row) = e.constant();
        for (const auto& [v, k] : e.coefficients()) {
            if (auto i = state_index(v))
                a(row, *i) = k;
            else if (auto j = action_index(v))
                b(row, *j) = k;
            else
                throw InvalidInput("update of '" + target + "' references undeclared variable '" + v + "'");
        }
    };

    for (const auto& [name, rule] : updates)
        if (!state_index(name))
            throw InvalidInput("update rule for undeclared state variable '" + name + "'");
    for (int i = 0; i < ns; ++i) {
        const auto& s = states_[static_cast<std::size_t>(i)];
        auto it = updates.find(s.name);
        if (it == updates.end())
            throw InvalidInput("missing update rule for state variable '" + s.name + "'");
        const UpdateRule& r = it->second;
        compile(s.name, r.then_expr, a_then_, b_then_, c_then_, i);
        if (r.switched()) {
            auto g = action_index(*r.guard);
            if (!g || actions_[static_cast<std::size_t>(*g)].kind != ActionKind::Binary)
                throw InvalidInput("guard '" + *r.guard + "' of '" + s.name + "' is not a binary action");
            guards_[static_cast<std::size_t>(i)] = *g;
            compile(s.name, r.else_expr, a_else_, b_else_, c_else_, i);
        } else {
            compile(s.name, r.then_expr, a_else_, b_else_, c_else_, i);
        }
        rules_.push_back(r);
    }

    for (const auto& [name, spec] : init_) {
        auto i = state_index(name);
        if (!i)
            throw InvalidInput("init for undeclared state variable '" + name + "'");
        const auto& s = states_[static_cast<std::size_t>(*i)];
        if (spec.lo > spec.hi || spec.lo < s.lo - kTol || spec.hi > s.hi + kTol)
            throw InvalidInput("init of '" + name + "' lies outside its bounds");
    }
}

std::optional<int> TransitionSystem::state_index(std::string_view name) const {
    for (std::size_t i = 0; i < states_.size(); ++i)
        if (states_[i].name == name)
            return static_cast<int>(i);
    return std::nullopt;
}

std::optional<int> TransitionSystem::action_index(std::string_view name) const {
    for (std::size_t i = 0; i < actions_.size(); ++i)
        if (actions_[i].name == name)
            return static_cast<int>(i);
    return std::nullopt;
}

std::optional<int> TransitionSystem::derived_index(std::string_view name) const {
    for (std::size_t i = 0; i < derived_.size(); ++i)
        if (derived_[i].name == name)
            return static_cast<int>(i);
    return std::nullopt;
}

std::vector<std::string> TransitionSystem::signal_variables() const {
    std::vector<std::string> v;
    for (const auto& s : states_)
        v.push_back(s.name);
    for (const auto& d : derived_)
        v.push_back(d.name);
    return v;
}

Eigen::VectorXd TransitionSystem::initial_state() const {
    Eigen::VectorXd q(num_states());
    for (int i = 0; i < num_states(); ++i) {
        const auto& s = states_[static_cast<std::size_t>(i)];
        auto it = init_.find(s.name);
        q(i) = it != init_.end() ? 0.5 * (it->second.lo + it->second.hi) : 0.5 * (s.lo + s.hi);
    }
    return q;
}

Eigen::VectorXd step(const TransitionSystem& t, const Eigen::VectorXd& q, const Eigen::VectorXd& a,
                     std::vector<std::string>* clamped) {
    if (q.size() != t.num_states() || a.size() != t.num_actions())
        throw InvalidInput("state/action dimension mismatch");
    for (int i = 0; i < t.num_states(); ++i) {
        const auto& s = t.states()[static_cast<std::size_t>(i)];
        if (!(q(i) >= s.lo - kTol && q(i) <= s.hi + kTol))
            throw InvalidInput("state '" + s.name + "' = " + stl::format_number(q(i)) + " out of bounds");
    }
    for (int j = 0; j < t.num_actions(); ++j) {
        const auto& v = t.actions()[static_cast<std::size_t>(j)];
        if (!(a(j) >= v.lo - kTol && a(j) <= v.hi + kTol))
            throw InvalidInput("action '" + v.name + "' = " + stl::format_number(a(j)) + " out of bounds");
        if (v.kind == ActionKind::Binary && a(j) != 0.0 && a(j) != 1.0)
            throw InvalidInput("binary action '" + v.name + "' must be 0 or 1");
    }
    Eigen::VectorXd then_v = t.then_state() * q + t.then_action() * a + t.then_offset();
    Eigen::VectorXd else_v = t.else_state() * q + t.else_action() * a + t.else_offset();
    Eigen::VectorXd next(t.num_states());
    for (int i = 0; i < t.num_states(); ++i) {
        int g = t.guards()[static_cast<std::size_t>(i)];
        next(i) = (g < 0 || a(g) == 1.0) ? then_v(i) : else_v(i);
        const auto& s = t.states()[static_cast<std::size_t>(i)];
        if (next(i) < s.lo || next(i) > s.hi) {
            next(i) = std::clamp(next(i), s.lo, s.hi);
            if (clamped)
                clamped->push_back(s.name);
        }
    }
    return next;
}

Eigen::VectorXd derived_values(const TransitionSystem& t, const Eigen::VectorXd& q) {
    Eigen::VectorXd out(static_cast<Index>(t.derived().size()));
    auto lookup = [&](const std::string& v) { return q(*t.state_index(v)); };
    for (std::size_t k = 0; k < t.derived().size(); ++k) {
        const auto& d = t.derived()[k];
        double v = d.terms.front().evaluate(lookup);
        for (const auto& term : d.terms)
            v = d.kind == DerivedKind::Max ? std::max(v, term.evaluate(lookup))
                                           : std::min(v, term.evaluate(lookup));
        out(static_cast<Index>(k)) = v;
    }
    return out;
}

stl::Signal predict(const TransitionSystem& t, const Eigen::VectorXd& q, const Eigen::MatrixXd& actions,
                    double step_duration) {
    if (actions.rows() < 1)
        throw InvalidInput("prediction needs at least one action step");
    if (actions.cols() != t.num_actions())
        throw InvalidInput("action sequence has " + std::to_string(actions.cols()) + " columns, model has " +
                           std::to_string(t.num_actions()) + " actions");
    int ns = t.num_states();
    auto nd = static_cast<Index>(t.derived().size());
    Eigen::MatrixXd samples(actions.rows() + 1, ns + nd);
    Eigen::VectorXd cur = q;
    for (Index k = 0; k <= actions.rows(); ++k) {
        samples.row(k).head(ns) = cur.transpose();
        if (nd)
            samples.row(k).tail(nd) = derived_values(t, cur).transpose();
        if (k < actions.rows())
            cur = step(t, cur, actions.row(k).transpose());
    }
    return stl::Signal(t.signal_variables(), std::move(samples), step_duration);
}

void reachable_boxes(const TransitionSystem& t, const Eigen::VectorXd& q, int N, Eigen::MatrixXd& lo,
                     Eigen::MatrixXd& hi) {
    int ns = t.num_states(), na = t.num_actions();
    lo.resize(N + 1, ns);
    hi.resize(N + 1, ns);
    lo.row(0) = q.transpose();
    hi.row(0) = q.transpose();
    Eigen::VectorXd alo(na), ahi(na);
    for (int j = 0; j < na; ++j) {
        alo(j) = t.actions()[static_cast<std::size_t>(j)].lo;
        ahi(j) = t.actions()[static_cast<std::size_t>(j)].hi;
    }
    auto image = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::VectorXd& c, int i,
                     int k, double& l, double& h) {
        l = h = c(i);
        for (int s = 0; s < ns; ++s) {
            double v1 = a(i, s) * lo(k, s), v2 = a(i, s) * hi(k, s);
            l += std::min(v1, v2);
            h += std::max(v1, v2);
        }
        for (int j = 0; j < na; ++j) {
            double v1 = b(i, j) * alo(j), v2 = b(i, j) * ahi(j);
            l += std::min(v1, v2);
            h += std::max(v1, v2);
        }
    };
    for (int k = 0; k < N; ++k)
        for (int i = 0; i < ns; ++i) {
            double l1, h1, l2, h2;
            image(t.then_state(), t.then_action(), t.then_offset(), i, k, l1, h1);
            image(t.else_state(), t.else_action(), t.else_offset(), i, k, l2, h2);
            const auto& s = t.states()[static_cast<std::size_t>(i)];
            double l = std::max(std::min(l1, l2), s.lo);
            double h = std::min(std::max(h1, h2), s.hi);
            if (l > h) // The whole image leaves the bounds; keep an empty-looking point box.
                l = h = std::clamp(l, s.lo, s.hi);
            lo(k + 1, i) = l;
            hi(k + 1, i) = h;
        }
}

// ---------------------------------------------------------------------------
// Text format

namespace {

using text::Tok;
using text::TokenStream;

double constant_value(TokenStream& ts, const text::ConstantTable& consts) {
    const auto& start = ts.peek();
    AffineExpr e = text::parse_affine(ts, &consts);
    if (!e.is_constant())
        throw ParseError("expected a constant expression", start.line, start.column);
    return e.constant();
}

std::string name(TokenStream& ts, std::string_view what) {
    const auto& t = ts.expect(Tok::Ident, what);
    if (text::is_reserved(t.text))
        throw ParseError("reserved word '" + t.text + "' used as a name", t.line, t.column);
    return t.text;
}

std::pair<double, double> range(TokenStream& ts, const text::ConstantTable& consts) {
    ts.expect(Tok::LBracket, "'['");
    double lo = constant_value(ts, consts);
    ts.expect(Tok::Comma, "','");
    double hi = constant_value(ts, consts);
    ts.expect(Tok::RBracket, "']'");
    return {lo, hi};
}

} // namespace

TransitionSystem parse_model(std::string_view src) {
    TokenStream ts(text::tokenize(src));
    text::ConstantTable consts;
    std::vector<StateVar> states;
    std::vector<ActionVar> actions;
    std::map<std::string, UpdateRule, std::less<>> updates;
    std::map<std::string, InitSpec, std::less<>> init;
    std::vector<DerivedVar> derived;
    std::set<std::string, std::less<>> declared;

    auto check_refs = [&](const AffineExpr& e, const text::Token& at) {
        for (const auto& [v, c] : e.coefficients())
            if (!declared.count(v))
                throw ParseError("undeclared variable '" + v + "'", at.line, at.column);
    };

    while (!ts.at(Tok::End)) {
        const text::Token kw = ts.peek();
        if (kw.kind != Tok::Ident)
            ts.fail("expected a declaration");
        if (kw.text == "const") {
            ts.next();
            std::string n = name(ts, "constant name");
            ts.expect(Tok::Assign, "'='");
            consts[n] = constant_value(ts, consts);
        } else if (kw.text == "state") {
            ts.next();
            std::string n = name(ts, "state name");
            if (!ts.at_ident("in"))
                ts.fail("expected 'in'");
            ts.next();
            auto [lo, hi] = range(ts, consts);
            states.push_back({n, lo, hi});
            declared.insert(n);
        } else if (kw.text == "action") {
            ts.next();
            std::string n = name(ts, "action name");
            if (!ts.at_ident("in"))
                ts.fail("expected 'in'");
            ts.next();
            auto [lo, hi] = range(ts, consts);
            ActionKind kind = ActionKind::Continuous;
            if (ts.at_ident("binary")) {
                ts.next();
                kind = ActionKind::Binary;
            }
            actions.push_back({n, lo, hi, kind});
            declared.insert(n);
        } else if (kw.text == "init") {
            ts.next();
            std::string n = name(ts, "state name");
            if (ts.accept(Tok::Assign)) {
                double v = constant_value(ts, consts);
                init[n] = {v, v};
            } else if (ts.at_ident("in")) {
                ts.next();
                auto [lo, hi] = range(ts, consts);
                init[n] = {lo, hi};
            } else {
                ts.fail("expected '=' or 'in'");
            }
        } else if (kw.text == "derived") {
            ts.next();
            std::string n = name(ts, "derived name");
            ts.expect(Tok::Assign, "'='");
            DerivedVar d;
            d.name = n;
            if (ts.at_ident("max"))
                d.kind = DerivedKind::Max;
            else if (ts.at_ident("min"))
                d.kind = DerivedKind::Min;
            else
                ts.fail("expected 'max' or 'min'");
            ts.next();
            ts.expect(Tok::LParen, "'('");
            do {
                const auto at = ts.peek();
                d.terms.push_back(text::parse_affine(ts, &consts));
                check_refs(d.terms.back(), at);
            } while (ts.accept(Tok::Comma));
            ts.expect(Tok::RParen, "')'");
            derived.push_back(std::move(d));
            declared.insert(n);
        } else {
            std::string target;
            if (kw.text == "next") {
                ts.next();
                ts.expect(Tok::LParen, "'('");
                target = name(ts, "state name");
                ts.expect(Tok::RParen, "')'");
            } else {
                target = name(ts, "declaration");
                if (!ts.at(Tok::Prime))
                    throw ParseError("unknown declaration '" + kw.text + "'", kw.line, kw.column);
                ts.next();
            }
            ts.expect(Tok::Assign, "'='");
            if (updates.count(target))
                throw ParseError("second update rule for '" + target + "'", kw.line, kw.column);
            UpdateRule r;
            if (ts.at_ident("if")) {
                ts.next();
                r.guard = name(ts, "guard action");
                if (!ts.at_ident("then"))
                    ts.fail("expected 'then'");
                ts.next();
                auto at = ts.peek();
                r.then_expr = text::parse_affine(ts, &consts);
                check_refs(r.then_expr, at);
                if (!ts.at_ident("else"))
                    ts.fail("expected 'else'");
                ts.next();
                at = ts.peek();
                r.else_expr = text::parse_affine(ts, &consts);
                check_refs(r.else_expr, at);
            } else {
                auto at = ts.peek();
                r.then_expr = text::parse_affine(ts, &consts);
                check_refs(r.then_expr, at);
            }
            updates[target] = std::move(r);
        }
        ts.expect(Tok::Semicolon, "';'");
    }
    try {
        return TransitionSystem(std::move(states), std::move(actions), std::move(updates), std::move(init),
                                std::move(derived));
    } catch (const InvalidInput& e) {
        throw ParseError(e.what(), ts.peek().line, ts.peek().column);
    }
}

TransitionSystem parse_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw InvalidInput("cannot open model file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::string print_model(const TransitionSystem& t) {
    using stl::format_number;
    std::string out;
    for (const auto& s : t.states())
        out += "state " + s.name + " in [" + format_number(s.lo) + ", " + format_number(s.hi) + "];\n";
    for (const auto& a : t.actions())
        out += "action " + a.name + " in [" + format_number(a.lo) + ", " + format_number(a.hi) + "]" +
               (a.kind == ActionKind::Binary ? " binary" : "") + ";\n";
    for (const auto& [n, spec] : t.init())
        out += spec.lo == spec.hi ? "init " + n + " = " + format_number(spec.lo) + ";\n"
                                  : "init " + n + " in [" + format_number(spec.lo) + ", " +
                                        format_number(spec.hi) + "];\n";
    for (int i = 0; i < t.num_states(); ++i) {
        const auto& r = t.rule(i);
        out += "next(" + t.states()[static_cast<std::size_t>(i)].name + ") = ";
        if (r.switched())
            out += "if " + *r.guard + " then " + to_string(r.then_expr) + " else " + to_string(r.else_expr);
        else
            out += to_string(r.then_expr);
        out += ";\n";
    }
    for (const auto& d : t.derived()) {
        out += "derived " + d.name + " = " + (d.kind == DerivedKind::Max ? "max(" : "min(");
        for (std::size_t k = 0; k < d.terms.size(); ++k)
            out += (k ? ", " : "") + to_string(d.terms[k]);
        out += ");\n";
    }
    return out;
}

} // namespace weakres::env
