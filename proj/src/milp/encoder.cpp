#include "weakres/milp/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <fmt/format.h>

#include "weakres/error.hpp"

namespace weakres::milp {

using stl::Node;
using stl::Op;
using weak::Polarity;

RobustnessEncoder::RobustnessEncoder(MilpProblem& p, SignalTerms signal, Index length, EncodingOptions opt,
                                     std::string prefix)
    : p_(p), signal_(std::move(signal)), length_(length), opt_(opt), prefix_(std::move(prefix)) {}

Term RobustnessEncoder::encode(const stl::StlFormula& f, Index t) {
    if (t < 0 || t + stl::horizon(f) >= length_)
        throw HorizonError(fmt::format("formula needs steps {}..{} but only {} are encoded", t,
                                       t + stl::horizon(f), length_));
    return node(f.root(), t, Polarity::Weaken);
}

Term RobustnessEncoder::encode_weak(const weak::WeakStlFormula& f, Index t, std::vector<VarId>* theta) {
    if (t < 0 || t + weak::max_horizon(f) >= length_)
        throw HorizonError(fmt::format("weakened formula needs steps {}..{} but only {} are encoded", t,
                                       t + weak::max_horizon(f), length_));
    auto ids = declare_theta(f);
    if (theta)
        *theta = ids;
    return node(f.root(), t, Polarity::Weaken);
}

std::vector<VarId> RobustnessEncoder::declare_theta(const weak::WeakStlFormula& f) {
    std::vector<VarId> ids;
    for (const auto& prm : weak::parameters(f)) {
        auto key = std::make_pair(prm.node, static_cast<int>(prm.kind));
        auto it = theta_.find(key);
        if (it == theta_.end())
            it = theta_.emplace(key, p_.add_integer(name("theta" + std::to_string(theta_.size())), 0, prm.bound))
                     .first;
        ids.push_back(it->second);
    }
    return ids;
}

void RobustnessEncoder::check_range(const Term& t) {
    double mag = std::max(std::abs(t.lo), std::abs(t.hi));
    if (mag <= opt_.big_M || warned_range_)
        return;
    std::string msg = fmt::format("robustness range [{}, {}] exceeds big_M = {}", t.lo, t.hi, opt_.big_M);
    if (opt_.strict)
        throw InvalidInput(msg);
    warnings_.push_back(msg);
    warned_range_ = true;
}

Term RobustnessEncoder::min_of(std::vector<Term> args) {
    if (args.empty())
        throw InvalidInput("min over an empty set");
    double cmin = kInf;
    std::vector<Term> vars;
    for (auto& a : args) {
        if (a.is_constant()) {
            cmin = std::min(cmin, a.expr.constant());
            continue;
        }
        bool dup = std::any_of(vars.begin(), vars.end(), [&](const Term& v) { return v.expr == a.expr; });
        if (!dup)
            vars.push_back(std::move(a));
    }
    if (cmin < kInf)
        vars.push_back(Term::constant(cmin));
    if (opt_.prune && vars.size() > 1) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < vars.size(); ++k)
            if (vars[k].hi < vars[best].hi)
                best = k;
        double h = vars[best].hi;
        std::vector<Term> kept;
        for (std::size_t k = 0; k < vars.size(); ++k)
            if (k == best || vars[k].lo < h)
                kept.push_back(std::move(vars[k]));
        vars = std::move(kept);
    }
    if (vars.size() == 1)
        return vars.front();

    double lo = kInf, hi = kInf;
    for (const auto& a : vars) {
        lo = std::min(lo, a.lo);
        hi = std::min(hi, a.hi);
    }
    int id = counter_++;
    VarId y = p_.add_continuous(name("min" + std::to_string(id)), lo, hi);
    LinearExpr sum;
    for (std::size_t k = 0; k < vars.size(); ++k) {
        const auto& a = vars[k];
        if (!a.is_constant())
            p_.add_constraint(LinearExpr::var(y) - a.expr, Relation::Le, 0.0);
        double m = a.hi - lo;
        if (!std::isfinite(m)) {
            m = opt_.big_M;
            std::string msg = "unbounded min/max argument; using big_M";
            if (opt_.strict)
                throw InvalidInput(msg);
            warnings_.push_back(msg);
        }
        VarId z = p_.add_binary(name(fmt::format("z{}_{}", id, k)));
        sum.add(z, 1.0);
        // y >= a - m (1 - z)
        p_.add_constraint(LinearExpr::var(y) - a.expr - LinearExpr::var(z, m), Relation::Ge, -m);
    }
    p_.add_constraint(sum, Relation::Eq, 1.0);
    return Term::variable(y, lo, hi);
}

Term RobustnessEncoder::max_of(std::vector<Term> args) {
    for (auto& a : args)
        a = -a;
    return -min_of(std::move(args));
}

Term RobustnessEncoder::predicate(const Node& n, Index t, Polarity pol) {
    LinearExpr e(n.expr.constant());
    double lo = n.expr.constant(), hi = n.expr.constant();
    for (const auto& [v, c] : n.expr.coefficients()) {
        Term s = signal_(v, t);
        e += s.expr * c;
        lo += std::min(c * s.lo, c * s.hi);
        hi += std::max(c * s.lo, c * s.hi);
    }
    if (n.pred_slack) {
        auto it = theta_.find({&n, static_cast<int>(weak::ParamKind::PredicateSlack)});
        if (it != theta_.end()) {
            double k = n.pred_slack->scale * (pol == Polarity::Weaken ? 1.0 : -1.0);
            e.add(it->second, k);
            double span = k * n.pred_slack->bound;
            lo += std::min(0.0, span);
            hi += std::max(0.0, span);
        }
    }
    if (e.is_constant())
        return Term::constant(e.constant());
    VarId r = p_.add_continuous(name("pred" + std::to_string(counter_++)), lo, hi);
    p_.add_constraint(LinearExpr::var(r) - e, Relation::Eq, 0.0);
    return Term::variable(r, lo, hi);
}

Term RobustnessEncoder::window(const Node& n, stl::Interval w, Index t, Polarity pol) {
    std::vector<Term> args;
    for (Index k = t + w.lo; k <= t + w.hi; ++k)
        args.push_back(node(*n.lhs, k, pol));
    return n.op == Op::Always ? min_of(std::move(args)) : max_of(std::move(args));
}

const RobustnessEncoder::Selector& RobustnessEncoder::selector(const Node& n, Polarity pol) {
    auto found = selectors_.find(&n);
    if (found != selectors_.end())
        return found->second;
    Selector sel;
    VarId tx = theta_.at({&n, static_cast<int>(weak::ParamKind::WindowLeft)});
    VarId ty = theta_.at({&n, static_cast<int>(weak::ParamKind::WindowRight)});
    std::vector<std::pair<int, int>> picks;
    for (int i = 0; i <= n.window_slack->left; ++i)
        for (int j = 0; j <= n.window_slack->right; ++j) {
            try {
                sel.windows.push_back(weak::adjusted_window(n, i, j, pol));
                picks.emplace_back(i, j);
            } catch (const InvalidInput&) {
                // Empty window: this (x, y) pair is not admissible.
            }
        }
    if (picks.size() == 1) {
        p_.set_bounds(tx, picks[0].first, picks[0].first);
        p_.set_bounds(ty, picks[0].second, picks[0].second);
    } else {
        LinearExpr sum, ex = LinearExpr::var(tx, -1.0), ey = LinearExpr::var(ty, -1.0);
        int id = counter_++;
        for (std::size_t k = 0; k < picks.size(); ++k) {
            VarId s = p_.add_binary(name(fmt::format("win{}_{}_{}", id, picks[k].first, picks[k].second)));
            sel.choice.push_back(s);
            sum.add(s, 1.0);
            ex.add(s, picks[k].first);
            ey.add(s, picks[k].second);
        }
        p_.add_constraint(sum, Relation::Eq, 1.0);
        p_.add_constraint(ex, Relation::Eq, 0.0);
        p_.add_constraint(ey, Relation::Eq, 0.0);
    }
    return selectors_.emplace(&n, std::move(sel)).first->second;
}

Term RobustnessEncoder::node(const Node& n, Index t, Polarity pol) {
    auto key = std::make_tuple(&n, t, static_cast<int>(pol));
    if (auto it = memo_.find(key); it != memo_.end())
        return it->second;
    Term r;
    switch (n.op) {
    case Op::True:
        r = Term::constant(opt_.big_M);
        break;
    case Op::Pred:
        if (t >= length_)
            throw HorizonError("predicate evaluated beyond the encoded steps");
        r = predicate(n, t, pol);
        break;
    case Op::Not:
        r = -node(*n.lhs, t, weak::flip(pol));
        break;
    case Op::And:
        r = min_of({node(*n.lhs, t, pol), node(*n.rhs, t, pol)});
        break;
    case Op::Or:
        r = max_of({node(*n.lhs, t, pol), node(*n.rhs, t, pol)});
        break;
    case Op::Always:
    case Op::Eventually: {
        bool weakened = n.window_slack && theta_.count({&n, static_cast<int>(weak::ParamKind::WindowLeft)}) &&
                        (n.window_slack->left > 0 || n.window_slack->right > 0);
        if (!weakened) {
            r = window(n, n.interval, t, pol);
            break;
        }
        const Selector& sel = selector(n, pol);
        if (sel.choice.empty()) {
            r = window(n, sel.windows.front(), t, pol);
            break;
        }
        std::vector<Term> opts;
        double lo = kInf, hi = -kInf;
        for (const auto& w : sel.windows) {
            opts.push_back(window(n, w, t, pol));
            lo = std::min(lo, opts.back().lo);
            hi = std::max(hi, opts.back().hi);
        }
        VarId y = p_.add_continuous(name("sel" + std::to_string(counter_++)), lo, hi);
        for (std::size_t k = 0; k < opts.size(); ++k) {
            // y = opts[k] whenever choice k is selected.
            LinearExpr d = LinearExpr::var(y) - opts[k].expr;
            double up = hi - opts[k].lo, down = lo - opts[k].hi;
            VarId s = sel.choice[k];
            p_.add_constraint(d + LinearExpr::var(s, up), Relation::Le, up);
            p_.add_constraint(d + LinearExpr::var(s, down), Relation::Ge, down);
        }
        r = Term::variable(y, lo, hi);
        break;
    }
    case Op::Until: {
        std::vector<Term> opts;
        Term prefix;
        bool have_prefix = false;
        for (Index k = t; k <= t + n.interval.hi; ++k) {
            if (k >= t + n.interval.lo) {
                Term psi = node(*n.rhs, k, pol);
                opts.push_back(have_prefix ? min_of({psi, prefix}) : psi);
            }
            if (k < t + n.interval.hi) {
                Term phi = node(*n.lhs, k, pol);
                prefix = have_prefix ? min_of({prefix, phi}) : phi;
                have_prefix = true;
            }
        }
        r = max_of(std::move(opts));
        break;
    }
    }
    check_range(r);
    memo_.emplace(key, r);
    return r;
}

SignalTerms signal_variables(MilpProblem& p, const stl::Signal& fixed, double lo, double hi,
                             std::vector<std::vector<VarId>>* ids) {
    auto table = std::make_shared<std::vector<std::vector<VarId>>>();
    for (Index k = 0; k < fixed.length(); ++k) {
        std::vector<VarId> row;
        for (Index j = 0; j < fixed.dimension(); ++j) {
            VarId v = p.add_continuous(p.fresh_name(fixed.variables()[static_cast<std::size_t>(j)] + "_" +
                                                    std::to_string(k)),
                                       lo, hi);
            p.add_constraint(LinearExpr::var(v), Relation::Eq, fixed(k, j));
            row.push_back(v);
        }
        table->push_back(std::move(row));
    }
    if (ids)
        *ids = *table;
    auto vars = fixed.variables();
    return [table, vars, lo, hi](const std::string& name, Index step) {
        auto it = std::find(vars.begin(), vars.end(), name);
        if (it == vars.end())
            throw InvalidInput("unknown signal variable '" + name + "'");
        if (step < 0 || step >= static_cast<Index>(table->size()))
            throw HorizonError("signal step out of range");
        return Term::variable((*table)[static_cast<std::size_t>(step)][static_cast<std::size_t>(it - vars.begin())],
                              lo, hi);
    };
}

Term encode_robustness(MilpProblem& p, const stl::StlFormula& f, const SignalTerms& signal, Index length,
                       Index t, const EncodingOptions& opt) {
    RobustnessEncoder enc(p, signal, length, opt, "rho");
    return enc.encode(f, t);
}

WeakTerm encode_weak_robustness(MilpProblem& p, const weak::WeakStlFormula& f, const SignalTerms& signal,
                                Index length, Index t, const EncodingOptions& opt) {
    RobustnessEncoder enc(p, signal, length, opt, "rho");
    WeakTerm out;
    out.rho = enc.encode_weak(f, t, &out.theta);
    return out;
}

ResolutionEncoding encode_resolution(const weak::WeakStlFormula& phi, const weak::WeakStlFormula& psi,
                                     const env::TransitionSystem& model, const stl::Signal& past, int N,
                                     const EncodingOptions& opt) {
    int ns = model.num_states();
    std::vector<Index> column(static_cast<std::size_t>(ns));
    for (int i = 0; i < ns; ++i) {
        const auto& s = model.states()[static_cast<std::size_t>(i)];
        auto c = past.index_of(s.name);
        if (!c)
            throw InvalidInput("past signal lacks state variable '" + s.name + "'");
        column[static_cast<std::size_t>(i)] = *c;
    }
    for (const auto& v : past.variables())
        if (!model.state_index(v) && !model.derived_index(v))
            throw InvalidInput("past signal variable '" + v + "' is not part of the model");
    if (N < 1)
        throw InvalidInput("prediction horizon must be at least 1");

    ResolutionEncoding out;
    out.t = past.last_step();
    out.horizon = N;
    int need = std::max(weak::max_horizon(phi), weak::max_horizon(psi));
    if (need > N)
        throw HorizonError(fmt::format("requirements look {} steps ahead but the horizon is {}", need, N));

    MilpProblem& p = out.problem;
    Eigen::VectorXd q(ns);
    for (int i = 0; i < ns; ++i) {
        q(i) = past(out.t, column[static_cast<std::size_t>(i)]);
        const auto& s = model.states()[static_cast<std::size_t>(i)];
        if (q(i) < s.lo - 1e-9 || q(i) > s.hi + 1e-9)
            throw InvalidInput("current value of '" + s.name + "' lies outside its bounds");
        q(i) = std::clamp(q(i), s.lo, s.hi);
    }
    Eigen::MatrixXd lo, hi;
    env::reachable_boxes(model, q, N, lo, hi);

    // Past samples before the evaluation step are fixed variables.
    std::vector<std::vector<VarId>> history;
    for (Index k = 0; k < out.t; ++k) {
        std::vector<VarId> row;
        for (int i = 0; i < ns; ++i) {
            const auto& s = model.states()[static_cast<std::size_t>(i)];
            double v = past(k, column[static_cast<std::size_t>(i)]);
            VarId id = p.add_continuous(p.fresh_name(s.name + "_" + std::to_string(k)), v, v);
            p.add_constraint(LinearExpr::var(id), Relation::Eq, v, p.fresh_name("past_" + s.name + "_" + std::to_string(k)));
            row.push_back(id);
        }
        history.push_back(std::move(row));
    }
    env::LowerOptions lopt;
    lopt.big_M = opt.big_M;
    lopt.state_lo = &lo;
    lopt.state_hi = &hi;
    out.model = env::lower_to_constraints(model, static_cast<int>(out.t), N, p, lopt);
    for (int i = 0; i < ns; ++i)
        p.add_constraint(LinearExpr::var(out.model.states[0][static_cast<std::size_t>(i)]), Relation::Eq, q(i),
                         p.fresh_name("past_" + model.states()[static_cast<std::size_t>(i)].name + "_" +
                                      std::to_string(out.t)));

    // Signal handles; derived variables become min/max gadgets on demand.
    RobustnessEncoder derived_enc(p, {}, 0, opt, "d");
    std::map<std::pair<int, Index>, Term> derived_memo;
    Index t0 = out.t;
    auto state_term = [&](int i, Index step) -> Term {
        if (step < t0) {
            VarId id = history[static_cast<std::size_t>(step)][static_cast<std::size_t>(i)];
            return Term::variable(id, p.variable(id).lo, p.variable(id).hi);
        }
        Index k = step - t0;
        if (k > N)
            throw HorizonError("signal step beyond the prediction horizon");
        return Term::variable(out.model.states[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)], lo(k, i),
                              hi(k, i));
    };
    SignalTerms signal = [&](const std::string& name, Index step) -> Term {
        if (auto i = model.state_index(name))
            return state_term(*i, step);
        auto d = model.derived_index(name);
        if (!d)
            throw InvalidInput("requirement references '" + name + "', which the model does not define");
        auto key = std::make_pair(*d, step);
        if (auto it = derived_memo.find(key); it != derived_memo.end())
            return it->second;
        const auto& dv = model.derived()[static_cast<std::size_t>(*d)];
        std::vector<Term> args;
        for (const auto& e : dv.terms) {
            Term t = Term::constant(e.constant());
            for (const auto& [v, c] : e.coefficients()) {
                Term s = state_term(*model.state_index(v), step);
                t.expr += s.expr * c;
                t.lo += std::min(c * s.lo, c * s.hi);
                t.hi += std::max(c * s.lo, c * s.hi);
            }
            args.push_back(std::move(t));
        }
        Term r = dv.kind == env::DerivedKind::Max ? derived_enc.max_of(std::move(args))
                                                  : derived_enc.min_of(std::move(args));
        derived_memo.emplace(key, r);
        return r;
    };

    Index length = out.t + N + 1;
    auto phi0 = weak::WeakStlFormula(weak::strip(phi));
    auto psi0 = weak::WeakStlFormula(weak::strip(psi));
    RobustnessEncoder e_phi(p, signal, length, opt, "phi");
    RobustnessEncoder e_phi0(p, signal, length, opt, "phi0");
    RobustnessEncoder e_psi(p, signal, length, opt, "psi");
    RobustnessEncoder e_psi0(p, signal, length, opt, "psi0");
    out.rho_phi = e_phi.encode_weak(phi, out.t, &out.theta_phi);
    out.rho_phi0 = e_phi0.encode_weak(phi0, out.t);
    out.rho_psi = e_psi.encode_weak(psi, out.t, &out.theta_psi);
    out.rho_psi0 = e_psi0.encode_weak(psi0, out.t);
    out.bounds_phi = weak::theta_bounds(phi);
    out.bounds_psi = weak::theta_bounds(psi);

    p.add_constraint(out.rho_phi.expr, Relation::Ge, opt.epsilon_sat, "sat_phi");
    p.add_constraint(out.rho_psi.expr, Relation::Ge, opt.epsilon_sat, "sat_psi");
    out.delta = (out.rho_phi.expr - out.rho_phi0.expr) + (out.rho_psi.expr - out.rho_psi0.expr);
    if (opt.objective == ObjectiveForm::Delta) {
        p.set_objective(Sense::Minimize, out.delta);
    } else {
        LinearExpr sum;
        for (VarId v : out.theta_phi)
            sum.add(v, 1.0);
        for (VarId v : out.theta_psi)
            sum.add(v, 1.0);
        p.set_objective(Sense::Minimize, sum);
    }
    for (const auto* enc : {&derived_enc, &e_phi, &e_phi0, &e_psi, &e_psi0})
        for (const auto& w : enc->warnings())
            out.warnings.push_back(w);
    return out;
}

} // namespace weakres::milp
