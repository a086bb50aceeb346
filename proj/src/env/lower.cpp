#include "weakres/env/lower.hpp"

#include <algorithm>

#include "weakres/error.hpp"

namespace weakres::env {

using milp::LinearExpr;
using milp::Relation;

namespace {

// Interval of a linear expression over variable bounds.
std::pair<double, double> range_of(const LinearExpr& e, const milp::MilpProblem& p) {
    double lo = e.constant(), hi = e.constant();
    for (const auto& [id, c] : e.terms()) {
        const auto& v = p.variable(id);
        double a = c * v.lo, b = c * v.hi;
        lo += std::min(a, b);
        hi += std::max(a, b);
    }
    return {lo, hi};
}

} // namespace

LoweredModel lower_to_constraints(const TransitionSystem& t, int t0, int N, milp::MilpProblem& p,
                                  const LowerOptions& opt) {
    if (N < 0 || t0 < 0)
        throw InvalidInput("negative step or horizon");
    LoweredModel out;
    out.t0 = t0;
    out.horizon = N;
    int ns = t.num_states(), na = t.num_actions();
    for (int k = 0; k <= N; ++k) {
        std::vector<milp::VarId> row;
        for (int i = 0; i < ns; ++i) {
            const auto& s = t.states()[static_cast<std::size_t>(i)];
            double lo = opt.state_lo ? (*opt.state_lo)(k, i) : s.lo;
            double hi = opt.state_hi ? (*opt.state_hi)(k, i) : s.hi;
            row.push_back(p.add_continuous(p.fresh_name(s.name + "_" + std::to_string(t0 + k)), lo, hi));
        }
        out.states.push_back(std::move(row));
    }
    for (int k = 0; k < N; ++k) {
        std::vector<milp::VarId> row;
        for (const auto& a : t.actions()) {
            std::string n = p.fresh_name(a.name + "_" + std::to_string(t0 + k));
            row.push_back(a.kind == ActionKind::Binary ? p.add_variable(n, milp::VarKind::Binary, a.lo, a.hi)
                                                       : p.add_continuous(n, a.lo, a.hi));
        }
        out.actions.push_back(std::move(row));
    }

    auto expr = [&](const AffineExpr& e, int k) {
        LinearExpr le(e.constant());
        for (const auto& [v, c] : e.coefficients()) {
            if (auto i = t.state_index(v))
                le.add(out.states[static_cast<std::size_t>(k)][static_cast<std::size_t>(*i)], c);
            else
                le.add(out.actions[static_cast<std::size_t>(k)][static_cast<std::size_t>(*t.action_index(v))], c);
        }
        return le;
    };

    for (int k = 0; k < N; ++k)
        for (int i = 0; i < ns; ++i) {
            const auto& rule = t.rule(i);
            const auto& name = t.states()[static_cast<std::size_t>(i)].name;
            std::string tag = name + "_" + std::to_string(t0 + k);
            LinearExpr next = LinearExpr::var(out.states[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(i)]);
            if (!rule.switched()) {
                p.add_constraint(next - expr(rule.then_expr, k), Relation::Eq, 0.0,
                                 p.fresh_name("dyn_" + tag));
                continue;
            }
            milp::VarId g = out.actions[static_cast<std::size_t>(k)][static_cast<std::size_t>(*t.action_index(*rule.guard))];
            LinearExpr guard = LinearExpr::var(g);
            auto conditional = [&](const LinearExpr& diff, bool when_on, const std::string& suffix) {
                // when_on: diff = 0 if g = 1, else diff = 0 if g = 0.
                auto [lo, hi] = range_of(diff, p);
                double up = std::isfinite(hi) ? std::max(hi, 0.0) : opt.big_M;
                double down = std::isfinite(lo) ? std::max(-lo, 0.0) : opt.big_M;
                LinearExpr off = when_on ? LinearExpr(1.0) - guard : guard;
                p.add_constraint(diff - off * up, Relation::Le, 0.0, p.fresh_name("dyn_" + tag + suffix + "_u"));
                p.add_constraint(diff + off * down, Relation::Ge, 0.0, p.fresh_name("dyn_" + tag + suffix + "_l"));
            };
            conditional(next - expr(rule.then_expr, k), true, "_then");
            conditional(next - expr(rule.else_expr, k), false, "_else");
        }
    (void)na;
    return out;
}

} // namespace weakres::env
