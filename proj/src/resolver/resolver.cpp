#include "weakres/resolver/resolver.hpp"

#include <chrono>
#include <cmath>
#include <map>

#include "weakres/error.hpp"

namespace weakres::resolver {

using milp::LinearExpr;
using milp::Status;

Detection detect(const std::vector<FeatureAction>& actions, double tol) {
    Detection d;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const auto& a = actions[i];
        if (!a.active)
            continue;
        for (std::size_t j = i + 1; j < actions.size(); ++j) {
            const auto& b = actions[j];
            if (!b.active || a.action_space != b.action_space)
                continue;
            if (a.payload.size() != b.payload.size())
                throw InvalidInput("payload dimension mismatch in action space '" + a.action_space + "'");
            bool differ = a.tag != b.tag || (a.payload.size() > 0 && (a.payload - b.payload).norm() > tol);
            if (differ)
                d.conflicts.emplace_back(a.feature_id, b.feature_id);
        }
    }
    return d;
}

std::string to_string(ResolutionKind k) {
    switch (k) {
    case ResolutionKind::NoConflict: return "no_conflict";
    case ResolutionKind::Weakened: return "weakened";
    case ResolutionKind::Fallback: return "fallback";
    }
    return "?";
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void add_stats(milp::SolveStats& into, const milp::SolveStats& s) {
    into.nodes += s.nodes;
    into.simplex_iterations += s.simplex_iterations;
    into.seconds += s.seconds;
    into.limit_hit = into.limit_hit || s.limit_hit;
}

// Weights making sum w_k theta_k order thetas lexicographically.
std::vector<double> lex_weights(const std::vector<int>& bounds) {
    std::vector<double> w(bounds.size(), 1.0);
    double acc = 1.0;
    for (std::size_t k = bounds.size(); k-- > 0;) {
        w[k] = acc;
        acc *= bounds[k] + 1.0;
    }
    if (acc > 1e6)
        std::fill(w.begin(), w.end(), 1.0);
    return w;
}

} // namespace

Resolution resolve(const FeatureSpec& f1, const FeatureSpec& f2, const env::TransitionSystem& model,
                   const stl::Signal& past, int N, const FeatureAction& fallback, const ResolveOptions& opt) {
    auto start = std::chrono::steady_clock::now();
    check_against(f1, model);
    check_against(f2, model);
    if (fallback.feature_id != f1.id && fallback.feature_id != f2.id)
        throw InvalidInput("fallback feature '" + fallback.feature_id + "' is not part of the conflict");

    auto enc = milp::encode_resolution(f1.requirement, f2.requirement, model, past, N, opt.encoding);
    Resolution r;
    r.warnings = enc.warnings;
    auto sol = milp::solve(enc.problem, opt.limits);
    r.stats = sol.stats;
    if (sol.status == Status::Unbounded)
        throw NumericError("resolution problem reported unbounded");
    if (sol.status == Status::Unsat) {
        r.kind = ResolutionKind::Fallback;
        r.fallback_feature = fallback.feature_id;
        r.fallback_action = fallback;
        r.seconds = seconds_since(start);
        return r;
    }

    std::vector<milp::VarId> theta = enc.theta_phi;
    theta.insert(theta.end(), enc.theta_psi.begin(), enc.theta_psi.end());
    std::vector<int> bounds = enc.bounds_phi;
    bounds.insert(bounds.end(), enc.bounds_psi.begin(), enc.bounds_psi.end());
    bool nonzero = false;
    for (auto v : theta)
        nonzero = nonzero || std::lround(sol.value(v)) != 0;

    if (opt.tie_break && nonzero) {
        milp::MilpProblem second = enc.problem;
        double slack = 1e-7 * std::max(1.0, std::abs(sol.objective));
        second.add_constraint(enc.problem.objective(), milp::Relation::Le, sol.objective + slack, "optimal_delta");
        auto w = lex_weights(bounds);
        LinearExpr lex;
        for (std::size_t k = 0; k < theta.size(); ++k)
            lex.add(theta[k], w[k]);
        second.set_objective(milp::Sense::Minimize, lex);
        auto limits = opt.limits;
        limits.time_seconds = std::max(0.1, opt.limits.time_seconds - seconds_since(start));
        try {
            auto s2 = milp::solve(second, limits);
            add_stats(r.stats, s2.stats);
            if (s2.status == Status::Sat)
                sol = std::move(s2);
        } catch (const LimitError&) {
            r.warnings.push_back("tie-break stage stopped by a limit; keeping the first optimum");
        }
    }

    nonzero = false;
    for (auto v : theta)
        nonzero = nonzero || std::lround(sol.value(v)) != 0;

    if (opt.prefer_margin) {
        // Last stage: keep Delta and theta, then pick the actions that do best
        // on the original requirements.
        milp::MilpProblem third = enc.problem;
        double slack = 1e-7 * std::max(1.0, std::abs(sol.value(enc.delta)));
        third.add_constraint(enc.delta, milp::Relation::Le, sol.value(enc.delta) + slack, "optimal_delta");
        for (auto v : theta) {
            double th = std::round(sol.value(v));
            third.set_bounds(v, th, th);
        }
        LinearExpr margin = enc.rho_phi0.expr;
        margin += enc.rho_psi0.expr;
        third.set_objective(milp::Sense::Maximize, margin);
        auto limits = opt.limits;
        limits.time_seconds = std::max(0.1, opt.limits.time_seconds - seconds_since(start));
        try {
            auto s3 = milp::solve(third, limits);
            add_stats(r.stats, s3.stats);
            if (s3.status == Status::Sat)
                sol = std::move(s3);
        } catch (const LimitError&) {
            r.warnings.push_back("margin stage stopped by a limit; keeping the earlier optimum");
        }
    }

    // theta = 0 means the original requirements are jointly satisfiable.
    r.kind = nonzero ? ResolutionKind::Weakened : ResolutionKind::NoConflict;
    const auto& lm = enc.model;
    r.actions.resize(N, model.num_actions());
    for (int k = 0; k < N; ++k)
        for (int j = 0; j < model.num_actions(); ++j) {
            const auto& a = model.actions()[static_cast<std::size_t>(j)];
            double v = sol.value(lm.actions[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]);
            r.actions(k, j) = a.kind == env::ActionKind::Binary ? std::round(v) : std::clamp(v, a.lo, a.hi);
        }
    r.states.resize(N + 1, model.num_states());
    for (int k = 0; k <= N; ++k)
        for (int i = 0; i < model.num_states(); ++i)
            r.states(k, i) = sol.value(lm.states[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]);
    for (auto v : enc.theta_phi)
        r.theta1.push_back(static_cast<int>(std::lround(sol.value(v))));
    for (auto v : enc.theta_psi)
        r.theta2.push_back(static_cast<int>(std::lround(sol.value(v))));
    r.delta1 = sol.value(enc.rho_phi.expr) - sol.value(enc.rho_phi0.expr);
    r.delta2 = sol.value(enc.rho_psi.expr) - sol.value(enc.rho_psi0.expr);
    r.seconds = seconds_since(start);
    return r;
}

FeatureAction resolve_priority(const std::vector<FeatureAction>& actions, const std::vector<std::string>& ordering) {
    const FeatureAction* best = nullptr;
    std::size_t best_rank = 0;
    for (const auto& a : actions) {
        if (!a.active)
            continue;
        auto it = std::find(ordering.begin(), ordering.end(), a.feature_id);
        if (it == ordering.end())
            throw InvalidInput("ordering does not rank feature '" + a.feature_id + "'");
        auto rank = static_cast<std::size_t>(it - ordering.begin());
        if (!best || rank < best_rank) {
            best = &a;
            best_rank = rank;
        }
    }
    if (!best)
        throw InvalidInput("no active feature action");
    return *best;
}

} // namespace weakres::resolver
