#include "weakres/milp/solver.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

#include <fmt/format.h>

#include "weakres/error.hpp"
#include "weakres/milp/simplex.hpp"

namespace weakres::milp {

std::string to_string(Status s) {
    switch (s) {
    case Status::Sat: return "SAT";
    case Status::Unsat: return "UNSAT";
    case Status::Unbounded: return "UNBOUNDED";
    }
    return "?";
}

namespace {

using Vec = Eigen::VectorXd;
constexpr double kFeas = 1e-9;

struct Presolved {
    bool infeasible = false;
    Vec lo, hi;
    std::vector<int> kept_rows;
};

// Rounds integer bounds, turns singleton rows into bounds, checks empty rows.
Presolved presolve(const MilpProblem& p) {
    Presolved out;
    int n = p.num_variables();
    out.lo.resize(n);
    out.hi.resize(n);
    for (int j = 0; j < n; ++j) {
        out.lo(j) = p.variable(j).lo;
        out.hi(j) = p.variable(j).hi;
    }
    for (int r = 0; r < p.num_constraints(); ++r) {
        const auto& c = p.constraints()[static_cast<std::size_t>(r)];
        if (c.coeffs.empty()) {
            bool ok = c.rel == Relation::Le   ? 0.0 <= c.rhs + kFeas
                      : c.rel == Relation::Ge ? 0.0 >= c.rhs - kFeas
                                              : std::abs(c.rhs) <= kFeas;
            if (!ok)
                out.infeasible = true;
            continue;
        }
        if (c.coeffs.size() > 1) {
            out.kept_rows.push_back(r);
            continue;
        }
        auto [j, a] = c.coeffs.front();
        double v = c.rhs / a;
        bool upper = (c.rel == Relation::Le) == (a > 0);
        if (c.rel == Relation::Eq) {
            out.lo(j) = std::max(out.lo(j), v);
            out.hi(j) = std::min(out.hi(j), v);
        } else if (upper) {
            out.hi(j) = std::min(out.hi(j), v);
        } else {
            out.lo(j) = std::max(out.lo(j), v);
        }
    }
    for (int j = 0; j < n; ++j) {
        if (p.variable(j).kind != VarKind::Continuous) {
            out.lo(j) = std::ceil(out.lo(j) - 1e-9);
            out.hi(j) = std::floor(out.hi(j) + 1e-9);
        }
        if (out.lo(j) > out.hi(j)) {
            if (out.lo(j) <= out.hi(j) + kFeas)
                out.hi(j) = out.lo(j);
            else
                out.infeasible = true;
        }
    }
    return out;
}

struct Node {
    double bound;
    long id;
    int depth;
    Vec lo, hi;
    LpBasis basis;
};

struct NodeOrder {
    bool operator()(const std::shared_ptr<Node>& a, const std::shared_ptr<Node>& b) const {
        if (a->bound != b->bound)
            return a->bound > b->bound;
        if (a->depth != b->depth)
            return a->depth < b->depth;
        return a->id > b->id;
    }
};

} // namespace

MilpSolution solve(const MilpProblem& p, const SolveLimits& limits) {
    auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };
    MilpSolution sol;
    int n = p.num_variables();
    Presolved pre = presolve(p);
    if (pre.infeasible) {
        sol.stats.seconds = elapsed();
        return sol;
    }

    double sign = p.sense() == Sense::Maximize ? -1.0 : 1.0;
    LpModel<double> model;
    model.rows = static_cast<int>(pre.kept_rows.size());
    model.cols = n;
    model.columns.resize(static_cast<std::size_t>(n));
    model.row_lo.resize(model.rows);
    model.row_hi.resize(model.rows);
    model.cost = Vec::Zero(n);
    for (int k = 0; k < model.rows; ++k) {
        const auto& c = p.constraints()[static_cast<std::size_t>(pre.kept_rows[static_cast<std::size_t>(k)])];
        for (const auto& [j, a] : c.coeffs)
            model.columns[static_cast<std::size_t>(j)].push_back({k, a});
        model.row_lo(k) = c.rel == Relation::Le ? -kInf : c.rhs;
        model.row_hi(k) = c.rel == Relation::Ge ? kInf : c.rhs;
    }
    for (const auto& [j, c] : p.objective().terms())
        model.cost(j) = sign * c;

    std::vector<int> integers;
    for (int j = 0; j < n; ++j)
        if (p.variable(j).kind != VarKind::Continuous)
            integers.push_back(j);

    DenseSimplex<double> lp(model);
    std::priority_queue<std::shared_ptr<Node>, std::vector<std::shared_ptr<Node>>, NodeOrder> open;
    long next_id = 0;
    auto push = [&](double bound, int depth, Vec lo, Vec hi, LpBasis basis) {
        open.push(std::make_shared<Node>(
            Node{bound, next_id++, depth, std::move(lo), std::move(hi), std::move(basis)}));
    };
    push(-kInf, 0, pre.lo, pre.hi, {});

    bool have_incumbent = false;
    double incumbent = kInf;
    Vec best;

    // Best-first, except that the child on the rounding side of a branch is
    // solved right away and reuses the parent's factorisation.
    std::shared_ptr<Node> dive;
    while (dive || !open.empty()) {
        if (sol.stats.nodes >= limits.max_nodes || elapsed() > limits.time_seconds) {
            sol.stats.limit_hit = true;
            break;
        }
        std::shared_ptr<Node> node;
        if (dive) {
            node = std::move(dive);
        } else {
            node = open.top();
            open.pop();
        }
        if (have_incumbent && node->bound >= incumbent - limits.gap_abs)
            continue;
        ++sol.stats.nodes;
        auto res = lp.solve(node->lo, node->hi, node->basis.empty() ? nullptr : &node->basis);
        sol.stats.simplex_iterations += res.iterations;
        if (res.status == LpStatus::Infeasible)
            continue;
        if (res.status == LpStatus::Unbounded) {
            if (node->depth == 0) {
                sol.status = Status::Unbounded;
                sol.stats.seconds = elapsed();
                return sol;
            }
            continue;
        }
        if (res.status != LpStatus::Optimal)
            throw NumericError(res.status == LpStatus::Singular ? "singular basis in LP relaxation"
                                                                : "simplex iteration limit reached");
        if (have_incumbent && res.objective >= incumbent - limits.gap_abs)
            continue;

        int branch = -1;
        double most = 0.0;
        for (int j : integers) {
            double v = res.x(j);
            double frac = std::abs(v - std::round(v));
            if (frac > limits.integrality_tol && frac > most + 1e-12) {
                most = frac;
                branch = j;
            }
        }
        if (branch < 0) {
            // Fix the integers exactly: a point that is only integral within
            // tolerance can hide a violation of order tol * M.
            Vec flo = node->lo, fhi = node->hi;
            for (int j : integers)
                flo(j) = fhi(j) = std::round(res.x(j));
            auto fixed = lp.solve(flo, fhi, &res.basis);
            sol.stats.simplex_iterations += fixed.iterations;
            if (fixed.status != LpStatus::Optimal) {
                double worst = 1e-12;
                for (int j : integers) {
                    double frac = std::abs(res.x(j) - std::round(res.x(j)));
                    if (frac > worst) {
                        worst = frac;
                        branch = j;
                    }
                }
                if (branch < 0)
                    continue;
            } else {
                if (have_incumbent && fixed.objective >= incumbent - limits.gap_abs)
                    continue;
                have_incumbent = true;
                incumbent = fixed.objective;
                best = fixed.x.head(n);
                if (limits.log)
                    limits.log(fmt::format("incumbent {} at node {} ({:.3f}s)",
                                           sign * incumbent + p.objective().constant(),
                                           sol.stats.nodes, elapsed()));
                continue;
            }
        }
        double v = res.x(branch);
        Vec down_hi = node->hi;
        down_hi(branch) = std::floor(v);
        Vec up_lo = node->lo;
        up_lo(branch) = std::ceil(v);
        auto down = std::make_shared<Node>(Node{res.objective, next_id++, node->depth + 1, node->lo, std::move(down_hi), res.basis});
        auto up = std::make_shared<Node>(Node{res.objective, next_id++, node->depth + 1, std::move(up_lo), node->hi, std::move(res.basis)});
        bool go_down = v - std::floor(v) < 0.5;
        open.push(go_down ? up : down);
        dive = go_down ? down : up;
    }

    sol.stats.seconds = elapsed();
    if (!have_incumbent) {
        if (sol.stats.limit_hit)
            throw LimitError(fmt::format("search limit reached after {} nodes without a feasible point",
                                         sol.stats.nodes));
        return sol;
    }

    for (int j : integers)
        best(j) = std::round(best(j));

    sol.status = Status::Sat;
    sol.values.assign(best.data(), best.data() + n);
    sol.objective = p.objective().evaluate(sol.values);
    double viol = max_violation(p, sol.values);
    if (viol > 1e-6)
        throw NumericError(fmt::format("solution violates constraints by {:.3g}", viol));
    sol.stats.seconds = elapsed();
    return sol;
}

} // namespace weakres::milp
