#pragma once

#include <functional>
#include <string>
#include <vector>

#include "weakres/milp/problem.hpp"

namespace weakres::milp {

enum class Status { Sat, Unsat, Unbounded };

std::string to_string(Status s);

struct SolveLimits {
    double time_seconds = 60.0;
    long max_nodes = 1000000;
    double integrality_tol = 1e-6;
    /// Nodes whose bound is within this of the incumbent are pruned.
    double gap_abs = 1e-7;
    /// Receives one diagnostic line per new incumbent.
    std::function<void(const std::string&)> log;
};

struct SolveStats {
    long nodes = 0;
    long simplex_iterations = 0;
    double seconds = 0.0;
    /// A limit stopped the search; the assignment is the best found, not
    /// necessarily optimal.
    bool limit_hit = false;
};

struct MilpSolution {
    Status status = Status::Unsat;
    std::vector<double> values; // present iff Sat
    double objective = 0.0;     // iff Sat
    SolveStats stats;

    double value(VarId id) const { return values.at(static_cast<std::size_t>(id)); }
    double value(const LinearExpr& e) const { return e.evaluate(values); }
};

/// Branch-and-bound over the dense simplex relaxation: best-first on the LP
/// bound, branching on the most fractional variable, ties broken by index
/// and node creation order. Throws NumericError on solver breakdown and
/// LimitError when a limit hits before any feasible point is known.
MilpSolution solve(const MilpProblem& p, const SolveLimits& limits = {});

} // namespace weakres::milp
