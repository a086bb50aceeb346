#pragma once

#include <string_view>

#include "weakres/stl/formula.hpp"
#include "weakres/stl/signal.hpp"

namespace weakres::stl {

struct MonitorOptions {
    /// Robustness of the literal `true`; kept finite so that it matches the
    /// big-M constant of the MILP encoding.
    double true_value = 1000.0;
};

/// Quantitative robustness of f at step t. Throws HorizonError when
/// t + horizon(f) exceeds the last step, InvalidInput for unknown variables.
double robustness(const StlFormula& f, const Signal& s, Index t, const MonitorOptions& opt = {});

/// Same recursion on a raw tree; annotations are ignored.
double robustness(const Node& n, const Signal& s, Index t, const MonitorOptions& opt = {});

/// rho >= 0.
bool satisfied(const StlFormula& f, const Signal& s, Index t, const MonitorOptions& opt = {});

/// Robustness at every step t for which the horizon fits.
Eigen::VectorXd robustness_trace(const StlFormula& f, const Signal& s, const MonitorOptions& opt = {});

StlFormula parse_stl(std::string_view text);

} // namespace weakres::stl
