#pragma once

#include <string>
#include <string_view>

#include "weakres/milp/problem.hpp"

namespace weakres::milp {

/// LP file text: objective, Subject To, explicit Bounds for every variable,
/// Generals, Binaries, End.
std::string export_lp(const MilpProblem& p);

/// Reads the subset of the LP format written by export_lp (plus the usual
/// defaults: unlisted variables are continuous in [0, inf)). Variables are
/// numbered in Bounds-section order, then by first appearance.
MilpProblem parse_lp(std::string_view text);

} // namespace weakres::milp
