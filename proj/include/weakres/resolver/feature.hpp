#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "weakres/env/model.hpp"
#include "weakres/stl/formula.hpp"
#include "weakres/stl/signal.hpp"
#include "weakres/weak/weakstl.hpp"

namespace weakres::resolver {

/// Action proposed by one feature in one control step. Actions in a shared
/// space carry a real payload; tag-only actions compare by tag.
struct FeatureAction {
    std::string feature_id;
    std::string action_space;
    Eigen::VectorXd payload;
    std::string tag;
    bool active = true;
};

struct FeatureSpec {
    std::string id;
    /// Annotation bounds give the minimal requirement.
    weak::WeakStlFormula requirement;
    /// Horizon-0 formula over the current state.
    stl::StlFormula activation;
    std::string action_space;
};

/// Key/value text, one `key = value` per line, `#` comments:
/// id, requirement, activation, action_space. See docs/grammar.md.
FeatureSpec parse_feature(std::string_view text);
FeatureSpec parse_feature_file(const std::string& path);
std::string print_feature(const FeatureSpec& f);

/// Activation at the last sample of s.
bool is_active(const FeatureSpec& f, const stl::Signal& s);

/// Throws InvalidInput when the requirement or activation mentions a
/// variable the model does not provide.
void check_against(const FeatureSpec& f, const env::TransitionSystem& model);

} // namespace weakres::resolver
