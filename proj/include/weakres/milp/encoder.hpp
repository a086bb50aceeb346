#pragma once

#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "weakres/env/lower.hpp"
#include "weakres/env/model.hpp"
#include "weakres/milp/problem.hpp"
#include "weakres/stl/formula.hpp"
#include "weakres/stl/signal.hpp"
#include "weakres/weak/weakstl.hpp"

namespace weakres::milp {

using stl::Index;

/// Linear handle on a quantity together with a valid range for it.
struct Term {
    LinearExpr expr;
    double lo = 0.0;
    double hi = 0.0;

    static Term constant(double v) { return {LinearExpr(v), v, v}; }
    static Term variable(VarId id, double lo, double hi) { return {LinearExpr::var(id), lo, hi}; }
    bool is_constant() const { return expr.is_constant(); }
    friend Term operator-(const Term& t) { return {-t.expr, -t.hi, -t.lo}; }
};

enum class ObjectiveForm {
    /// Sum of robustness differences rho(f_theta) - rho(f_0).
    Delta,
    /// Sum of theta entries.
    ThetaMagnitude,
};

struct EncodingOptions {
    /// Robustness of `true`, and the fallback constant when no finite bound is known.
    double big_M = 1000.0;
    /// Required margin: rho >= epsilon_sat.
    double epsilon_sat = 0.0;
    /// Throw instead of warning when a robustness bound exceeds big_M.
    bool strict = false;
    /// Drop min/max arguments that can never be selected.
    bool prune = true;
    ObjectiveForm objective = ObjectiveForm::Delta;
};

/// Signal value handle for (variable, step).
using SignalTerms = std::function<Term(const std::string& var, Index step)>;

/// Big-M robustness encoder. Sub-formula terms are memoised per (node, step,
/// polarity), so shared sub-trees are encoded once. Formulas must outlive
/// the encoder.
class RobustnessEncoder {
  public:
    RobustnessEncoder(MilpProblem& p, SignalTerms signal, Index length, EncodingOptions opt = {},
                      std::string prefix = "r");

    /// Robustness of a plain formula at step t.
    Term encode(const stl::StlFormula& f, Index t);

    /// Robustness of f_theta at step t; theta becomes integer decision
    /// variables (one per parameter, shared by all steps) in pre-order.
    Term encode_weak(const weak::WeakStlFormula& f, Index t, std::vector<VarId>* theta = nullptr);

    Term min_of(std::vector<Term> args);
    Term max_of(std::vector<Term> args);

    const std::vector<std::string>& warnings() const { return warnings_; }
    MilpProblem& problem() { return p_; }

  private:
    struct Selector {
        std::vector<stl::Interval> windows;
        std::vector<VarId> choice;
    };

    Term node(const stl::Node& n, Index t, weak::Polarity pol);
    Term predicate(const stl::Node& n, Index t, weak::Polarity pol);
    Term window(const stl::Node& n, stl::Interval w, Index t, weak::Polarity pol);
    const Selector& selector(const stl::Node& n, weak::Polarity pol);
    std::vector<VarId> declare_theta(const weak::WeakStlFormula& f);
    void check_range(const Term& t);
    std::string name(const std::string& base) { return p_.fresh_name(prefix_ + "_" + base); }

    MilpProblem& p_;
    SignalTerms signal_;
    Index length_;
    EncodingOptions opt_;
    std::string prefix_;
    std::map<std::tuple<const stl::Node*, Index, int>, Term> memo_;
    std::map<std::pair<const stl::Node*, int>, VarId> theta_;
    std::map<const stl::Node*, Selector> selectors_;
    std::vector<std::string> warnings_;
    bool warned_range_ = false;
    int counter_ = 0;
};

/// Signal handles backed by fresh continuous variables with the given bounds;
/// values of `fixed` are imposed as equality constraints, so min/max gadgets
/// are still built against the wide bounds.
SignalTerms signal_variables(MilpProblem& p, const stl::Signal& fixed, double lo, double hi,
                             std::vector<std::vector<VarId>>* ids = nullptr);

Term encode_robustness(MilpProblem& p, const stl::StlFormula& f, const SignalTerms& signal, Index length,
                       Index t, const EncodingOptions& opt = {});

struct WeakTerm {
    Term rho;
    std::vector<VarId> theta;
};

WeakTerm encode_weak_robustness(MilpProblem& p, const weak::WeakStlFormula& f, const SignalTerms& signal,
                                Index length, Index t, const EncodingOptions& opt = {});

/// The MILP whose optimum gives minimally weakened versions of
/// both requirements and an action sequence satisfying them.
struct ResolutionEncoding {
    MilpProblem problem;
    Index t = 0; // evaluation step: last sample of the past signal
    int horizon = 0;
    env::LoweredModel model;
    Term rho_phi, rho_phi0, rho_psi, rho_psi0;
    std::vector<VarId> theta_phi, theta_psi;
    std::vector<int> bounds_phi, bounds_psi;
    LinearExpr delta; // (rho_phi - rho_phi0) + (rho_psi - rho_psi0)
    std::vector<std::string> warnings;
};

/// Throws InvalidInput when the past signal does not carry the model's state
/// variables, HorizonError when N is shorter than the weakened formulas need.
ResolutionEncoding encode_resolution(const weak::WeakStlFormula& phi, const weak::WeakStlFormula& psi,
                                     const env::TransitionSystem& model, const stl::Signal& past, int N,
                                     const EncodingOptions& opt = {});

} // namespace weakres::milp
