#pragma once

#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace weakres::milp {

using VarId = int;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Integer, Binary };

struct Variable {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lo = 0.0;
    double hi = kInf;
};

/// sum c_i x_i + constant. Terms are kept merged and sorted by id.
class LinearExpr {
  public:
    LinearExpr() = default;
    explicit LinearExpr(double constant) : constant_(constant) {}
    static LinearExpr var(VarId id, double coefficient = 1.0);

    const std::vector<std::pair<VarId, double>>& terms() const { return terms_; }
    double constant() const { return constant_; }
    bool is_constant() const { return terms_.empty(); }

    void add(VarId id, double coefficient);
    void add_constant(double c) { constant_ += c; }

    LinearExpr& operator+=(const LinearExpr& o);
    LinearExpr& operator-=(const LinearExpr& o);
    LinearExpr& operator*=(double k);

    friend LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
    friend LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }
    friend LinearExpr operator*(LinearExpr a, double k) { return a *= k; }
    friend LinearExpr operator*(double k, LinearExpr a) { return a *= k; }
    friend LinearExpr operator+(LinearExpr a, double c) { a.constant_ += c; return a; }
    friend LinearExpr operator-(LinearExpr a, double c) { a.constant_ -= c; return a; }
    friend LinearExpr operator-(LinearExpr a) { return a *= -1.0; }
    friend bool operator==(const LinearExpr&, const LinearExpr&) = default;

    double evaluate(const std::vector<double>& values) const;

  private:
    std::vector<std::pair<VarId, double>> terms_;
    double constant_ = 0.0;
};

enum class Relation { Le, Ge, Eq };

struct Constraint {
    std::string name;
    std::vector<std::pair<VarId, double>> coeffs;
    Relation rel = Relation::Le;
    double rhs = 0.0;
};

enum class Sense { Minimize, Maximize };

/// Variables, linear constraints and a linear objective.
class MilpProblem {
  public:
    /// Names must be LP-legal: [A-Za-z_][A-Za-z0-9_.]* and unique. Binary
    /// variables get bounds [0,1].
    VarId add_variable(std::string name, VarKind kind, double lo, double hi);
    VarId add_continuous(std::string name, double lo, double hi) {
        return add_variable(std::move(name), VarKind::Continuous, lo, hi);
    }
    VarId add_binary(std::string name) { return add_variable(std::move(name), VarKind::Binary, 0, 1); }
    VarId add_integer(std::string name, double lo, double hi) {
        return add_variable(std::move(name), VarKind::Integer, lo, hi);
    }

    /// lhs rel rhs; the constant of lhs moves to the right-hand side.
    /// Coefficients must be finite. Returns the constraint index.
    int add_constraint(const LinearExpr& lhs, Relation rel, double rhs, std::string name = {});
    void set_objective(Sense sense, LinearExpr objective);
    void set_bounds(VarId id, double lo, double hi);

    const std::vector<Variable>& variables() const { return vars_; }
    const Variable& variable(VarId id) const { return vars_.at(static_cast<std::size_t>(id)); }
    const std::vector<Constraint>& constraints() const { return cons_; }
    Sense sense() const { return sense_; }
    const LinearExpr& objective() const { return objective_; }
    int num_variables() const { return static_cast<int>(vars_.size()); }
    int num_constraints() const { return static_cast<int>(cons_.size()); }
    int num_integer() const;

    std::optional<VarId> find(std::string_view name) const;
    /// Name not yet used, derived from base.
    std::string fresh_name(std::string_view base) const;

  private:
    std::vector<Variable> vars_;
    std::vector<Constraint> cons_;
    std::unordered_map<std::string, VarId> index_;
    Sense sense_ = Sense::Minimize;
    LinearExpr objective_;
};

bool is_lp_name(std::string_view name);

/// Worst absolute violation of bounds and constraints at the given point.
double max_violation(const MilpProblem& p, const std::vector<double>& x);

} // namespace weakres::milp
