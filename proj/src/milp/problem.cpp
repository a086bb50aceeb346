#include "weakres/milp/problem.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "weakres/error.hpp"

namespace weakres::milp {

LinearExpr LinearExpr::var(VarId id, double coefficient) {
    LinearExpr e;
    e.add(id, coefficient);
    return e;
}

void LinearExpr::add(VarId id, double coefficient) {
    if (coefficient == 0.0)
        return;
    auto it = std::lower_bound(terms_.begin(), terms_.end(), id,
                               [](const auto& t, VarId v) { return t.first < v; });
    if (it != terms_.end() && it->first == id) {
        it->second += coefficient;
        if (it->second == 0.0)
            terms_.erase(it);
    } else {
        terms_.insert(it, {id, coefficient});
    }
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& o) {
    for (const auto& [id, c] : o.terms_)
        add(id, c);
    constant_ += o.constant_;
    return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& o) {
    for (const auto& [id, c] : o.terms_)
        add(id, -c);
    constant_ -= o.constant_;
    return *this;
}

LinearExpr& LinearExpr::operator*=(double k) {
    if (k == 0.0) {
        terms_.clear();
        constant_ = 0.0;
        return *this;
    }
    for (auto& t : terms_)
        t.second *= k;
    constant_ *= k;
    return *this;
}

double LinearExpr::evaluate(const std::vector<double>& values) const {
    double v = constant_;
    for (const auto& [id, c] : terms_)
        v += c * values.at(static_cast<std::size_t>(id));
    return v;
}

bool is_lp_name(std::string_view name) {
    if (name.empty() || name.size() > 255)
        return false;
    auto ok_first = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    auto ok_rest = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
    };
    if (!ok_first(name[0]))
        return false;
    return std::all_of(name.begin() + 1, name.end(), ok_rest);
}

VarId MilpProblem::add_variable(std::string name, VarKind kind, double lo, double hi) {
    if (!is_lp_name(name))
        throw InvalidInput("variable name '" + name + "' is not LP-legal");
    if (index_.count(name))
        throw InvalidInput("duplicate variable '" + name + "'");
    if (kind == VarKind::Binary) {
        lo = std::max(lo, 0.0);
        hi = std::min(hi, 1.0);
    }
    if (std::isnan(lo) || std::isnan(hi) || lo == kInf || hi == -kInf)
        throw InvalidInput("invalid bounds for variable '" + name + "'");
    auto id = static_cast<VarId>(vars_.size());
    index_.emplace(name, id);
    vars_.push_back({std::move(name), kind, lo, hi});
    return id;
}

int MilpProblem::add_constraint(const LinearExpr& lhs, Relation rel, double rhs, std::string name) {
    for (const auto& [id, c] : lhs.terms()) {
        if (id < 0 || id >= num_variables())
            throw InvalidInput("constraint references undeclared variable id " + std::to_string(id));
        if (!std::isfinite(c))
            throw InvalidInput("non-finite constraint coefficient");
    }
    double r = rhs - lhs.constant();
    if (!std::isfinite(r))
        throw InvalidInput("non-finite constraint right-hand side");
    if (name.empty())
        name = "c" + std::to_string(cons_.size());
    if (!is_lp_name(name))
        throw InvalidInput("constraint name '" + name + "' is not LP-legal");
    cons_.push_back({std::move(name), lhs.terms(), rel, r});
    return static_cast<int>(cons_.size()) - 1;
}

void MilpProblem::set_objective(Sense sense, LinearExpr objective) {
    for (const auto& [id, c] : objective.terms())
        if (id < 0 || id >= num_variables() || !std::isfinite(c))
            throw InvalidInput("invalid objective term");
    sense_ = sense;
    objective_ = std::move(objective);
}

void MilpProblem::set_bounds(VarId id, double lo, double hi) {
    auto& v = vars_.at(static_cast<std::size_t>(id));
    v.lo = lo;
    v.hi = hi;
}

int MilpProblem::num_integer() const {
    return static_cast<int>(std::count_if(vars_.begin(), vars_.end(), [](const Variable& v) {
        return v.kind != VarKind::Continuous;
    }));
}

std::optional<VarId> MilpProblem::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

std::string MilpProblem::fresh_name(std::string_view base) const {
    std::string b(base);
    if (!index_.count(b))
        return b;
    for (int k = 1;; ++k) {
        std::string c = b + "_" + std::to_string(k);
        if (!index_.count(c))
            return c;
    }
}

double max_violation(const MilpProblem& p, const std::vector<double>& x) {
    double worst = 0.0;
    for (int j = 0; j < p.num_variables(); ++j) {
        const auto& v = p.variable(j);
        double xj = x.at(static_cast<std::size_t>(j));
        worst = std::max({worst, v.lo - xj, xj - v.hi});
        if (v.kind != VarKind::Continuous)
            worst = std::max(worst, std::abs(xj - std::round(xj)));
    }
    for (const auto& c : p.constraints()) {
        double a = 0.0;
        for (const auto& [id, k] : c.coeffs)
            a += k * x[static_cast<std::size_t>(id)];
        switch (c.rel) {
        case Relation::Le: worst = std::max(worst, a - c.rhs); break;
        case Relation::Ge: worst = std::max(worst, c.rhs - a); break;
        case Relation::Eq: worst = std::max(worst, std::abs(a - c.rhs)); break;
        }
    }
    return worst;
}

} // namespace weakres::milp
