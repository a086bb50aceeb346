#include "weakres/stl/affine.hpp"

#include <cmath>

#include <fmt/format.h>

namespace weakres::stl {

AffineExpr AffineExpr::variable(std::string name, double coefficient) {
    AffineExpr e;
    e.add_term(name, coefficient);
    return e;
}

double AffineExpr::coefficient(std::string_view name) const {
    auto it = coeffs_.find(name);
    return it == coeffs_.end() ? 0.0 : it->second;
}

void AffineExpr::add_term(const std::string& name, double coefficient) {
    auto [it, inserted] = coeffs_.try_emplace(name, 0.0);
    it->second += coefficient;
    if (it->second == 0.0)
        coeffs_.erase(it);
}

double AffineExpr::evaluate(const std::function<double(const std::string&)>& lookup) const {
    double v = constant_;
    for (const auto& [name, c] : coeffs_)
        v += c * lookup(name);
    return v;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
    for (const auto& [name, c] : other.coeffs_)
        add_term(name, c);
    constant_ += other.constant_;
    return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& other) {
    for (const auto& [name, c] : other.coeffs_)
        add_term(name, -c);
    constant_ -= other.constant_;
    return *this;
}

AffineExpr& AffineExpr::operator*=(double k) {
    if (k == 0.0) {
        coeffs_.clear();
        constant_ = 0.0;
        return *this;
    }
    for (auto& [name, c] : coeffs_)
        c *= k;
    constant_ *= k;
    return *this;
}

std::string format_number(double value) {
    if (value == 0.0)
        return "0";
    return fmt::format("{}", value);
}

std::string to_string(const AffineExpr& expr) {
    std::string out;
    bool first = true;
    for (const auto& [name, c] : expr.coefficients()) {
        double mag = std::abs(c);
        if (first) {
            if (c < 0)
                out += "-";
        } else {
            out += c < 0 ? " - " : " + ";
        }
        if (mag != 1.0)
            out += format_number(mag) + "*";
        out += name;
        first = false;
    }
    double k = expr.constant();
    if (first)
        return format_number(k);
    if (k != 0.0) {
        out += k < 0 ? " - " : " + ";
        out += format_number(std::abs(k));
    }
    return out;
}

} // namespace weakres::stl
