#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>

namespace weakres::stl {

/// sum_i coeffs[i] * var_i + constant, over named signal variables.
/// Zero coefficients are never stored, so structural equality is exact.
class AffineExpr {
  public:
    AffineExpr() = default;
    explicit AffineExpr(double constant) : constant_(constant) {}

    static AffineExpr variable(std::string name, double coefficient = 1.0);

    const std::map<std::string, double, std::less<>>& coefficients() const { return coeffs_; }
    double constant() const { return constant_; }
    double coefficient(std::string_view name) const;
    bool is_constant() const { return coeffs_.empty(); }

    void add_term(const std::string& name, double coefficient);
    void add_constant(double c) { constant_ += c; }

    /// Evaluate with a caller-supplied variable lookup.
    double evaluate(const std::function<double(const std::string&)>& lookup) const;

    AffineExpr& operator+=(const AffineExpr& other);
    AffineExpr& operator-=(const AffineExpr& other);
    AffineExpr& operator*=(double k);

    friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
    friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
    friend AffineExpr operator*(AffineExpr a, double k) { return a *= k; }
    friend AffineExpr operator*(double k, AffineExpr a) { return a *= k; }
    friend AffineExpr operator+(AffineExpr a, double c) { a.constant_ += c; return a; }
    friend AffineExpr operator-(AffineExpr a, double c) { a.constant_ -= c; return a; }
    friend AffineExpr operator-(AffineExpr a) { return a *= -1.0; }

    friend bool operator==(const AffineExpr& a, const AffineExpr& b) {
        return a.constant_ == b.constant_ && a.coeffs_ == b.coeffs_;
    }

  private:
    std::map<std::string, double, std::less<>> coeffs_;
    double constant_ = 0.0;
};

/// Shortest text that parses back to the identical value.
std::string format_number(double value);

/// Render as "2*x - y + 3"; reparses to the same coefficients.
std::string to_string(const AffineExpr& expr);

} // namespace weakres::stl
