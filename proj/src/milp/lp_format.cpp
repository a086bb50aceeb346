#include "weakres/milp/lp_format.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>

#include <fmt/format.h>

#include "weakres/error.hpp"
#include "weakres/stl/affine.hpp"

namespace weakres::milp {

namespace {

using stl::format_number;

std::string bound_text(double v) {
    if (v == kInf)
        return "+inf";
    if (v == -kInf)
        return "-inf";
    return format_number(v);
}

void write_terms(std::string& out, const std::vector<std::pair<VarId, double>>& terms,
                 const MilpProblem& p) {
    bool first = true;
    for (const auto& [id, c] : terms) {
        double a = std::abs(c);
        if (first)
            out += c < 0 ? "- " : "";
        else
            out += c < 0 ? " - " : " + ";
        out += format_number(a) + " " + p.variable(id).name;
        first = false;
    }
    if (first)
        out += "0";
}

} // namespace

std::string export_lp(const MilpProblem& p) {
    std::string out = "\\ written by weakres\n";
    out += p.sense() == Sense::Maximize ? "Maximize\n" : "Minimize\n";
    out += " obj: ";
    write_terms(out, p.objective().terms(), p);
    double k = p.objective().constant();
    if (k != 0.0)
        out += (k < 0 ? " - " : " + ") + format_number(std::abs(k));
    out += "\nSubject To\n";
    for (const auto& c : p.constraints()) {
        out += " " + c.name + ": ";
        write_terms(out, c.coeffs, p);
        out += c.rel == Relation::Le ? " <= " : c.rel == Relation::Ge ? " >= " : " = ";
        out += format_number(c.rhs) + "\n";
    }
    out += "Bounds\n";
    for (const auto& v : p.variables()) {
        if (v.lo == -kInf && v.hi == kInf)
            out += " " + v.name + " free\n";
        else
            out += " " + bound_text(v.lo) + " <= " + v.name + " <= " + bound_text(v.hi) + "\n";
    }
    std::string generals, binaries;
    for (const auto& v : p.variables()) {
        if (v.kind == VarKind::Integer)
            generals += " " + v.name + "\n";
        else if (v.kind == VarKind::Binary)
            binaries += " " + v.name + "\n";
    }
    if (!generals.empty())
        out += "Generals\n" + generals;
    if (!binaries.empty())
        out += "Binaries\n" + binaries;
    out += "End\n";
    return out;
}

namespace {

enum class T { Name, Number, Colon, Plus, Minus, Le, Ge, Eq, End };

struct Tok {
    T kind;
    std::string text;
    double value = 0.0;
    int line = 1;
    int column = 1;
};

bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || std::string_view("_.!\"#$%&()/,;?@`'{}|~[]").find(c) != std::string_view::npos;
}

std::vector<Tok> lex(std::string_view s) {
    std::vector<Tok> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto adv = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            adv(1);
            continue;
        }
        if (c == '\\') {
            while (i < s.size() && s[i] != '\n')
                adv(1);
            continue;
        }
        Tok t{T::End, "", 0.0, line, col};
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + s.size(), v);
            if (ec != std::errc())
                throw ParseError("invalid number", line, col);
            std::size_t len = static_cast<std::size_t>(ptr - (s.data() + i));
            t.kind = T::Number;
            t.value = v;
            t.text = std::string(s.substr(i, len));
            out.push_back(t);
            adv(len);
            continue;
        }
        if (c == '<' || c == '>' || c == '=') {
            std::size_t len = (i + 1 < s.size() && (s[i + 1] == '=' || s[i + 1] == '<' || s[i + 1] == '>')) ? 2 : 1;
            std::string op(s.substr(i, len));
            t.kind = op.find('<') != std::string::npos ? T::Le : op.find('>') != std::string::npos ? T::Ge : T::Eq;
            out.push_back(t);
            adv(len);
            continue;
        }
        if (c == ':' || c == '+' || c == '-') {
            t.kind = c == ':' ? T::Colon : c == '+' ? T::Plus : T::Minus;
            out.push_back(t);
            adv(1);
            continue;
        }
        if (name_char(c)) {
            std::size_t j = i;
            while (j < s.size() && name_char(s[j]))
                ++j;
            t.kind = T::Name;
            t.text = std::string(s.substr(i, j - i));
            out.push_back(t);
            adv(j - i);
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back({T::End, "", 0.0, line, col});
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

enum class Section { None, Objective, Constraints, Bounds, Generals, Binaries, End };

struct RawTerm {
    std::string name;
    double coef;
};

struct RawRow {
    std::string name;
    std::vector<RawTerm> terms;
    double constant = 0.0;
    Relation rel = Relation::Le;
    double rhs = 0.0;
};

class LpReader {
  public:
    explicit LpReader(std::string_view text) : toks_(lex(text)) {}

    MilpProblem read() {
        while (!at(T::End)) {
            auto sec = section();
            if (!sec)
                fail("expected a section keyword");
            switch (*sec) {
            case Section::Objective: read_objective(); break;
            case Section::Constraints: read_constraints(); break;
            case Section::Bounds: read_bounds(); break;
            case Section::Generals: read_names(VarKind::Integer); break;
            case Section::Binaries: read_names(VarKind::Binary); break;
            case Section::End: return build();
            default: break;
            }
        }
        return build();
    }

  private:
    const Tok& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    bool at(T k) const { return peek().kind == k; }
    [[noreturn]] void fail(const std::string& m) const { throw ParseError(m, peek().line, peek().column); }

    // Section keyword starting here, with its token length.
    std::optional<std::pair<Section, std::size_t>> peek_section() const {
        if (!at(T::Name))
            return std::nullopt;
        std::string w = lower(peek().text);
        using R = std::pair<Section, std::size_t>;
        if (w == "minimize" || w == "minimise" || w == "minimum" || w == "min" ||
            w == "maximize" || w == "maximise" || w == "maximum" || w == "max")
            return R{Section::Objective, 1};
        if ((w == "subject" || w == "such") && peek(1).kind == T::Name &&
            (lower(peek(1).text) == "to" || lower(peek(1).text) == "that"))
            return R{Section::Constraints, 2};
        if (w == "st" || w == "s.t.")
            return R{Section::Constraints, 1};
        if (w == "bounds" || w == "bound")
            return R{Section::Bounds, 1};
        if (w == "generals" || w == "general" || w == "gen")
            return R{Section::Generals, 1};
        if (w == "binaries" || w == "binary" || w == "bin")
            return R{Section::Binaries, 1};
        if (w == "end")
            return R{Section::End, 1};
        return std::nullopt;
    }

    std::optional<Section> section() {
        auto s = peek_section();
        if (!s)
            return std::nullopt;
        if (s->first == Section::Objective)
            sense_ = lower(peek().text).rfind("max", 0) == 0 ? Sense::Maximize : Sense::Minimize;
        pos_ += s->second;
        return s->first;
    }

    bool at_section() const { return peek_section().has_value(); }

    void note(const std::string& name) {
        if (!seen_.count(name)) {
            seen_.emplace(name, appearance_.size());
            appearance_.push_back(name);
        }
    }

    double number() {
        double s = 1.0;
        while (at(T::Plus) || at(T::Minus)) {
            if (at(T::Minus))
                s = -s;
            ++pos_;
        }
        if (at(T::Number))
            return s * toks_[pos_++].value;
        if (at(T::Name)) {
            std::string w = lower(peek().text);
            if (w == "inf" || w == "infinity") {
                ++pos_;
                return s * kInf;
            }
        }
        fail("expected a number");
    }

    // Linear expression up to a relation, a section keyword, or a new "name:".
    void expression(std::vector<RawTerm>& terms, double& constant) {
        bool any = false;
        for (;;) {
            if (at(T::Le) || at(T::Ge) || at(T::Eq) || at(T::End))
                break;
            if (any && at(T::Name) && (peek(1).kind == T::Colon || at_section()))
                break;
            if (!any && at_section())
                break;
            double s = 1.0;
            bool sign = false;
            while (at(T::Plus) || at(T::Minus)) {
                if (at(T::Minus))
                    s = -s;
                ++pos_;
                sign = true;
            }
            if (any && !sign)
                fail("expected '+' or '-' between terms");
            double c = 1.0;
            bool has_num = false;
            if (at(T::Number)) {
                c = toks_[pos_++].value;
                has_num = true;
            }
            if (at(T::Name) && !(peek(1).kind == T::Colon) && !at_section()) {
                std::string name = toks_[pos_++].text;
                note(name);
                terms.push_back({name, s * c});
            } else if (has_num) {
                constant += s * c;
            } else {
                fail("expected a term");
            }
            any = true;
        }
    }

    void read_objective() {
        if (at(T::Name) && peek(1).kind == T::Colon)
            pos_ += 2;
        expression(objective_, objective_constant_);
    }

    void read_constraints() {
        while (!at(T::End) && !at_section()) {
            RawRow row;
            if (at(T::Name) && peek(1).kind == T::Colon) {
                row.name = peek().text;
                pos_ += 2;
            }
            expression(row.terms, row.constant);
            if (!(at(T::Le) || at(T::Ge) || at(T::Eq)))
                fail("expected a relation");
            row.rel = at(T::Le) ? Relation::Le : at(T::Ge) ? Relation::Ge : Relation::Eq;
            ++pos_;
            row.rhs = number();
            rows_.push_back(std::move(row));
        }
    }

    void set_bound(const std::string& name, Relation rel, double v, bool var_on_left) {
        note(name);
        bound_order_.push_back(name);
        auto& b = bounds_.try_emplace(name, std::pair<double, double>{0.0, kInf}).first->second;
        if (rel == Relation::Eq) {
            b = {v, v};
            return;
        }
        bool upper = (rel == Relation::Le) == var_on_left;
        (upper ? b.second : b.first) = v;
    }

    static Relation relation(T k) {
        return k == T::Le ? Relation::Le : k == T::Ge ? Relation::Ge : Relation::Eq;
    }

    void read_bounds() {
        while (!at(T::End) && !at_section()) {
            if (at(T::Name) && peek(1).kind == T::Name && lower(peek(1).text) == "free") {
                std::string name = peek().text;
                pos_ += 2;
                note(name);
                bound_order_.push_back(name);
                bounds_[name] = {-kInf, kInf};
                continue;
            }
            bool name_first = at(T::Name) && lower(peek().text) != "inf" && lower(peek().text) != "infinity";
            if (name_first) {
                std::string name = toks_[pos_++].text;
                if (!(at(T::Le) || at(T::Ge) || at(T::Eq)))
                    fail("expected a relation in bound");
                Relation r = relation(peek().kind);
                ++pos_;
                set_bound(name, r, number(), true);
                continue;
            }
            double v = number();
            if (!(at(T::Le) || at(T::Ge) || at(T::Eq)))
                fail("expected a relation in bound");
            Relation r1 = relation(peek().kind);
            ++pos_;
            if (!at(T::Name))
                fail("expected a variable name in bound");
            std::string name = toks_[pos_++].text;
            set_bound(name, r1, v, false);
            if (at(T::Le) || at(T::Ge) || at(T::Eq)) {
                Relation r2 = relation(peek().kind);
                ++pos_;
                set_bound(name, r2, number(), true);
            }
        }
    }

    void read_names(VarKind kind) {
        while (at(T::Name) && !at_section()) {
            std::string name = toks_[pos_++].text;
            note(name);
            kinds_[name] = kind;
        }
    }

    MilpProblem build() {
        MilpProblem p;
        std::vector<std::string> order;
        std::map<std::string, bool> placed;
        for (const auto& n : bound_order_)
            if (!placed[n]) {
                placed[n] = true;
                order.push_back(n);
            }
        for (const auto& n : appearance_)
            if (!placed[n]) {
                placed[n] = true;
                order.push_back(n);
            }
        for (const auto& n : order) {
            auto kind = kinds_.count(n) ? kinds_[n] : VarKind::Continuous;
            double lo = 0.0, hi = kind == VarKind::Binary ? 1.0 : kInf;
            if (auto it = bounds_.find(n); it != bounds_.end()) {
                lo = it->second.first;
                hi = it->second.second;
            }
            p.add_variable(n, kind, lo, hi);
        }
        auto expr = [&](const std::vector<RawTerm>& terms, double constant) {
            LinearExpr e(constant);
            for (const auto& t : terms)
                e.add(*p.find(t.name), t.coef);
            return e;
        };
        p.set_objective(sense_, expr(objective_, objective_constant_));
        for (const auto& r : rows_)
            p.add_constraint(expr(r.terms, r.constant), r.rel, r.rhs, r.name);
        return p;
    }

    std::vector<Tok> toks_;
    std::size_t pos_ = 0;
    Sense sense_ = Sense::Minimize;
    std::vector<RawTerm> objective_;
    double objective_constant_ = 0.0;
    std::vector<RawRow> rows_;
    std::map<std::string, std::pair<double, double>> bounds_;
    std::vector<std::string> bound_order_;
    std::map<std::string, VarKind> kinds_;
    std::map<std::string, std::size_t> seen_;
    std::vector<std::string> appearance_;
};

} // namespace

MilpProblem parse_lp(std::string_view text) { return LpReader(text).read(); }

} // namespace weakres::milp
