#include "weakres/text/lexer.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include "weakres/error.hpp"

namespace weakres::text {

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    int line = 1;
    int col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    auto push = [&](Tok kind, std::size_t len) {
        Token t;
        t.kind = kind;
        t.text = std::string(text.substr(i, len));
        t.line = line;
        t.column = col;
        out.push_back(std::move(t));
        advance(len);
    };

    while (i < text.size()) {
        char c = text[i];
        char n = i + 1 < text.size() ? text[i + 1] : '\0';
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '#' || (c == '/' && n == '/')) {
            while (i < text.size() && text[i] != '\n')
                advance(1);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
                ++j;
            push(Tok::Ident, j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(n)))) {
            std::size_t j = i;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])))
                ++j;
            if (j < text.size() && text[j] == '.') {
                ++j;
                while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])))
                    ++j;
            }
            if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < text.size() && (text[k] == '+' || text[k] == '-'))
                    ++k;
                if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
                    while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k])))
                        ++k;
                    j = k;
                }
            }
            Token t;
            t.kind = Tok::Number;
            t.text = std::string(text.substr(i, j - i));
            t.line = line;
            t.column = col;
            auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
            if (ec != std::errc() || ptr != t.text.data() + t.text.size())
                throw ParseError("invalid number '" + t.text + "'", line, col);
            out.push_back(std::move(t));
            advance(j - i);
            continue;
        }
        switch (c) {
        case '(': push(Tok::LParen, 1); continue;
        case ')': push(Tok::RParen, 1); continue;
        case '[': push(Tok::LBracket, 1); continue;
        case ']': push(Tok::RBracket, 1); continue;
        case '{': push(Tok::LBrace, 1); continue;
        case '}': push(Tok::RBrace, 1); continue;
        case ',': push(Tok::Comma, 1); continue;
        case ';': push(Tok::Semicolon, 1); continue;
        case '+': push(Tok::Plus, 1); continue;
        case '*': push(Tok::Star, 1); continue;
        case '/': push(Tok::Slash, 1); continue;
        case '!': push(Tok::Bang, 1); continue;
        case '\'': push(Tok::Prime, 1); continue;
        case '-': push(n == '>' ? Tok::Arrow : Tok::Minus, n == '>' ? 2 : 1); continue;
        case '&': push(Tok::Amp, n == '&' ? 2 : 1); continue;
        case '|': push(Tok::Pipe, n == '|' ? 2 : 1); continue;
        case '>': push(n == '=' ? Tok::Ge : Tok::Gt, n == '=' ? 2 : 1); continue;
        case '<': push(n == '=' ? Tok::Le : Tok::Lt, n == '=' ? 2 : 1); continue;
        case '=':
            if (n == '=')
                throw ParseError("equality comparison '==' is not supported", line, col);
            push(Tok::Assign, 1);
            continue;
        default:
            throw ParseError(std::string("unexpected character '") + c + "'", line, col);
        }
    }
    Token end;
    end.kind = Tok::End;
    end.line = line;
    end.column = col;
    out.push_back(end);
    return out;
}

std::string describe(Tok kind) {
    static constexpr std::array<const char*, 25> names = {
        "identifier", "number", "'('", "')'", "'['", "']'", "'{'", "'}'", "','",
        "';'",        "'+'",    "'-'", "'*'", "'/'", "'!'", "'&'", "'|'", "'->'",
        "'>'",        "'>='",   "'<'", "'<='", "'='", "'''", "end of input"};
    return names[static_cast<std::size_t>(kind)];
}

const Token& TokenStream::peek(std::size_t ahead) const {
    std::size_t k = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[k];
}

const Token& TokenStream::next() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size())
        ++pos_;
    return t;
}

bool TokenStream::accept(Tok kind) {
    if (peek().kind != kind)
        return false;
    next();
    return true;
}

const Token& TokenStream::expect(Tok kind, std::string_view what) {
    if (peek().kind != kind)
        fail("expected " + std::string(what) + ", found " +
             (peek().kind == Tok::End ? describe(Tok::End) : "'" + peek().text + "'"));
    return next();
}

void TokenStream::fail(const std::string& message) const {
    throw ParseError(message, peek().line, peek().column);
}

bool is_reserved(std::string_view word) {
    static constexpr std::array<std::string_view, 13> words = {
        "true", "false", "G", "F", "U", "if", "then", "else", "max", "min", "binary", "in", "inf"};
    for (auto w : words)
        if (w == word)
            return true;
    return false;
}

namespace {

using stl::AffineExpr;
using stl::Node;
using stl::NodePtr;
using stl::Op;

AffineExpr parse_factor(TokenStream& ts, const ConstantTable* constants);

AffineExpr parse_term(TokenStream& ts, const ConstantTable* constants) {
    AffineExpr acc = parse_factor(ts, constants);
    for (;;) {
        const Token& op = ts.peek();
        if (ts.at(Tok::Star)) {
            ts.next();
            AffineExpr rhs = parse_factor(ts, constants);
            if (acc.is_constant())
                acc = rhs * acc.constant();
            else if (rhs.is_constant())
                acc *= rhs.constant();
            else
                throw ParseError("nonlinear expression: product of two variable terms", op.line,
                                 op.column);
        } else if (ts.at(Tok::Slash)) {
            ts.next();
            AffineExpr rhs = parse_factor(ts, constants);
            if (!rhs.is_constant())
                throw ParseError("nonlinear expression: division by a variable term", op.line,
                                 op.column);
            if (rhs.constant() == 0.0)
                ts.fail("division by zero");
            acc *= 1.0 / rhs.constant();
        } else {
            return acc;
        }
    }
}

AffineExpr parse_factor(TokenStream& ts, const ConstantTable* constants) {
    const Token& t = ts.peek();
    switch (t.kind) {
    case Tok::Number:
        ts.next();
        return AffineExpr(t.number);
    case Tok::Ident: {
        if (is_reserved(t.text))
            ts.fail("reserved word '" + t.text + "' used as a variable");
        if (ts.peek(1).kind == Tok::LBracket)
            ts.fail("unknown operator '" + t.text + "'");
        std::string name = t.text;
        ts.next();
        if (constants) {
            auto it = constants->find(name);
            if (it != constants->end())
                return AffineExpr(it->second);
        }
        return AffineExpr::variable(name);
    }
    case Tok::LParen: {
        ts.next();
        AffineExpr inner = parse_affine(ts, constants);
        ts.expect(Tok::RParen, "')'");
        return inner;
    }
    case Tok::Minus:
        ts.next();
        return -parse_factor(ts, constants);
    default:
        ts.fail("expected a number, variable or '(' in expression");
    }
}

int parse_int(TokenStream& ts, std::string_view what) {
    bool negative = ts.accept(Tok::Minus);
    const Token& t = ts.peek();
    if (t.kind != Tok::Number)
        ts.fail("expected integer " + std::string(what));
    if (t.number != std::floor(t.number) || t.number > 1e9)
        ts.fail(std::string(what) + " must be an integer");
    if (negative)
        ts.fail(std::string(what) + " must be nonnegative");
    ts.next();
    return static_cast<int>(t.number);
}

class FormulaParser {
  public:
    FormulaParser(TokenStream& ts, bool allow) : ts_(ts), allow_(allow) {}

    NodePtr implication() {
        NodePtr lhs = disjunction();
        if (ts_.accept(Tok::Arrow)) {
            NodePtr rhs = implication();
            return binary(Op::Or, unary_node(Op::Not, lhs), rhs);
        }
        return lhs;
    }

  private:
    static NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

    static NodePtr binary(Op op, NodePtr a, NodePtr b, stl::Interval i = {}) {
        Node n;
        n.op = op;
        n.lhs = std::move(a);
        n.rhs = std::move(b);
        n.interval = i;
        return make(std::move(n));
    }

    static NodePtr unary_node(Op op, NodePtr a, stl::Interval i = {}) {
        Node n;
        n.op = op;
        n.lhs = std::move(a);
        n.interval = i;
        return make(std::move(n));
    }

    NodePtr disjunction() {
        NodePtr a = conjunction();
        while (ts_.accept(Tok::Pipe))
            a = binary(Op::Or, a, conjunction());
        return a;
    }

    NodePtr conjunction() {
        NodePtr a = until();
        while (ts_.accept(Tok::Amp))
            a = binary(Op::And, a, until());
        return a;
    }

    bool at_temporal(std::string_view word) const {
        return ts_.at_ident(word) && ts_.peek(1).kind == Tok::LBracket;
    }

    stl::Interval interval() {
        ts_.expect(Tok::LBracket, "'['");
        const Token& start = ts_.peek();
        int lo = parse_int(ts_, "interval bound");
        ts_.expect(Tok::Comma, "','");
        int hi = parse_int(ts_, "interval bound");
        ts_.expect(Tok::RBracket, "']'");
        if (lo > hi)
            throw ParseError("malformed interval [" + std::to_string(lo) + "," +
                                 std::to_string(hi) + "]: lower bound exceeds upper bound",
                             start.line, start.column);
        return {lo, hi};
    }

    NodePtr until() {
        NodePtr a = unary();
        while (at_temporal("U")) {
            ts_.next();
            stl::Interval i = interval();
            if (ts_.at(Tok::LBrace))
                ts_.fail("the until operator takes no weakening parameters");
            a = binary(Op::Until, a, unary(), i);
        }
        return a;
    }

    NodePtr unary() {
        if (ts_.accept(Tok::Bang))
            return unary_node(Op::Not, unary());
        if (at_temporal("G") || at_temporal("F")) {
            Op op = ts_.peek().text == "G" ? Op::Always : Op::Eventually;
            ts_.next();
            Node n;
            n.op = op;
            n.interval = interval();
            if (ts_.at(Tok::LBrace)) {
                require_annotations();
                ts_.next();
                stl::WindowSlack w;
                w.left = parse_int(ts_, "weakening bound");
                ts_.expect(Tok::Comma, "',' between weakening bounds");
                w.right = parse_int(ts_, "weakening bound");
                ts_.expect(Tok::RBrace, "'}'");
                n.window_slack = w;
            }
            n.lhs = unary();
            return make(std::move(n));
        }
        if (ts_.at(Tok::Ident) && (ts_.peek().text == "G" || ts_.peek().text == "F" ||
                                   ts_.peek().text == "U"))
            ts_.fail("temporal operator '" + ts_.peek().text + "' needs an interval [a,b]");
        return primary();
    }

    NodePtr primary() {
        if (ts_.at_ident("true")) {
            ts_.next();
            return make(Node{});
        }
        if (ts_.at(Tok::LParen)) {
            std::size_t start = ts_.position();
            try {
                return annotated(comparison());
            } catch (const ParseError& first) {
                ts_.rewind(start);
                try {
                    ts_.next();
                    NodePtr inner = implication();
                    ts_.expect(Tok::RParen, "')'");
                    return annotated(inner);
                } catch (const ParseError& second) {
                    bool second_further = second.line() > first.line() ||
                                          (second.line() == first.line() &&
                                           second.column() >= first.column());
                    if (second_further)
                        throw;
                    throw first;
                }
            }
        }
        return annotated(comparison());
    }

    NodePtr comparison() {
        AffineExpr lhs = parse_affine(ts_);
        Tok rel = ts_.peek().kind;
        if (rel != Tok::Gt && rel != Tok::Ge && rel != Tok::Lt && rel != Tok::Le) {
            if (ts_.at(Tok::Ident))
                ts_.fail("unknown operator '" + ts_.peek().text + "'");
            ts_.fail("expected a comparison operator (>, >=, <, <=)");
        }
        ts_.next();
        AffineExpr rhs = parse_affine(ts_);
        Node n;
        n.op = Op::Pred;
        n.expr = (rel == Tok::Gt || rel == Tok::Ge) ? lhs - rhs : rhs - lhs;
        return make(std::move(n));
    }

    NodePtr annotated(NodePtr n) {
        if (!ts_.at(Tok::LBrace))
            return n;
        require_annotations();
        if (n->op != Op::Pred)
            ts_.fail("a single-bound annotation {p} applies only to a comparison");
        if (n->pred_slack)
            ts_.fail("predicate already carries a weakening bound");
        ts_.next();
        stl::PredicateSlack slack;
        slack.bound = parse_int(ts_, "weakening bound");
        if (ts_.accept(Tok::Star)) {
            const Token& t = ts_.peek();
            if (t.kind != Tok::Number || !(t.number > 0.0))
                ts_.fail("slack scale must be a positive number");
            slack.scale = t.number;
            ts_.next();
        }
        if (ts_.at(Tok::Comma))
            ts_.fail("a comparison takes a single weakening bound {p}");
        ts_.expect(Tok::RBrace, "'}'");
        Node copy = *n;
        copy.pred_slack = slack;
        return make(std::move(copy));
    }

    void require_annotations() {
        if (!allow_)
            ts_.fail("weakening annotations are not allowed in plain STL");
    }

    TokenStream& ts_;
    bool allow_;
};

} // namespace

AffineExpr parse_affine(TokenStream& ts, const ConstantTable* constants) {
    AffineExpr acc = parse_term(ts, constants);
    for (;;) {
        if (ts.accept(Tok::Plus))
            acc += parse_term(ts, constants);
        else if (ts.accept(Tok::Minus))
            acc -= parse_term(ts, constants);
        else
            return acc;
    }
}

stl::NodePtr parse_formula(TokenStream& ts, bool allow_annotations) {
    FormulaParser p(ts, allow_annotations);
    return p.implication();
}

} // namespace weakres::text
