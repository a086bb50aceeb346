#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "weakres/stl/affine.hpp"
#include "weakres/stl/formula.hpp"

namespace weakres::text {

enum class Tok {
    Ident,
    Number,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semicolon,
    Plus,
    Minus,
    Star,
    Slash,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Gt,
    Ge,
    Lt,
    Le,
    Assign,
    Prime,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0.0;
    int line = 1;
    int column = 1;
};

/// Splits text into tokens. Skips whitespace, `//` and `#` comments.
std::vector<Token> tokenize(std::string_view text);

std::string describe(Tok kind);

class TokenStream {
  public:
    explicit TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    const Token& peek(std::size_t ahead = 0) const;
    const Token& next();
    bool accept(Tok kind);
    const Token& expect(Tok kind, std::string_view what);
    bool at(Tok kind) const { return peek().kind == kind; }
    bool at_ident(std::string_view word) const {
        return peek().kind == Tok::Ident && peek().text == word;
    }
    std::size_t position() const { return pos_; }
    void rewind(std::size_t pos) { pos_ = pos; }
    [[noreturn]] void fail(const std::string& message) const;

  private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

using ConstantTable = std::map<std::string, double, std::less<>>;

/// affine := term { ("+"|"-") term }; term := factor { ("*"|"/") factor };
/// factor := number | ident | "(" affine ")" | "-" factor.
/// Products of two non-constant factors are rejected as nonlinear.
stl::AffineExpr parse_affine(TokenStream& ts, const ConstantTable* constants = nullptr);

/// Recursive-descent formula parser over the shared grammar. Weakening
/// annotations are accepted only when allow_annotations is set.
stl::NodePtr parse_formula(TokenStream& ts, bool allow_annotations);

/// Words that cannot be used as signal variable names.
bool is_reserved(std::string_view word);

} // namespace weakres::text
