#pragma once

// Recursive-descent parser for the coefficient expression grammar:
//
//   expr   := term (("+"|"-") term)*
//   term   := unary (("*"|"/") unary)*
//   unary  := "-" unary | factor
//   factor := base ("^" ["-"] integer)?
//   base   := number | "t" | "x" digit | "(" expr ")" | func "(" expr ")"
//   func   := "exp" | "sin" | "cos" | "atan"
//
// Unary minus is accepted so that inputs like "exp(-x1^2)" parse; -x^2 reads
// as -(x^2).

#include <cctype>
#include <charconv>
#include <string>
#include <string_view>

#include "expression.hpp"

namespace ucont {

class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " at position " + std::to_string(position)), position_(position) {}
    std::size_t position() const { return position_; }

  private:
    std::size_t position_;
};

namespace detail {

class Parser {
  public:
    Parser(std::string_view text, int max_dim) : s_(text), max_dim_(max_dim) {}

    sym::Expression parse() {
        skip();
        if (pos_ >= s_.size()) throw ParseError("empty expression", pos_);
        sym::Expression e = expr();
        skip();
        if (pos_ < s_.size()) throw ParseError(std::string("unexpected '") + s_[pos_] + "'", pos_);
        return e;
    }

  private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= s_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
            throw ParseError(std::string("expected '") + c + "'", pos_);
        }
    }

    sym::Expression expr() {
        sym::Expression e = term();
        for (;;) {
            if (accept('+')) e = e + term();
            else if (accept('-')) e = e - term();
            else return e;
        }
    }

    sym::Expression term() {
        sym::Expression e = unary();
        for (;;) {
            if (accept('*')) {
                e = e * unary();
            } else if (accept('/')) {
                std::size_t at = pos_;
                sym::Expression d = unary();
                if (d.is_zero()) throw ParseError("division by zero", at);
                e = e / d;
            } else {
                return e;
            }
        }
    }

    sym::Expression unary() {
        if (accept('-')) return -unary();
        return factor();
    }

    sym::Expression factor() {
        sym::Expression b = base();
        if (accept('^')) {
            skip();
            bool neg = accept('-');
            skip();
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (start == pos_) throw ParseError("expected integer exponent", start);
            int e = 0;
            auto [p, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, e);
            if (ec != std::errc{}) throw ParseError("exponent out of range", start);
            if (neg && b.is_zero()) throw ParseError("zero raised to a negative power", start);
            return sym::pow(b, neg ? -e : e);
        }
        return b;
    }

    sym::Expression base() {
        skip();
        if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (c == '(') {
            ++pos_;
            sym::Expression e = expr();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            std::string_view id = s_.substr(start, pos_ - start);
            if (id == "t") return sym::Expression::t();
            if (id.size() == 2 && id[0] == 'x' && id[1] >= '1' && id[1] <= '3') {
                int i = id[1] - '0';
                if (i > max_dim_)
                    throw ParseError("variable " + std::string(id) + " exceeds dimension " + std::to_string(max_dim_), start);
                return sym::Expression::x(i);
            }
            if (id == "exp" || id == "sin" || id == "cos" || id == "atan") {
                expect('(');
                sym::Expression a = expr();
                expect(')');
                if (id == "exp") return sym::exp(a);
                if (id == "sin") return sym::sin(a);
                if (id == "cos") return sym::cos(a);
                return sym::atan(a);
            }
            throw ParseError("unknown identifier '" + std::string(id) + "'", start);
        }
        throw ParseError(std::string("unexpected '") + c + "'", pos_);
    }

    sym::Expression number() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) ++pos_;
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            } else {
                pos_ = save;  // "2exp(..)" is not supported anyway; let the caller complain
            }
        }
        double v = 0.0;
        auto [p, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
        if (ec != std::errc{} || p != s_.data() + pos_) throw ParseError("malformed number", start);
        return sym::Expression(v);
    }

    std::string_view s_;
    std::size_t pos_ = 0;
    int max_dim_;
};

}  // namespace detail

inline sym::Expression parse_expression(std::string_view text, int max_dim = 3) {
    return detail::Parser(text, max_dim).parse();
}

}  // namespace ucont
