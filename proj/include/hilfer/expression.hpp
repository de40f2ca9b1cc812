#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hilfer/problem.hpp"

namespace hilfer {

class ParseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Compiled expression in t and x over the grammar
///
///   expr   := term (('+' | '-') term)*
///   term   := unary (('*' | '/') unary)*
///   unary  := '-' unary | '+' unary | atom
///   atom   := number | 't' | 'x' | fn '(' expr ')' | '(' expr ')'
///   fn     := sin | cos | exp | abs
class Expression {
    struct Node {
        enum Op { num, var_t, var_x, add, sub, mul, div, neg, sin, cos, exp, abs } op = num;
        double value = 0.0;
        std::shared_ptr<const Node> l;
        std::shared_ptr<const Node> r;

        [[nodiscard]] double eval(double t, double x) const {
            switch (op) {
            case num: return value;
            case var_t: return t;
            case var_x: return x;
            case add: return l->eval(t, x) + r->eval(t, x);
            case sub: return l->eval(t, x) - r->eval(t, x);
            case mul: return l->eval(t, x) * r->eval(t, x);
            case div: return l->eval(t, x) / r->eval(t, x);
            case neg: return -l->eval(t, x);
            case sin: return std::sin(l->eval(t, x));
            case cos: return std::cos(l->eval(t, x));
            case exp: return std::exp(l->eval(t, x));
            case abs: return std::fabs(l->eval(t, x));
            }
            return 0.0;
        }
    };
    using Ptr = std::shared_ptr<const Node>;

public:
    static Expression parse(std::string_view src) {
        Parser ps{src, 0};
        Expression e;
        e.text_ = std::string(src);
        e.root_ = ps.expr();
        ps.skip();
        if (ps.pos != src.size()) {
            ps.error("unexpected '" + std::string(1, src[ps.pos]) + "'");
        }
        return e;
    }

    [[nodiscard]] double operator()(double t, double x) const { return root_->eval(t, x); }
    [[nodiscard]] const std::string& text() const { return text_; }

    [[nodiscard]] ScalarMap as_map() const {
        return [root = root_](double t, double x) { return root->eval(t, x); };
    }

private:
    struct Parser {
        std::string_view s;
        std::size_t pos;

        [[noreturn]] void error(const std::string& what) const {
            throw ParseError("expression '" + std::string(s) + "' at " + std::to_string(pos) + ": " + what);
        }

        void skip() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) {
                ++pos;
            }
        }

        bool take(char c) {
            skip();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        static Ptr make(Node::Op op, Ptr l = nullptr, Ptr r = nullptr, double v = 0.0) {
            auto n = std::make_shared<Node>();
            n->op = op;
            n->l = std::move(l);
            n->r = std::move(r);
            n->value = v;
            return n;
        }

        Ptr expr() {
            Ptr lhs = term();
            for (;;) {
                if (take('+')) {
                    lhs = make(Node::add, lhs, term());
                } else if (take('-')) {
                    lhs = make(Node::sub, lhs, term());
                } else {
                    return lhs;
                }
            }
        }

        Ptr term() {
            Ptr lhs = unary();
            for (;;) {
                if (take('*')) {
                    lhs = make(Node::mul, lhs, unary());
                } else if (take('/')) {
                    lhs = make(Node::div, lhs, unary());
                } else {
                    return lhs;
                }
            }
        }

        Ptr unary() {
            if (take('-')) {
                return make(Node::neg, unary());
            }
            if (take('+')) {
                return unary();
            }
            return atom();
        }

        Ptr atom() {
            skip();
            if (pos >= s.size()) {
                error("unexpected end of input");
            }
            if (take('(')) {
                Ptr inner = expr();
                if (!take(')')) {
                    error("expected ')'");
                }
                return inner;
            }
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                double v = 0.0;
                const auto res = std::from_chars(s.data() + pos, s.data() + s.size(), v);
                if (res.ec != std::errc()) {
                    error("bad number");
                }
                pos = static_cast<std::size_t>(res.ptr - s.data());
                return make(Node::num, nullptr, nullptr, v);
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                const std::size_t start = pos;
                while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) {
                    ++pos;
                }
                const auto word = s.substr(start, pos - start);
                if (word == "t") {
                    return make(Node::var_t);
                }
                if (word == "x") {
                    return make(Node::var_x);
                }
                Node::Op op{};
                if (word == "sin") {
                    op = Node::sin;
                } else if (word == "cos") {
                    op = Node::cos;
                } else if (word == "exp") {
                    op = Node::exp;
                } else if (word == "abs") {
                    op = Node::abs;
                } else {
                    pos = start;
                    error("unknown identifier '" + std::string(word) + "'");
                }
                if (!take('(')) {
                    error("expected '(' after " + std::string(word));
                }
                Ptr arg = expr();
                if (!take(')')) {
                    error("expected ')'");
                }
                return make(op, arg);
            }
            error("unexpected '" + std::string(1, c) + "'");
        }
    };

    std::string text_;
    Ptr root_;
};

} // namespace hilfer
