#include "expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "expint/errors.hpp"

namespace expint::cli {

namespace {

enum class Tok { number, ident, op, lparen, rparen, end };

struct Token {
    Tok kind;
    std::string text;
    double value = 0.0;
    std::size_t pos = 0;
};

std::vector<Token> tokenize(const std::string& s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            double v = 0.0;
            const auto [end, ec] = std::from_chars(s.data() + i, s.data() + s.size(), v);
            if (ec != std::errc{}) throw ParseError("bad number at position " + std::to_string(i + 1), 0);
            const auto len = static_cast<std::size_t>(end - (s.data() + i));
            out.push_back({Tok::number, s.substr(i, len), v, i});
            i += len;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            out.push_back({Tok::ident, s.substr(i, j - i), 0.0, i});
            i = j;
        } else if (c == '(' || c == ')') {
            out.push_back({c == '(' ? Tok::lparen : Tok::rparen, std::string(1, c), 0.0, i});
            ++i;
        } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
            out.push_back({Tok::op, std::string(1, c), 0.0, i});
            ++i;
        } else {
            throw ParseError("unexpected character '" + std::string(1, c) + "' at position " + std::to_string(i + 1),
                             0);
        }
    }
    out.push_back({Tok::end, "end of input", 0.0, s.size()});
    return out;
}

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    enum class Kind { constant, var, neg, add, sub, mul, div, pow, sin, cos, exp, sqrt } kind;
    double value = 0.0;
    int var = 0;
    NodePtr a, b;

    double eval(const double* p) const {
        switch (kind) {
        case Kind::constant: return value;
        case Kind::var: return p[var];
        case Kind::neg: return -a->eval(p);
        case Kind::add: return a->eval(p) + b->eval(p);
        case Kind::sub: return a->eval(p) - b->eval(p);
        case Kind::mul: return a->eval(p) * b->eval(p);
        case Kind::div: return a->eval(p) / b->eval(p);
        case Kind::pow: return std::pow(a->eval(p), b->eval(p));
        case Kind::sin: return std::sin(a->eval(p));
        case Kind::cos: return std::cos(a->eval(p));
        case Kind::exp: return std::exp(a->eval(p));
        case Kind::sqrt: return std::sqrt(a->eval(p));
        }
        return 0.0;
    }
};

NodePtr make(Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
    return std::make_shared<const Node>(Node{k, 0.0, 0, std::move(a), std::move(b)});
}

NodePtr constant(double v) {
    return std::make_shared<const Node>(Node{Node::Kind::constant, v, 0, nullptr, nullptr});
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    NodePtr parse() {
        NodePtr n = expr();
        if (peek().kind != Tok::end) unexpected();
        return n;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_++]; }
    bool accept_op(char c) {
        if (peek().kind == Tok::op && peek().text[0] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    [[noreturn]] void unexpected() const {
        const Token& t = peek();
        throw ParseError("unexpected token '" + t.text + "' at position " + std::to_string(t.pos + 1), 0);
    }

    NodePtr expr() {
        NodePtr n = term();
        for (;;) {
            if (accept_op('+')) n = make(Node::Kind::add, n, term());
            else if (accept_op('-')) n = make(Node::Kind::sub, n, term());
            else return n;
        }
    }

    NodePtr term() {
        NodePtr n = unary();
        for (;;) {
            if (accept_op('*')) n = make(Node::Kind::mul, n, unary());
            else if (accept_op('/')) n = make(Node::Kind::div, n, unary());
            else return n;
        }
    }

    NodePtr unary() {
        if (accept_op('-')) return make(Node::Kind::neg, unary());
        if (accept_op('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept_op('^')) return make(Node::Kind::pow, base, unary());
        return base;
    }

    NodePtr primary() {
        const Token& t = peek();
        if (t.kind == Tok::number) {
            ++pos_;
            return constant(t.value);
        }
        if (t.kind == Tok::lparen) {
            ++pos_;
            NodePtr n = expr();
            if (peek().kind != Tok::rparen) unexpected();
            ++pos_;
            return n;
        }
        if (t.kind == Tok::ident) {
            if (t.text == "x" || t.text == "y" || t.text == "z") {
                ++pos_;
                return std::make_shared<const Node>(Node{Node::Kind::var, 0.0, t.text[0] - 'x', nullptr, nullptr});
            }
            if (t.text == "pi" || t.text == "e") {
                ++pos_;
                return constant(t.text == "pi" ? std::numbers::pi : std::numbers::e);
            }
            Node::Kind fn;
            if (t.text == "sin") fn = Node::Kind::sin;
            else if (t.text == "cos") fn = Node::Kind::cos;
            else if (t.text == "exp") fn = Node::Kind::exp;
            else if (t.text == "sqrt") fn = Node::Kind::sqrt;
            else unexpected();
            ++pos_;
            if (peek().kind != Tok::lparen) unexpected();
            ++pos_;
            NodePtr arg = expr();
            if (peek().kind != Tok::rparen) unexpected();
            ++pos_;
            return make(fn, arg);
        }
        unexpected();
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

} // namespace

ScalarFunction parse_expression(const std::string& text) {
    NodePtr root = Parser(tokenize(text)).parse();
    return [root](double x, double y, double z) {
        const double p[3] = {x, y, z};
        return root->eval(p);
    };
}

} // namespace expint::cli
