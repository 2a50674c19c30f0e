#pragma once

#include "sbvp/linalg.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

namespace sbvp {

/// Real function of one variable parsed from text.
/// Grammar: + - * / ^ (right associative), unary minus, parentheses, numbers,
/// the variable (x, t or theta), constants pi and e, functions sin cos tanh sech exp.
class Expression {
public:
  explicit Expression(std::string text) : text_(std::move(text)) {
    Parser p{text_, 0, nodes_};
    root_ = p.parse_expr();
    p.skip_ws();
    if (p.pos != text_.size()) throw InputError("expression: unexpected '" + text_.substr(p.pos) + "'");
  }

  double operator()(double x) const { return eval(root_, x); }
  const std::string& text() const { return text_; }

private:
  enum class Op { num, var, add, sub, mul, div, pow, neg, sin, cos, tanh, sech, exp };
  struct Node {
    Op op;
    double value = 0.0;
    int a = -1, b = -1;
  };

  struct Parser {
    const std::string& s;
    std::size_t pos;
    std::vector<Node>& nodes;

    void skip_ws() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
      skip_ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    int add(Node n) {
      nodes.push_back(n);
      return static_cast<int>(nodes.size()) - 1;
    }
    int parse_expr() {
      int lhs = parse_term();
      for (;;) {
        if (eat('+')) lhs = add({Op::add, 0.0, lhs, parse_term()});
        else if (eat('-')) lhs = add({Op::sub, 0.0, lhs, parse_term()});
        else return lhs;
      }
    }
    int parse_term() {
      int lhs = parse_unary();
      for (;;) {
        if (eat('*')) lhs = add({Op::mul, 0.0, lhs, parse_unary()});
        else if (eat('/')) lhs = add({Op::div, 0.0, lhs, parse_unary()});
        else return lhs;
      }
    }
    int parse_unary() {
      if (eat('-')) return add({Op::neg, 0.0, parse_unary(), -1});
      if (eat('+')) return parse_unary();
      return parse_power();
    }
    int parse_power() {
      const int base = parse_primary();
      if (eat('^')) return add({Op::pow, 0.0, base, parse_unary()});
      return base;
    }
    int parse_primary() {
      skip_ws();
      if (pos >= s.size()) throw InputError("expression: unexpected end of input");
      if (eat('(')) {
        const int e = parse_expr();
        if (!eat(')')) throw InputError("expression: missing ')'");
        return e;
      }
      const char c = s[pos];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(s.substr(pos), &used);
        } catch (const std::exception&) {
          throw InputError("expression: bad number");
        }
        pos += used;
        return add({Op::num, v});
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        std::size_t start = pos;
        while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
        const std::string id = s.substr(start, pos - start);
        if (id == "x" || id == "t" || id == "theta") return add({Op::var});
        if (id == "pi") return add({Op::num, std::numbers::pi});
        if (id == "e") return add({Op::num, std::numbers::e});
        Op f;
        if (id == "sin") f = Op::sin;
        else if (id == "cos") f = Op::cos;
        else if (id == "tanh") f = Op::tanh;
        else if (id == "sech") f = Op::sech;
        else if (id == "exp") f = Op::exp;
        else throw InputError("expression: unknown identifier '" + id + "'");
        if (!eat('(')) throw InputError("expression: expected '(' after " + id);
        const int arg = parse_expr();
        if (!eat(')')) throw InputError("expression: missing ')'");
        return add({f, 0.0, arg});
      }
      throw InputError(std::string("expression: unexpected character '") + c + "'");
    }
  };

  double eval(int i, double x) const {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::num: return n.value;
      case Op::var: return x;
      case Op::add: return eval(n.a, x) + eval(n.b, x);
      case Op::sub: return eval(n.a, x) - eval(n.b, x);
      case Op::mul: return eval(n.a, x) * eval(n.b, x);
      case Op::div: return eval(n.a, x) / eval(n.b, x);
      case Op::pow: return std::pow(eval(n.a, x), eval(n.b, x));
      case Op::neg: return -eval(n.a, x);
      case Op::sin: return std::sin(eval(n.a, x));
      case Op::cos: return std::cos(eval(n.a, x));
      case Op::tanh: return std::tanh(eval(n.a, x));
      case Op::sech: return 1.0 / std::cosh(eval(n.a, x));
      case Op::exp: return std::exp(eval(n.a, x));
    }
    return 0.0;
  }

  std::string text_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace sbvp
