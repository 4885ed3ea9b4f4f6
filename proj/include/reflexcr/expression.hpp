#pragma once

// Closed-form expression language for scenario files: +, -, *, /, integer
// powers, exp/sin/cos, parentheses, numeric literals, named variables and
// the imaginary unit i.  Conjugation is rejected up front, so everything
// that parses is holomorphic and residual checks measure method error, not
// input error.

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "reflexcr/core.hpp"

namespace reflexcr {

class ExpressionError : public std::runtime_error {
 public:
  ExpressionError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Immutable parsed expression over a fixed, ordered variable list.
class Expression {
 public:
  static Expression parse(const std::string& text,
                          std::vector<std::string> variables) {
    for (std::size_t a = 0; a < variables.size(); ++a) {
      if (reserved(variables[a]))
        throw ExpressionError("variable name '" + variables[a] + "' is reserved", 0);
      for (std::size_t b = a + 1; b < variables.size(); ++b)
        if (variables[a] == variables[b])
          throw ExpressionError("duplicate variable name '" + variables[a] + "'", 0);
    }
    Parser p{text, 0, &variables};
    NodePtr root = p.parse_sum();
    p.skip_ws();
    if (p.pos != text.size())
      throw ExpressionError("unexpected trailing input '" +
                                text.substr(p.pos) + "'",
                            p.pos);
    return Expression(text, std::move(variables), std::move(root));
  }

  Complex eval(const ComplexVector& args) const {
    if (args.size() != vars_.size())
      throw std::invalid_argument("Expression: expected " +
                                  std::to_string(vars_.size()) + " arguments, got " +
                                  std::to_string(args.size()));
    return root_->eval(args);
  }

  std::size_t arity() const { return vars_.size(); }
  const std::vector<std::string>& variables() const { return vars_; }
  const std::string& text() const { return text_; }

  /// Bound evaluator for AnalyticFunction and the scenario runners.
  AnalyticFunction::Evaluator evaluator() const {
    Expression copy = *this;
    return [copy](const ComplexVector& p) { return copy.eval(p); };
  }

 private:
  struct Node;
  using NodePtr = std::shared_ptr<Node>;

  enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Exp, Sin, Cos };

  struct Node {
    Op op;
    Complex value;          // Const
    std::size_t index = 0;  // Var
    int exponent = 0;       // Pow
    NodePtr lhs, rhs;

    Complex eval(const ComplexVector& args) const {
      switch (op) {
        case Op::Const:
          return value;
        case Op::Var:
          return args[index];
        case Op::Add:
          return lhs->eval(args) + rhs->eval(args);
        case Op::Sub:
          return lhs->eval(args) - rhs->eval(args);
        case Op::Mul:
          return lhs->eval(args) * rhs->eval(args);
        case Op::Div:
          return lhs->eval(args) / rhs->eval(args);
        case Op::Neg:
          return -lhs->eval(args);
        case Op::Pow: {
          // Exponentiation by squaring keeps integer powers exact-ish and
          // avoids branch cuts entirely.
          Complex base = lhs->eval(args), out(1.0);
          int k = exponent;
          while (k > 0) {
            if (k & 1) out *= base;
            base *= base;
            k >>= 1;
          }
          return out;
        }
        case Op::Exp:
          return std::exp(lhs->eval(args));
        case Op::Sin:
          return std::sin(lhs->eval(args));
        case Op::Cos:
          return std::cos(lhs->eval(args));
      }
      return Complex(0.0);
    }
  };

  static bool reserved(const std::string& name) {
    return name == "i" || name == "pi" || name == "exp" || name == "sin" ||
           name == "cos" || name == "conj";
  }

  static NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
  }

  struct Parser {
    const std::string& text;
    std::size_t pos;
    const std::vector<std::string>* vars;

    void skip_ws() {
      while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
        ++pos;
    }

    bool eat(char c) {
      skip_ws();
      if (pos < text.size() && text[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    NodePtr parse_sum() {
      NodePtr out = parse_product();
      for (;;) {
        if (eat('+'))
          out = make(Op::Add, out, parse_product());
        else if (eat('-'))
          out = make(Op::Sub, out, parse_product());
        else
          return out;
      }
    }

    NodePtr parse_product() {
      NodePtr out = parse_unary();
      for (;;) {
        if (eat('*'))
          out = make(Op::Mul, out, parse_unary());
        else if (eat('/'))
          out = make(Op::Div, out, parse_unary());
        else
          return out;
      }
    }

    NodePtr parse_unary() {
      if (eat('-')) return make(Op::Neg, parse_unary());
      if (eat('+')) return parse_unary();
      return parse_power();
    }

    NodePtr parse_power() {
      NodePtr out = parse_atom();
      while (eat('^')) {
        skip_ws();
        const std::size_t start = pos;
        int k = 0;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
          k = 10 * k + (text[pos] - '0');
          if (k > 64) throw ExpressionError("exponent larger than 64", start);
          ++pos;
        }
        if (pos == start)
          throw ExpressionError("expected a nonnegative integer exponent after '^'",
                                pos);
        NodePtr p = make(Op::Pow, out);
        p->exponent = k;
        out = p;
      }
      return out;
    }

    NodePtr parse_atom() {
      skip_ws();
      if (pos >= text.size())
        throw ExpressionError("unexpected end of expression", pos);
      const char c = text[pos];
      if (c == '(') {
        ++pos;
        NodePtr inner = parse_sum();
        if (!eat(')')) throw ExpressionError("missing ')'", pos);
        return inner;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
        return parse_identifier();
      throw ExpressionError(std::string("unexpected character '") + c + "'", pos);
    }

    NodePtr parse_number() {
      const char* begin = text.c_str() + pos;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) throw ExpressionError("malformed number", pos);
      pos += static_cast<std::size_t>(end - begin);
      NodePtr n = make(Op::Const);
      n->value = Complex(v, 0.0);
      return n;
    }

    NodePtr parse_identifier() {
      const std::size_t start = pos;
      while (pos < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
        ++pos;
      const std::string name = text.substr(start, pos - start);
      if (name == "i") {
        NodePtr n = make(Op::Const);
        n->value = Complex(0.0, 1.0);
        return n;
      }
      if (name == "pi") {
        NodePtr n = make(Op::Const);
        n->value = Complex(kPi, 0.0);
        return n;
      }
      if (name == "conj")
        throw ExpressionError(
            "conj is not allowed: expressions must be holomorphic", start);
      if (name == "exp" || name == "sin" || name == "cos") {
        if (!eat('('))
          throw ExpressionError("function '" + name + "' needs parentheses", pos);
        NodePtr arg = parse_sum();
        if (!eat(')')) throw ExpressionError("missing ')'", pos);
        return make(name == "exp" ? Op::Exp : name == "sin" ? Op::Sin : Op::Cos,
                    std::move(arg));
      }
      for (std::size_t j = 0; j < vars->size(); ++j) {
        if ((*vars)[j] == name) {
          NodePtr n = make(Op::Var);
          n->index = j;
          return n;
        }
      }
      throw ExpressionError("unknown identifier '" + name + "'", start);
    }
  };

  Expression(std::string text, std::vector<std::string> vars, NodePtr root)
      : text_(std::move(text)), vars_(std::move(vars)), root_(std::move(root)) {}

  std::string text_;
  std::vector<std::string> vars_;
  NodePtr root_;
};

}  // namespace reflexcr
