#include "schloegl/expr.hpp"

#include <charconv>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "schloegl/errors.hpp"

namespace schloegl {

enum class Op { Const, X, T, Add, Sub, Mul, Div, Neg, Pow, Sin, Cos, Exp, Log, Sqrt, Tanh };

struct Expr::Node {
  Op op;
  double value = 0.0;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  return std::make_shared<const Expr::Node>(Expr::Node{op, 0.0, std::move(a), std::move(b)});
}

NodePtr make_const(double v) {
  return std::make_shared<const Expr::Node>(Expr::Node{Op::Const, v, nullptr, nullptr});
}

bool is_const(const NodePtr& n, double v) { return n->op == Op::Const && n->value == v; }

// Light constant folding keeps derivative trees small.
NodePtr add(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value + b->value);
  return make(Op::Add, std::move(a), std::move(b));
}
NodePtr sub(NodePtr a, NodePtr b) {
  if (is_const(b, 0.0)) return a;
  if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value - b->value);
  return make(Op::Sub, std::move(a), std::move(b));
}
NodePtr mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (a->op == Op::Const && b->op == Op::Const) return make_const(a->value * b->value);
  return make(Op::Mul, std::move(a), std::move(b));
}
NodePtr div(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return make_const(0.0);
  if (is_const(b, 1.0)) return a;
  return make(Op::Div, std::move(a), std::move(b));
}
NodePtr neg(NodePtr a) {
  if (a->op == Op::Const) return make_const(-a->value);
  return make(Op::Neg, std::move(a));
}

bool depends_on_vars(const NodePtr& n) {
  if (!n) return false;
  if (n->op == Op::X || n->op == Op::T) return true;
  return depends_on_vars(n->a) || depends_on_vars(n->b);
}

double eval_node(const Expr::Node& n, double x, double t) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::X: return x;
    case Op::T: return t;
    case Op::Add: return eval_node(*n.a, x, t) + eval_node(*n.b, x, t);
    case Op::Sub: return eval_node(*n.a, x, t) - eval_node(*n.b, x, t);
    case Op::Mul: return eval_node(*n.a, x, t) * eval_node(*n.b, x, t);
    case Op::Div: return eval_node(*n.a, x, t) / eval_node(*n.b, x, t);
    case Op::Neg: return -eval_node(*n.a, x, t);
    case Op::Pow: {
      const double base = eval_node(*n.a, x, t);
      if (n.b->op == Op::Const) {
        const double p = n.b->value;
        if (p == 2.0) return base * base;
        if (p == 3.0) return base * base * base;
      }
      return std::pow(base, eval_node(*n.b, x, t));
    }
    case Op::Sin: return std::sin(eval_node(*n.a, x, t));
    case Op::Cos: return std::cos(eval_node(*n.a, x, t));
    case Op::Exp: return std::exp(eval_node(*n.a, x, t));
    case Op::Log: return std::log(eval_node(*n.a, x, t));
    case Op::Sqrt: return std::sqrt(eval_node(*n.a, x, t));
    case Op::Tanh: return std::tanh(eval_node(*n.a, x, t));
  }
  return 0.0;
}

NodePtr diff(const NodePtr& n, Expr::Var v) {
  switch (n->op) {
    case Op::Const: return make_const(0.0);
    case Op::X: return make_const(v == Expr::Var::X ? 1.0 : 0.0);
    case Op::T: return make_const(v == Expr::Var::T ? 1.0 : 0.0);
    case Op::Add: return add(diff(n->a, v), diff(n->b, v));
    case Op::Sub: return sub(diff(n->a, v), diff(n->b, v));
    case Op::Mul:
      return add(mul(diff(n->a, v), n->b), mul(n->a, diff(n->b, v)));
    case Op::Div:
      return div(sub(mul(diff(n->a, v), n->b), mul(n->a, diff(n->b, v))),
                 make(Op::Pow, n->b, make_const(2.0)));
    case Op::Neg: return neg(diff(n->a, v));
    case Op::Pow: {
      if (!depends_on_vars(n->b)) {
        // d(u^p) = p u^(p-1) u'
        const NodePtr pm1 = sub(n->b, make_const(1.0));
        return mul(mul(n->b, make(Op::Pow, n->a, pm1)), diff(n->a, v));
      }
      // d(u^w) = u^w (w' log u + w u'/u)
      return mul(n, add(mul(diff(n->b, v), make(Op::Log, n->a)),
                        div(mul(n->b, diff(n->a, v)), n->a)));
    }
    case Op::Sin: return mul(make(Op::Cos, n->a), diff(n->a, v));
    case Op::Cos: return neg(mul(make(Op::Sin, n->a), diff(n->a, v)));
    case Op::Exp: return mul(n, diff(n->a, v));
    case Op::Log: return div(diff(n->a, v), n->a);
    case Op::Sqrt: return div(diff(n->a, v), mul(make_const(2.0), n));
    case Op::Tanh: {
      const NodePtr sech2 = sub(make_const(1.0), make(Op::Pow, n, make_const(2.0)));
      return mul(sech2, diff(n->a, v));
    }
  }
  return make_const(0.0);
}

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string print(const NodePtr& n) {
  auto fn = [&](const char* name) { return std::string(name) + "(" + print(n->a) + ")"; };
  switch (n->op) {
    case Op::Const:
      return n->value < 0 ? "(" + fmt_double(n->value) + ")" : fmt_double(n->value);
    case Op::X: return "x";
    case Op::T: return "t";
    case Op::Add: return "(" + print(n->a) + " + " + print(n->b) + ")";
    case Op::Sub: return "(" + print(n->a) + " - " + print(n->b) + ")";
    case Op::Mul: return "(" + print(n->a) + " * " + print(n->b) + ")";
    case Op::Div: return "(" + print(n->a) + " / " + print(n->b) + ")";
    case Op::Neg: return "(-" + print(n->a) + ")";
    case Op::Pow: return "(" + print(n->a) + " ^ " + print(n->b) + ")";
    case Op::Sin: return fn("sin");
    case Op::Cos: return fn("cos");
    case Op::Exp: return fn("exp");
    case Op::Log: return fn("log");
    case Op::Sqrt: return fn("sqrt");
    case Op::Tanh: return fn("tanh");
  }
  return "";
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression '" + std::string(text_) + "': " + msg +
                      " at position " + std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(Op::Add, lhs, term());
      else if (accept('-')) lhs = make(Op::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Op::Mul, lhs, unary());
      else if (accept('/')) lhs = make(Op::Div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Op::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
      if (res.ec != std::errc()) fail("malformed number");
      pos_ = static_cast<std::size_t>(res.ptr - text_.data());
      return make_const(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      const std::string_view id = text_.substr(start, pos_ - start);
      if (id == "x") return make(Op::X);
      if (id == "t") return make(Op::T);
      if (id == "pi") return make_const(std::numbers::pi);
      Op fop;
      if (id == "sin") fop = Op::Sin;
      else if (id == "cos") fop = Op::Cos;
      else if (id == "exp") fop = Op::Exp;
      else if (id == "log") fop = Op::Log;
      else if (id == "sqrt") fop = Op::Sqrt;
      else if (id == "tanh") fop = Op::Tanh;
      else {
        pos_ = start;
        fail("unknown identifier '" + std::string(id) + "'");
      }
      expect('(');
      NodePtr arg = expr();
      expect(')');
      return make(fop, arg);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr Expr::parse(std::string_view text) { return Expr(Parser(text).parse()); }

Expr Expr::constant(double value) { return Expr(make_const(value)); }

Expr Expr::variable(Var v) { return Expr(make(v == Var::X ? Op::X : Op::T)); }

double Expr::eval(double x, double t) const { return eval_node(*node_, x, t); }

Expr Expr::derivative(Var v) const { return Expr(diff(node_, v)); }

bool Expr::is_constant() const { return !depends_on_vars(node_); }

std::string Expr::to_string() const { return print(node_); }

}  // namespace schloegl
