// SPDX-License-Identifier: Apache-2.0
#include "pirem/expr.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace pirem {

namespace {

struct Node {
  enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos } op;
  double value = 0.0;
  int var = -1;
  std::unique_ptr<Node> a, b;

  double eval(const Eigen::VectorXd& x) const {
    switch (op) {
      case Op::Const: return value;
      case Op::Var: return x[var];
      case Op::Add: return a->eval(x) + b->eval(x);
      case Op::Sub: return a->eval(x) - b->eval(x);
      case Op::Mul: return a->eval(x) * b->eval(x);
      case Op::Div: return a->eval(x) / b->eval(x);
      case Op::Pow: return std::pow(a->eval(x), b->eval(x));
      case Op::Neg: return -a->eval(x);
      case Op::Sin: return std::sin(a->eval(x));
      case Op::Cos: return std::cos(a->eval(x));
    }
    return 0.0;
  }
};

using NodePtr = std::unique_ptr<Node>;

NodePtr leaf(double v) {
  auto n = std::make_unique<Node>();
  n->op = Node::Op::Const;
  n->value = v;
  return n;
}

NodePtr unary(Node::Op op, NodePtr a) {
  auto n = std::make_unique<Node>();
  n->op = op;
  n->a = std::move(a);
  return n;
}

NodePtr binary(Node::Op op, NodePtr a, NodePtr b) {
  auto n = std::make_unique<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(const std::string& text, int dx) : s_(text), dx_(dx) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw std::invalid_argument("expression parse error at position " + std::to_string(pos_) +
                                ": " + why + " in '" + s_ + "'");
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr e = term();
    for (;;) {
      if (eat('+')) e = binary(Node::Op::Add, std::move(e), term());
      else if (eat('-')) e = binary(Node::Op::Sub, std::move(e), term());
      else return e;
    }
  }

  NodePtr term() {
    NodePtr e = factor();
    for (;;) {
      if (eat('*')) e = binary(Node::Op::Mul, std::move(e), factor());
      else if (eat('/')) e = binary(Node::Op::Div, std::move(e), factor());
      else return e;
    }
  }

  NodePtr factor() {
    if (eat('-')) return unary(Node::Op::Neg, factor());
    NodePtr b = base();
    if (eat('^')) return binary(Node::Op::Pow, std::move(b), factor());
    return b;
  }

  NodePtr base() {
    char c = peek();
    if (c == '(') {
      eat('(');
      NodePtr e = expr();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return ident();
    fail("unexpected character");
  }

  NodePtr number() {
    skip_ws();
    std::size_t used = 0;
    double v = std::stod(s_.substr(pos_), &used);
    pos_ += used;
    return leaf(v);
  }

  NodePtr ident() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    std::string name = s_.substr(start, pos_ - start);
    if (name == "pi") return leaf(3.14159265358979323846);
    if (name == "sin" || name == "cos") {
      if (!eat('(')) fail("expected '(' after " + name);
      NodePtr arg = expr();
      if (!eat(')')) fail("missing ')'");
      return unary(name == "sin" ? Node::Op::Sin : Node::Op::Cos, std::move(arg));
    }
    if (name.size() >= 2 && name[0] == 'x') {
      int var = std::stoi(name.substr(1)) - 1;
      if (var < 0 || var >= dx_) fail("variable " + name + " out of range for dx=" + std::to_string(dx_));
      auto n = std::make_unique<Node>();
      n->op = Node::Op::Var;
      n->var = var;
      return n;
    }
    fail("unknown identifier '" + name + "'");
  }

  const std::string& s_;
  int dx_;
  std::size_t pos_ = 0;
};

}  // namespace

std::function<double(const Eigen::VectorXd&)> parse_coeff_expr(const std::string& text, int dx) {
  auto root = std::shared_ptr<Node>(Parser(text, dx).parse().release());
  return [root](const Eigen::VectorXd& x) { return root->eval(x); };
}

double eval_const_expr(const std::string& text) {
  auto root = Parser(text, 0).parse();
  return root->eval(Eigen::VectorXd());
}

}  // namespace pirem
