#include "expression.hpp"

#include "hypercert/types.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hypercert::detail {

struct ExprNode {
  enum class Kind { constant, variable, negate, add, sub, mul, div, pow, call } kind;
  double value = 0.0;
  int index = 0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const ExprNode> lhs, rhs;

  [[nodiscard]] double eval(const double* vars) const {
    switch (kind) {
      case Kind::constant: return value;
      case Kind::variable: return vars[index];
      case Kind::negate: return -lhs->eval(vars);
      case Kind::add: return lhs->eval(vars) + rhs->eval(vars);
      case Kind::sub: return lhs->eval(vars) - rhs->eval(vars);
      case Kind::mul: return lhs->eval(vars) * rhs->eval(vars);
      case Kind::div: return lhs->eval(vars) / rhs->eval(vars);
      case Kind::pow: return std::pow(lhs->eval(vars), rhs->eval(vars));
      case Kind::call: return fn(lhs->eval(vars));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make(ExprNode::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(const std::string& s, const std::vector<std::string>& vars) : s_(s), vars_(vars) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw PreconditionError("expression '" + s_ + "': " + what + " at offset " + std::to_string(pos_));
  }
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

  NodePtr expr() {
    NodePtr n = term();
    for (;;) {
      if (accept('+')) n = make(ExprNode::Kind::add, n, term());
      else if (accept('-')) n = make(ExprNode::Kind::sub, n, term());
      else return n;
    }
  }
  NodePtr term() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*')) n = make(ExprNode::Kind::mul, n, unary());
      else if (accept('/')) n = make(ExprNode::Kind::div, n, unary());
      else return n;
    }
  }
  NodePtr unary() {
    if (accept('-')) return make(ExprNode::Kind::negate, unary());
    if (accept('+')) return unary();
    return power();
  }
  // right associative; binds tighter than unary minus on its left operand
  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(ExprNode::Kind::pow, base, unary());
    return base;
  }
  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expr();
      if (!accept(')')) fail("missing ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::constant;
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      for (std::size_t i = 0; i < vars_.size(); ++i) {
        if (vars_[i] == name) {
          auto n = std::make_shared<ExprNode>();
          n->kind = ExprNode::Kind::variable;
          n->index = static_cast<int>(i);
          return n;
        }
      }
      if (name == "pi" || name == "e") {
        auto n = std::make_shared<ExprNode>();
        n->kind = ExprNode::Kind::constant;
        n->value = name == "pi" ? std::numbers::pi : std::numbers::e;
        return n;
      }
      double (*fn)(double) = nullptr;
      if (name == "sin") fn = [](double v) { return std::sin(v); };
      else if (name == "cos") fn = [](double v) { return std::cos(v); };
      else if (name == "tan") fn = [](double v) { return std::tan(v); };
      else if (name == "exp") fn = [](double v) { return std::exp(v); };
      else if (name == "log") fn = [](double v) { return std::log(v); };
      else if (name == "sqrt") fn = [](double v) { return std::sqrt(v); };
      else if (name == "abs") fn = [](double v) { return std::abs(v); };
      if (fn == nullptr) fail("unknown identifier '" + name + "'");
      if (!accept('(')) fail("expected '(' after " + name);
      auto n = std::make_shared<ExprNode>();
      n->kind = ExprNode::Kind::call;
      n->fn = fn;
      n->lhs = expr();
      if (!accept(')')) fail("missing ')'");
      return n;
    }
    fail(std::string("unexpected '") + c + "'");
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& text, std::vector<std::string> variables)
    : text_(text), variables_(std::move(variables)) {
  root_ = Parser(text_, variables_).parse();
}

double Expression::operator()(const double* values) const { return root_->eval(values); }

}  // namespace hypercert::detail
