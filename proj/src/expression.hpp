#pragma once

#include <memory>
#include <string>
#include <vector>

namespace hypercert::detail {

struct ExprNode;

/// Closed-form real expression in named variables, parsed once.
/// Grammar: + - * / ^, unary minus, parentheses, numbers, `pi`, `e`,
/// and sin cos tan exp log sqrt abs.
class Expression {
 public:
  Expression(const std::string& text, std::vector<std::string> variables);

  [[nodiscard]] double operator()(const double* values) const;
  [[nodiscard]] const std::string& text() const { return text_; }

 private:
  std::string text_;
  std::vector<std::string> variables_;
  std::shared_ptr<const ExprNode> root_;
};

}  // namespace hypercert::detail
