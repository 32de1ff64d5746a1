#pragma once

// Arithmetic expression trees used in rule premises, variable assignments
// and custom certainty formulas.

#include <algorithm>
#include <charconv>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace ledgermind {

struct Expression;
using ExprPtr = std::shared_ptr<const Expression>;

enum class BinaryOp { add, subtract, multiply, divide };

struct NumberLit {
  double value = 0;
};

struct TextLit {
  std::string value;
};

// `[name]` in the DSL. In a custom formula the bare tokens PREV and NEW are
// also represented as references.
struct VarRef {
  std::string name;
};

struct Negate {
  ExprPtr operand;
};

struct Binary {
  BinaryOp op = BinaryOp::add;
  ExprPtr lhs;
  ExprPtr rhs;
};

struct Expression {
  std::variant<NumberLit, TextLit, VarRef, Negate, Binary> node;
};

inline ExprPtr make_number(double value) { return std::make_shared<Expression>(Expression{NumberLit{value}}); }
inline ExprPtr make_text(std::string value) { return std::make_shared<Expression>(Expression{TextLit{std::move(value)}}); }
inline ExprPtr make_var(std::string name) { return std::make_shared<Expression>(Expression{VarRef{std::move(name)}}); }
inline ExprPtr make_negate(ExprPtr operand) { return std::make_shared<Expression>(Expression{Negate{std::move(operand)}}); }
inline ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<Expression>(Expression{Binary{op, std::move(lhs), std::move(rhs)}});
}

bool operator==(const Expression& a, const Expression& b);

inline bool same_expr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  return *a == *b;
}

inline bool operator==(const Expression& a, const Expression& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& lhs) -> bool {
        using T = std::decay_t<decltype(lhs)>;
        const auto& rhs = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, NumberLit>) return lhs.value == rhs.value;
        else if constexpr (std::is_same_v<T, TextLit>) return lhs.value == rhs.value;
        else if constexpr (std::is_same_v<T, VarRef>) return lhs.name == rhs.name;
        else if constexpr (std::is_same_v<T, Negate>) return same_expr(lhs.operand, rhs.operand);
        else return lhs.op == rhs.op && same_expr(lhs.lhs, rhs.lhs) && same_expr(lhs.rhs, rhs.rhs);
      },
      a.node);
}

// Shortest text that parses back to the same double.
inline std::string format_number(double value) {
  if (value == 0) return "0";
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, end);
}

inline std::string quote_text(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  out += '"';
  return out;
}

namespace detail {

inline int precedence(const Expression& e) {
  if (const auto* bin = std::get_if<Binary>(&e.node)) {
    return (bin->op == BinaryOp::add || bin->op == BinaryOp::subtract) ? 1 : 2;
  }
  if (std::holds_alternative<Negate>(e.node)) return 3;
  return 4;
}

inline char op_char(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return '+';
    case BinaryOp::subtract: return '-';
    case BinaryOp::multiply: return '*';
    case BinaryOp::divide: return '/';
  }
  return '?';
}

inline void print(const Expression& e, bool bare_refs, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLit>) {
          out += format_number(n.value);
        } else if constexpr (std::is_same_v<T, TextLit>) {
          out += quote_text(n.value);
        } else if constexpr (std::is_same_v<T, VarRef>) {
          if (bare_refs) out += n.name;
          else out += "[" + n.name + "]";
        } else if constexpr (std::is_same_v<T, Negate>) {
          out += '-';
          bool wrap = precedence(*n.operand) < 3;
          if (wrap) out += '(';
          print(*n.operand, bare_refs, out);
          if (wrap) out += ')';
        } else {
          int p = precedence(e);
          // Left associativity: only the right operand needs parentheses at equal precedence.
          bool wrap_left = precedence(*n.lhs) < p;
          bool wrap_right = precedence(*n.rhs) <= p;
          if (wrap_left) out += '(';
          print(*n.lhs, bare_refs, out);
          if (wrap_left) out += ')';
          out += ' ';
          out += op_char(n.op);
          out += ' ';
          if (wrap_right) out += '(';
          print(*n.rhs, bare_refs, out);
          if (wrap_right) out += ')';
        }
      },
      e.node);
}

inline void collect(const Expression& e, std::vector<std::string>& names) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarRef>) {
          if (std::find(names.begin(), names.end(), n.name) == names.end()) names.push_back(n.name);
        } else if constexpr (std::is_same_v<T, Negate>) {
          collect(*n.operand, names);
        } else if constexpr (std::is_same_v<T, Binary>) {
          collect(*n.lhs, names);
          collect(*n.rhs, names);
        }
      },
      e.node);
}

}  // namespace detail

inline std::string to_string(const Expression& e) {
  std::string out;
  detail::print(e, false, out);
  return out;
}

// Formula form: references print without brackets (PREV, NEW).
inline std::string to_formula_string(const Expression& e) {
  std::string out;
  detail::print(e, true, out);
  return out;
}

// Referenced names in order of first appearance, each listed once.
inline std::vector<std::string> referenced_names(const Expression& e) {
  std::vector<std::string> names;
  detail::collect(e, names);
  return names;
}

inline bool contains_arithmetic(const Expression& e) {
  return std::holds_alternative<Negate>(e.node) || std::holds_alternative<Binary>(e.node);
}

}  // namespace ledgermind
