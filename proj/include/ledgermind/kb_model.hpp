#pragma once

// Knowledge representation: qualifiers, variables, choices and the
// IF/THEN/ELSE/NOTE/REFERENCE/NAME production rules that connect them.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ledgermind/expression.hpp"

namespace ledgermind {

enum class ModeKind { yes_no, zero_10, minus100_plus100, incr_decr, custom_formula, fuzzy };

struct CertaintyMode {
  ModeKind kind = ModeKind::zero_10;
  // custom_formula only; references PREV (accumulator) and NEW (next contribution).
  ExprPtr formula;

  friend bool operator==(const CertaintyMode& a, const CertaintyMode& b) {
    return a.kind == b.kind && same_expr(a.formula, b.formula);
  }
};

struct ModeBounds {
  double low;
  double high;
  bool bounded;
};

inline ModeBounds bounds(ModeKind kind) {
  switch (kind) {
    case ModeKind::yes_no: return {0, 1, true};
    case ModeKind::zero_10: return {0, 10, true};
    case ModeKind::minus100_plus100: return {-100, 100, true};
    case ModeKind::fuzzy: return {0, 1, true};
    case ModeKind::incr_decr:
    case ModeKind::custom_formula: return {0, 0, false};
  }
  return {0, 0, false};
}

inline bool confidence_in_range(ModeKind kind, double value) {
  if (kind == ModeKind::yes_no) return value == 0 || value == 1;
  ModeBounds b = bounds(kind);
  return !b.bounded || (value >= b.low && value <= b.high);
}

inline std::string mode_name(ModeKind kind) {
  switch (kind) {
    case ModeKind::yes_no: return "YES/NO";
    case ModeKind::zero_10: return "0-10";
    case ModeKind::minus100_plus100: return "-100/+100";
    case ModeKind::incr_decr: return "INCR/DECR";
    case ModeKind::custom_formula: return "CUSTOM";
    case ModeKind::fuzzy: return "FUZZY";
  }
  return "?";
}

struct Qualifier {
  std::string name;
  std::string prompt;
  std::vector<std::string> values;
  bool multi_select = false;

  bool has_value(const std::string& label) const {
    return std::find(values.begin(), values.end(), label) != values.end();
  }
  friend bool operator==(const Qualifier&, const Qualifier&) = default;
};

enum class ValueKind { numeric, text };

struct Variable {
  std::string name;
  std::string description;
  ValueKind value_kind = ValueKind::numeric;
  friend bool operator==(const Variable&, const Variable&) = default;
};

struct Choice {
  std::string name;
  std::string statement;
  friend bool operator==(const Choice&, const Choice&) = default;
};

enum class CompareOp { eq, ne, lt, le, gt, ge };

inline std::string to_string(CompareOp op) {
  switch (op) {
    case CompareOp::eq: return "=";
    case CompareOp::ne: return "<>";
    case CompareOp::lt: return "<";
    case CompareOp::le: return "<=";
    case CompareOp::gt: return ">";
    case CompareOp::ge: return ">=";
  }
  return "?";
}

struct QualifierTest {
  std::string qualifier;
  bool negated = false;  // IS-NOT
  std::vector<std::string> values;
  friend bool operator==(const QualifierTest&, const QualifierTest&) = default;
};

struct Comparison {
  ExprPtr lhs;
  CompareOp op = CompareOp::eq;
  ExprPtr rhs;
  friend bool operator==(const Comparison& a, const Comparison& b) {
    return a.op == b.op && same_expr(a.lhs, b.lhs) && same_expr(a.rhs, b.rhs);
  }
};

struct Condition {
  std::variant<QualifierTest, Comparison> form;
  friend bool operator==(const Condition&, const Condition&) = default;
};

struct ChoiceAssign {
  std::string choice;
  double confidence = 0;
  friend bool operator==(const ChoiceAssign&, const ChoiceAssign&) = default;
};

struct QualifierAssign {
  std::string qualifier;
  std::vector<std::string> values;
  friend bool operator==(const QualifierAssign&, const QualifierAssign&) = default;
};

struct VariableAssign {
  std::string variable;
  ExprPtr value;
  friend bool operator==(const VariableAssign& a, const VariableAssign& b) {
    return a.variable == b.variable && same_expr(a.value, b.value);
  }
};

struct Conclusion {
  std::variant<ChoiceAssign, QualifierAssign, VariableAssign> target;
  friend bool operator==(const Conclusion&, const Conclusion&) = default;
};

struct Rule {
  std::string name;
  std::vector<Condition> premise;
  std::vector<Conclusion> then_part;
  std::vector<Conclusion> else_part;
  std::optional<std::string> note;
  std::optional<std::string> reference;
  friend bool operator==(const Rule&, const Rule&) = default;
};

struct KnowledgeBase {
  std::string title;
  CertaintyMode mode;
  std::vector<Qualifier> qualifiers;
  std::vector<Variable> variables;
  std::vector<Choice> choices;
  std::vector<Rule> rules;
  // Empty means every choice, in declaration order.
  std::vector<std::string> goals;

  const Qualifier* find_qualifier(const std::string& name) const {
    for (const auto& q : qualifiers) if (q.name == name) return &q;
    return nullptr;
  }
  const Variable* find_variable(const std::string& name) const {
    for (const auto& v : variables) if (v.name == name) return &v;
    return nullptr;
  }
  const Choice* find_choice(const std::string& name) const {
    for (const auto& c : choices) if (c.name == name) return &c;
    return nullptr;
  }
  const Rule* find_rule(const std::string& name) const {
    for (const auto& r : rules) if (r.name == name) return &r;
    return nullptr;
  }
  std::optional<std::size_t> choice_index(const std::string& name) const {
    for (std::size_t i = 0; i < choices.size(); ++i) if (choices[i].name == name) return i;
    return std::nullopt;
  }

  std::vector<std::string> effective_goals() const {
    if (!goals.empty()) return goals;
    std::vector<std::string> all;
    for (const auto& c : choices) all.push_back(c.name);
    return all;
  }

  friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;
};

// Subject a conclusion assigns (choice, qualifier or variable name).
inline const std::string& conclusion_subject(const Conclusion& c) {
  return std::visit(
      [](const auto& t) -> const std::string& {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, ChoiceAssign>) return t.choice;
        else if constexpr (std::is_same_v<T, QualifierAssign>) return t.qualifier;
        else return t.variable;
      },
      c.target);
}

inline bool rule_concludes(const Rule& rule, const std::string& subject) {
  auto hit = [&](const Conclusion& c) { return conclusion_subject(c) == subject; };
  return std::any_of(rule.then_part.begin(), rule.then_part.end(), hit) ||
         std::any_of(rule.else_part.begin(), rule.else_part.end(), hit);
}

// Subjects a condition needs, left to right.
inline std::vector<std::string> condition_subjects(const Condition& c) {
  if (const auto* qt = std::get_if<QualifierTest>(&c.form)) return {qt->qualifier};
  const auto& cmp = std::get<Comparison>(c.form);
  std::vector<std::string> names = referenced_names(*cmp.lhs);
  for (const auto& n : referenced_names(*cmp.rhs)) {
    if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
  }
  return names;
}

// ---------------------------------------------------------------------------
// Static validation

enum class DiagnosticKind {
  dangling_ref,
  duplicate_name,
  confidence_out_of_range,
  type_mismatch,
  unassignable_variable,
  circular_support,
};

inline std::string to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::dangling_ref: return "DanglingRef";
    case DiagnosticKind::duplicate_name: return "DuplicateName";
    case DiagnosticKind::confidence_out_of_range: return "ConfidenceOutOfRange";
    case DiagnosticKind::type_mismatch: return "TypeMismatch";
    case DiagnosticKind::unassignable_variable: return "UnassignableVariable";
    case DiagnosticKind::circular_support: return "CircularSupport";
  }
  return "?";
}

enum class Severity { error, warning };

struct Diagnostic {
  DiagnosticKind kind;
  Severity severity = Severity::error;
  std::string rule;  // empty when not tied to a rule
  std::string message;
};

namespace detail {

enum class ExprType { number, text, mixed, unknown };

class Validator {
 public:
  explicit Validator(const KnowledgeBase& kb) : kb_(kb) {}

  std::vector<Diagnostic> run() {
    check_names();
    for (const auto& goal : kb_.goals) {
      if (!kb_.find_choice(goal)) add(DiagnosticKind::dangling_ref, "", "goal '" + goal + "' is not a declared choice");
    }
    for (const auto& rule : kb_.rules) check_rule(rule);
    check_cycles();
    return std::move(out_);
  }

 private:
  void add(DiagnosticKind kind, const std::string& rule, std::string message, Severity sev = Severity::error) {
    out_.push_back(Diagnostic{kind, sev, rule, std::move(message)});
  }

  void check_names() {
    std::set<std::string> seen;
    auto claim = [&](const std::string& name, const char* what) {
      if (!seen.insert(name).second) add(DiagnosticKind::duplicate_name, "", std::string(what) + " name '" + name + "' is already used");
    };
    for (const auto& q : kb_.qualifiers) {
      claim(q.name, "qualifier");
      std::set<std::string> labels;
      for (const auto& v : q.values) {
        if (!labels.insert(v).second) add(DiagnosticKind::duplicate_name, "", "qualifier '" + q.name + "' repeats value '" + v + "'");
      }
    }
    for (const auto& v : kb_.variables) claim(v.name, "variable");
    for (const auto& c : kb_.choices) claim(c.name, "choice");
    std::set<std::string> rules;
    for (const auto& r : kb_.rules) {
      if (!rules.insert(r.name).second) add(DiagnosticKind::duplicate_name, r.name, "rule name '" + r.name + "' is already used");
    }
  }

  ExprType type_of(const Expression& e, const std::string& rule) {
    return std::visit(
        [&](const auto& n) -> ExprType {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, NumberLit>) return ExprType::number;
          else if constexpr (std::is_same_v<T, TextLit>) return ExprType::text;
          else if constexpr (std::is_same_v<T, VarRef>) {
            if (const auto* v = kb_.find_variable(n.name)) return v->value_kind == ValueKind::numeric ? ExprType::number : ExprType::text;
            if (kb_.find_choice(n.name)) return ExprType::number;
            add(DiagnosticKind::dangling_ref, rule, "[" + n.name + "] is not a declared variable or choice");
            return ExprType::unknown;
          } else if constexpr (std::is_same_v<T, Negate>) {
            ExprType t = type_of(*n.operand, rule);
            if (t == ExprType::text) {
              add(DiagnosticKind::type_mismatch, rule, "arithmetic on text in '" + to_string(e) + "'");
              return ExprType::mixed;
            }
            return t;
          } else {
            ExprType l = type_of(*n.lhs, rule);
            ExprType r = type_of(*n.rhs, rule);
            if (l == ExprType::text || r == ExprType::text) {
              add(DiagnosticKind::type_mismatch, rule, "arithmetic on text in '" + to_string(e) + "'");
              return ExprType::mixed;
            }
            if (l == ExprType::unknown || r == ExprType::unknown) return ExprType::unknown;
            if (l == ExprType::mixed || r == ExprType::mixed) return ExprType::mixed;
            return ExprType::number;
          }
        },
        e.node);
  }

  void check_labels(const Qualifier& q, const std::vector<std::string>& labels, const std::string& rule) {
    for (const auto& label : labels) {
      if (!q.has_value(label)) add(DiagnosticKind::dangling_ref, rule, "qualifier '" + q.name + "' has no value '" + label + "'");
    }
  }

  void check_condition(const Condition& c, const std::string& rule) {
    if (const auto* qt = std::get_if<QualifierTest>(&c.form)) {
      const Qualifier* q = kb_.find_qualifier(qt->qualifier);
      if (!q) add(DiagnosticKind::dangling_ref, rule, "'" + qt->qualifier + "' is not a declared qualifier");
      else check_labels(*q, qt->values, rule);
      return;
    }
    const auto& cmp = std::get<Comparison>(c.form);
    ExprType l = type_of(*cmp.lhs, rule);
    ExprType r = type_of(*cmp.rhs, rule);
    if (l == ExprType::unknown || r == ExprType::unknown || l == ExprType::mixed || r == ExprType::mixed) return;
    if (l != r) {
      add(DiagnosticKind::type_mismatch, rule, "comparison between text and number");
    } else if (l == ExprType::text && cmp.op != CompareOp::eq && cmp.op != CompareOp::ne) {
      add(DiagnosticKind::type_mismatch, rule, "text supports only = and <>");
    }
  }

  void check_conclusion(const Conclusion& c, const std::string& rule) {
    std::visit(
        [&](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, ChoiceAssign>) {
            if (!kb_.find_choice(t.choice)) add(DiagnosticKind::dangling_ref, rule, "'" + t.choice + "' is not a declared choice");
            if (!confidence_in_range(kb_.mode.kind, t.confidence)) {
              add(DiagnosticKind::confidence_out_of_range, rule,
                  "Confidence=" + format_number(t.confidence) + " outside the " + mode_name(kb_.mode.kind) + " scale");
            }
          } else if constexpr (std::is_same_v<T, QualifierAssign>) {
            const Qualifier* q = kb_.find_qualifier(t.qualifier);
            if (!q) {
              add(DiagnosticKind::dangling_ref, rule, "'" + t.qualifier + "' is not a declared qualifier");
              return;
            }
            check_labels(*q, t.values, rule);
            if (!q->multi_select && t.values.size() > 1) {
              add(DiagnosticKind::type_mismatch, rule, "single-select qualifier '" + q->name + "' assigned several values");
            }
          } else {
            const Variable* v = kb_.find_variable(t.variable);
            if (!v) {
              add(DiagnosticKind::dangling_ref, rule, "[" + t.variable + "] is not a declared variable");
              return;
            }
            ExprType e = type_of(*t.value, rule);
            bool numeric = v->value_kind == ValueKind::numeric;
            if ((numeric && e == ExprType::text) || (!numeric && e == ExprType::number)) {
              add(DiagnosticKind::type_mismatch, rule, "[" + t.variable + "] assigned a value of the wrong kind");
            }
            auto refs = referenced_names(*t.value);
            if (std::find(refs.begin(), refs.end(), t.variable) != refs.end()) {
              add(DiagnosticKind::unassignable_variable, rule, "[" + t.variable + "] is assigned from itself and can never be computed");
            }
          }
        },
        c.target);
  }

  void check_rule(const Rule& rule) {
    for (const auto& c : rule.premise) check_condition(c, rule.name);
    for (const auto& c : rule.then_part) check_conclusion(c, rule.name);
    for (const auto& c : rule.else_part) check_conclusion(c, rule.name);
  }

  // Subjects a rule depends on: premise subjects plus names read by its assignments.
  static std::set<std::string> rule_inputs(const Rule& rule) {
    std::set<std::string> in;
    for (const auto& c : rule.premise) for (const auto& s : condition_subjects(c)) in.insert(s);
    auto scan = [&](const std::vector<Conclusion>& part) {
      for (const auto& c : part) {
        if (const auto* va = std::get_if<VariableAssign>(&c.target)) {
          for (const auto& s : referenced_names(*va->value)) in.insert(s);
        }
      }
    };
    scan(rule.then_part);
    scan(rule.else_part);
    return in;
  }

  // A concluded subject is well founded when some rule concluding it reads
  // only base subjects (never concluded) or subjects already well founded.
  void check_cycles() {
    std::map<std::string, std::vector<const Rule*>> support;
    for (const auto& r : kb_.rules) {
      for (const auto* part : {&r.then_part, &r.else_part}) {
        for (const auto& c : *part) {
          auto& list = support[conclusion_subject(c)];
          if (std::find(list.begin(), list.end(), &r) == list.end()) list.push_back(&r);
        }
      }
    }
    std::set<std::string> grounded;
    for (bool changed = true; changed;) {
      changed = false;
      for (const auto& r : kb_.rules) {
        auto in = rule_inputs(r);
        bool ready = std::all_of(in.begin(), in.end(), [&](const std::string& s) { return !support.count(s) || grounded.count(s); });
        if (!ready) continue;
        for (const auto* part : {&r.then_part, &r.else_part}) {
          for (const auto& c : *part) changed = grounded.insert(conclusion_subject(c)).second || changed;
        }
      }
    }
    for (const auto& [subject, rules] : support) {
      if (grounded.count(subject)) continue;
      add(DiagnosticKind::circular_support, rules.front()->name,
          "every rule supporting '" + subject + "' depends on '" + subject + "' itself", Severity::warning);
    }
  }

  const KnowledgeBase& kb_;
  std::vector<Diagnostic> out_;
};

}  // namespace detail

inline std::vector<Diagnostic> validate(const KnowledgeBase& kb) { return detail::Validator(kb).run(); }

inline bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) { return d.severity == Severity::error; });
}

}  // namespace ledgermind
