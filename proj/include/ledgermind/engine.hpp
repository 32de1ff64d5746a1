#pragma once

// Backward-chaining consultation engine.
//
// A Session holds the answers the user has given (keyed by subject) and the
// outcome of the latest run over them. Every mutation re-runs resolution
// from the goals with the recorded answers, so the state is always a pure
// function of (knowledge base, goals, answers). The run stops at the first
// subject that can neither be inferred nor taken from a recorded answer and
// publishes it as the pending question.
//
// Resolution order: goals as listed; for a goal, every rule concluding it in
// authored order; for a rule, premise conditions left to right. A subject a
// condition needs is first sought as the conclusion of other rules
// (depth-first, cycle-guarded) and only then asked. A premise fires THEN
// when all conditions hold and ELSE (when present) at the first condition
// that definitively fails; a condition cut short by a cycle abandons the
// rule without firing either branch.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <concepts>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ledgermind/certainty.hpp"
#include "ledgermind/error.hpp"
#include "ledgermind/kb_model.hpp"
#include "ledgermind/kb_parser.hpp"

namespace ledgermind {

struct UnknownValue {
  friend bool operator==(UnknownValue, UnknownValue) { return true; }
};

using LabelSet = std::vector<std::string>;
// An answer or a derived value. UnknownValue is the user's explicit UNKNOWN.
using FactValue = std::variant<LabelSet, double, std::string, UnknownValue>;
using Scalar = std::variant<double, std::string, UnknownValue>;

inline std::string to_string(const FactValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, LabelSet>) {
          std::string out;
          for (std::size_t i = 0; i < x.size(); ++i) out += (i ? ", " : "") + x[i];
          return out;
        } else if constexpr (std::is_same_v<T, double>) return format_number(x);
        else if constexpr (std::is_same_v<T, std::string>) return x;
        else return "UNKNOWN";
      },
      v);
}

inline std::string to_string(const Scalar& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) return format_number(x);
        else if constexpr (std::is_same_v<T, std::string>) return quote_text(x);
        else return "UNKNOWN";
      },
      v);
}

struct FromAnswer {
  int question_id = 0;
  friend bool operator==(const FromAnswer&, const FromAnswer&) = default;
};
struct FromRule {
  std::string rule;
  friend bool operator==(const FromRule&, const FromRule&) = default;
};
using FactOrigin = std::variant<FromAnswer, FromRule>;

struct Fact {
  std::string subject;
  FactValue value;
  FactOrigin origin;
  friend bool operator==(const Fact&, const Fact&) = default;
};

struct Contribution {
  std::string rule;
  double confidence = 0;
  friend bool operator==(const Contribution&, const Contribution&) = default;
};

struct ChoiceScore {
  std::string choice;
  std::vector<Contribution> contributions;
  CertaintyValue combined;

  std::vector<double> values() const {
    std::vector<double> out;
    for (const auto& c : contributions) out.push_back(c.confidence);
    return out;
  }
  friend bool operator==(const ChoiceScore&, const ChoiceScore&) = default;
};

enum class RuleResult { then_fired, else_fired, not_fired };

inline std::string to_string(RuleResult r) {
  switch (r) {
    case RuleResult::then_fired: return "THEN";
    case RuleResult::else_fired: return "ELSE";
    case RuleResult::not_fired: return "NONE";
  }
  return "?";
}

enum class SubjectKind { qualifier, variable };

struct Question {
  int id = 0;
  std::string subject;
  SubjectKind kind = SubjectKind::qualifier;
  std::string prompt;
  std::vector<std::string> options;  // qualifier labels
  bool multi_select = false;
  ValueKind value_kind = ValueKind::numeric;  // variables
  friend bool operator==(const Question&, const Question&) = default;
};

enum class TraceKind {
  goal_started,
  rule_tried,
  rule_fired,
  rule_failed,
  cycle_detected,
  question_asked,
  answered,
  fact_asserted,
  assignment_skipped,
  score_updated,
  division_by_zero,
  finished,
};

inline std::string to_string(TraceKind k) {
  switch (k) {
    case TraceKind::goal_started: return "GoalStarted";
    case TraceKind::rule_tried: return "RuleTried";
    case TraceKind::rule_fired: return "RuleFired";
    case TraceKind::rule_failed: return "RuleFailed";
    case TraceKind::cycle_detected: return "CycleDetected";
    case TraceKind::question_asked: return "QuestionAsked";
    case TraceKind::answered: return "Answered";
    case TraceKind::fact_asserted: return "FactAsserted";
    case TraceKind::assignment_skipped: return "AssignmentSkipped";
    case TraceKind::score_updated: return "ScoreUpdated";
    case TraceKind::division_by_zero: return "DivisionByZero";
    case TraceKind::finished: return "Finished";
  }
  return "?";
}

struct TraceEvent {
  int seq = 0;
  TraceKind kind = TraceKind::goal_started;
  int depth = 0;  // rules on the sub-goal stack when the event happened
  std::string rule;
  std::string subject;
  int question_id = 0;
  std::string detail;
  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

inline std::string to_string(const TraceEvent& e) {
  std::string out = std::to_string(e.seq) + " " + std::string(e.depth * 2, ' ') + to_string(e.kind);
  if (!e.rule.empty()) out += " rule=" + e.rule;
  if (!e.subject.empty()) out += " subject=" + e.subject;
  if (e.question_id) out += " question=" + std::to_string(e.question_id);
  if (!e.detail.empty()) out += " " + e.detail;
  return out;
}

enum class ConditionStatus { holds, fails, unknown };

inline std::string to_string(ConditionStatus s) {
  switch (s) {
    case ConditionStatus::holds: return "True";
    case ConditionStatus::fails: return "False";
    case ConditionStatus::unknown: return "Unknown";
  }
  return "?";
}

// Where the value of one subject of a condition came from; nullopt is Unresolved.
struct SubjectOrigin {
  std::string subject;
  std::optional<FactOrigin> origin;
  friend bool operator==(const SubjectOrigin&, const SubjectOrigin&) = default;
};

struct ConditionReport {
  Condition condition;
  ConditionStatus status = ConditionStatus::unknown;
  std::vector<SubjectOrigin> origins;
  friend bool operator==(const ConditionReport&, const ConditionReport&) = default;
};

enum class NodeOutcome { then_fired, else_fired, not_fired, pending };

inline std::string to_string(NodeOutcome o) {
  switch (o) {
    case NodeOutcome::then_fired: return "THEN";
    case NodeOutcome::else_fired: return "ELSE";
    case NodeOutcome::not_fired: return "NONE";
    case NodeOutcome::pending: return "Pending";
  }
  return "?";
}

struct ExplanationNode {
  std::string rule;
  NodeOutcome outcome = NodeOutcome::pending;
  std::vector<ConditionReport> conditions;
  friend bool operator==(const ExplanationNode&, const ExplanationNode&) = default;
};

enum class SessionStatus { awaiting_answer, finished };

inline std::string to_string(SessionStatus s) { return s == SessionStatus::finished ? "Finished" : "AwaitingAnswer"; }

struct GivenAnswer {
  std::string subject;
  FactValue value;
  friend bool operator==(const GivenAnswer&, const GivenAnswer&) = default;
};

struct AskedQuestion {
  int id = 0;
  std::string subject;
  FactValue value;
  friend bool operator==(const AskedQuestion&, const AskedQuestion&) = default;
};

struct Session {
  std::shared_ptr<const KnowledgeBase> kb;
  std::vector<std::string> goals;
  // Answer script: one entry per subject, in the order first given.
  std::vector<GivenAnswer> answers;

  // Outcome of the latest run.
  SessionStatus status = SessionStatus::awaiting_answer;
  std::vector<Fact> facts;
  std::vector<ChoiceScore> scores;  // every choice, declaration order
  std::map<std::string, RuleResult> decided;
  std::set<std::string> tried;
  std::vector<AskedQuestion> asked;
  std::optional<Question> pending_question;
  std::vector<ExplanationNode> pending_chain;
  std::vector<TraceEvent> trace;

  // Traces of runs superseded by answer revisions.
  std::vector<std::vector<TraceEvent>> history;

  const Fact* find_fact(const std::string& subject) const {
    for (const auto& f : facts) if (f.subject == subject) return &f;
    return nullptr;
  }
  const ChoiceScore* find_score(const std::string& choice) const {
    for (const auto& s : scores) if (s.choice == choice) return &s;
    return nullptr;
  }
  std::map<std::string, RuleResult> fired() const {
    std::map<std::string, RuleResult> out;
    for (const auto& [name, r] : decided) if (r != RuleResult::not_fired) out.emplace(name, r);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Expression evaluation

struct EvalResult {
  Scalar value;
  bool division_by_zero = false;
};

namespace detail {

template <class Lookup>
Scalar eval(const Expression& e, Lookup& lookup, bool& div_zero) {
  return std::visit(
      [&](const auto& n) -> Scalar {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLit>) return n.value;
        else if constexpr (std::is_same_v<T, TextLit>) return n.value;
        else if constexpr (std::is_same_v<T, VarRef>) return lookup(n.name);
        else if constexpr (std::is_same_v<T, Negate>) {
          Scalar v = eval(*n.operand, lookup, div_zero);
          if (const double* d = std::get_if<double>(&v)) return -*d;
          return UnknownValue{};
        } else {
          Scalar l = eval(*n.lhs, lookup, div_zero);
          Scalar r = eval(*n.rhs, lookup, div_zero);
          const double* a = std::get_if<double>(&l);
          const double* b = std::get_if<double>(&r);
          if (!a || !b) return UnknownValue{};
          switch (n.op) {
            case BinaryOp::add: return *a + *b;
            case BinaryOp::subtract: return *a - *b;
            case BinaryOp::multiply: return *a * *b;
            case BinaryOp::divide:
              if (*b == 0) {
                div_zero = true;
                return UnknownValue{};
              }
              return *a / *b;
          }
          return UnknownValue{};
        }
      },
      e.node);
}

inline Scalar fact_scalar(const FactValue& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  return UnknownValue{};
}

inline bool numbers_equal(double a, double b) {
  return std::fabs(a - b) <= 1e-9 * std::max(std::fabs(a), std::fabs(b));
}

inline bool compare(const Scalar& l, CompareOp op, const Scalar& r) {
  const double* a = std::get_if<double>(&l);
  const double* b = std::get_if<double>(&r);
  if (a && b) {
    switch (op) {
      case CompareOp::eq: return numbers_equal(*a, *b);
      case CompareOp::ne: return !numbers_equal(*a, *b);
      case CompareOp::lt: return *a < *b;
      case CompareOp::le: return *a <= *b;
      case CompareOp::gt: return *a > *b;
      case CompareOp::ge: return *a >= *b;
    }
  }
  const std::string* s = std::get_if<std::string>(&l);
  const std::string* t = std::get_if<std::string>(&r);
  if (s && t) {
    if (op == CompareOp::eq) return *s == *t;
    if (op == CompareOp::ne) return *s != *t;
  }
  return false;
}

inline bool qualifier_test_holds(const QualifierTest& qt, const FactValue& value) {
  const LabelSet* labels = std::get_if<LabelSet>(&value);
  if (!labels) return false;  // UNKNOWN fails both IS and IS-NOT
  bool intersects = false;
  for (const auto& l : *labels) {
    if (std::find(qt.values.begin(), qt.values.end(), l) != qt.values.end()) intersects = true;
  }
  return qt.negated ? !intersects : intersects;
}

}  // namespace detail

// `lookup(name)` returns the Scalar bound to a referenced name.
template <class Lookup>
  requires std::invocable<Lookup&, const std::string&>
EvalResult evaluate_expression(const Expression& expr, Lookup&& lookup) {
  EvalResult out;
  out.value = detail::eval(expr, lookup, out.division_by_zero);
  return out;
}

// Current value of a variable or choice within a session.
inline Scalar session_value(const Session& session, const std::string& name) {
  if (const Fact* f = session.find_fact(name)) return detail::fact_scalar(f->value);
  if (const ChoiceScore* s = session.find_score(name)) return s->combined.value;
  return UnknownValue{};
}

inline EvalResult evaluate_expression(const Expression& expr, const Session& session) {
  return evaluate_expression(expr, [&](const std::string& name) { return session_value(session, name); });
}

// ---------------------------------------------------------------------------
// Answers

// Checks an answer against its subject and normalizes label sets to
// declaration order. Throws IllegalValue.
inline FactValue normalize_answer(const KnowledgeBase& kb, const std::string& subject, const FactValue& value) {
  if (std::holds_alternative<UnknownValue>(value)) return value;
  if (const Qualifier* q = kb.find_qualifier(subject)) {
    const LabelSet* labels = std::get_if<LabelSet>(&value);
    if (!labels || labels->empty()) throw Error(Errc::illegal_value, "qualifier '" + subject + "' expects one or more of its labels");
    for (const auto& l : *labels) {
      if (!q->has_value(l)) throw Error(Errc::illegal_value, "'" + l + "' is not a value of qualifier '" + subject + "'");
    }
    LabelSet ordered;
    for (const auto& v : q->values) {
      if (std::find(labels->begin(), labels->end(), v) != labels->end()) ordered.push_back(v);
    }
    if (!q->multi_select && ordered.size() != 1) throw Error(Errc::illegal_value, "qualifier '" + subject + "' accepts exactly one value");
    return ordered;
  }
  if (const Variable* v = kb.find_variable(subject)) {
    if (v->value_kind == ValueKind::numeric) {
      if (const double* d = std::get_if<double>(&value)) {
        if (!std::isfinite(*d)) throw Error(Errc::illegal_value, "[" + subject + "] needs a finite number");
        return *d;
      }
      throw Error(Errc::illegal_value, "[" + subject + "] needs a numeric value");
    }
    if (const std::string* s = std::get_if<std::string>(&value)) return *s;
    if (const double* d = std::get_if<double>(&value)) return format_number(*d);
    throw Error(Errc::illegal_value, "[" + subject + "] needs a text value");
  }
  throw Error(Errc::illegal_value, "'" + subject + "' cannot be answered");
}

// Text form of an answer as typed on a console or in a script file.
// Qualifiers take labels or 1-based option numbers separated by commas.
inline FactValue parse_answer(const KnowledgeBase& kb, const std::string& subject, std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text == "UNKNOWN") return UnknownValue{};
  if (const Qualifier* q = kb.find_qualifier(subject)) {
    LabelSet labels;
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t comma = text.find(',', start);
      std::string_view part = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      std::string label(part);
      if (!label.empty() && std::all_of(label.begin(), label.end(), [](char c) { return c >= '0' && c <= '9'; }) && !q->has_value(label)) {
        std::size_t index = std::stoul(label);
        if (index >= 1 && index <= q->values.size()) label = q->values[index - 1];
      }
      labels.push_back(label);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return normalize_answer(kb, subject, labels);
  }
  if (const Variable* v = kb.find_variable(subject)) {
    if (v->value_kind == ValueKind::text) return std::string(text);
    std::string s(text);
    char* end = nullptr;
    double d = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw Error(Errc::illegal_value, "'" + s + "' is not a number");
    return normalize_answer(kb, subject, d);
  }
  throw Error(Errc::illegal_value, "'" + subject + "' cannot be answered");
}

inline Question make_question(const KnowledgeBase& kb, int id, const std::string& subject) {
  Question q;
  q.id = id;
  q.subject = subject;
  if (const Qualifier* qual = kb.find_qualifier(subject)) {
    q.kind = SubjectKind::qualifier;
    q.prompt = qual->prompt;
    q.options = qual->values;
    q.multi_select = qual->multi_select;
  } else if (const Variable* v = kb.find_variable(subject)) {
    q.kind = SubjectKind::variable;
    q.value_kind = v->value_kind;
    q.prompt = "please input a value for the variable [" + v->name + "]";
    if (!v->description.empty()) q.prompt += " (" + v->description + ")";
  }
  return q;
}

// ---------------------------------------------------------------------------
// Resolution

namespace detail {

struct Suspend {};

class Runner {
 public:
  explicit Runner(Session& session) : s_(session), kb_(*session.kb) {
    for (std::size_t i = 0; i < kb_.rules.size(); ++i) {
      const Rule& r = kb_.rules[i];
      std::set<std::string> seen;
      for (const auto* part : {&r.then_part, &r.else_part}) {
        for (const auto& c : *part) {
          const std::string& subject = conclusion_subject(c);
          if (seen.insert(subject).second) concluding_[subject].push_back(i);
        }
      }
    }
    rule_state_.assign(kb_.rules.size(), std::nullopt);
  }

  void run() {
    s_.status = SessionStatus::awaiting_answer;
    s_.facts.clear();
    s_.scores.clear();
    for (const auto& c : kb_.choices) s_.scores.push_back(ChoiceScore{c.name, {}, combine_confidences(kb_.mode, std::span<const double>{})});
    s_.decided.clear();
    s_.tried.clear();
    s_.asked.clear();
    s_.pending_question.reset();
    s_.pending_chain.clear();
    s_.trace.clear();
    try {
      for (const auto& goal : s_.goals) {
        emit(TraceKind::goal_started, "", goal);
        if (!resolve_choice(goal)) emit(TraceKind::cycle_detected, "", goal, 0, "goal already in progress");
      }
      s_.status = SessionStatus::finished;
      emit(TraceKind::finished, "", "");
    } catch (const Suspend&) {
      s_.status = SessionStatus::awaiting_answer;
    }
  }

 private:
  enum class Status { holds, fails, cycle };

  struct Frame {
    std::size_t rule;
    std::size_t condition;
    bool else_branch = false;  // `condition` is the one that failed
  };

  void emit(TraceKind kind, std::string rule, std::string subject, int question = 0, std::string detail = {}) {
    TraceEvent e;
    e.seq = static_cast<int>(s_.trace.size()) + 1;
    e.kind = kind;
    e.depth = static_cast<int>(frames_.size());
    e.rule = std::move(rule);
    e.subject = std::move(subject);
    e.question_id = question;
    e.detail = std::move(detail);
    s_.trace.push_back(std::move(e));
  }

  bool in_progress(const std::string& subject) const {
    return std::find(stack_.begin(), stack_.end(), subject) != stack_.end();
  }

  bool rule_on_stack(std::size_t index) const {
    return std::any_of(frames_.begin(), frames_.end(), [&](const Frame& f) { return f.rule == index; });
  }

  const std::vector<std::size_t>& rules_for(const std::string& subject) const {
    static const std::vector<std::size_t> none;
    auto it = concluding_.find(subject);
    return it == concluding_.end() ? none : it->second;
  }

  Fact* fact(const std::string& subject) {
    for (auto& f : s_.facts) if (f.subject == subject) return &f;
    return nullptr;
  }

  ChoiceScore* score(const std::string& choice) {
    for (auto& sc : s_.scores) if (sc.choice == choice) return &sc;
    return nullptr;
  }

  Scalar value_of(const std::string& name) {
    if (const Fact* f = fact(name)) return fact_scalar(f->value);
    if (kb_.find_choice(name)) {
      if (const ChoiceScore* sc = score(name)) return sc->combined.value;
    }
    return UnknownValue{};
  }

  // Returns false when the choice is already being resolved further up.
  bool resolve_choice(const std::string& choice) {
    if (resolved_choices_.count(choice)) return true;
    if (in_progress(choice)) return false;
    stack_.push_back(choice);
    for (std::size_t index : rules_for(choice)) {
      if (rule_state_[index] || rule_on_stack(index)) continue;
      evaluate_rule(index);
    }
    stack_.pop_back();
    resolved_choices_.insert(choice);
    return true;
  }

  // Makes a value available for `subject`: inferred, replayed from the
  // answer script, or published as the pending question.
  Status ensure(const std::string& subject) {
    if (fact(subject)) return Status::holds;
    if (kb_.find_choice(subject)) {
      if (!resolve_choice(subject)) {
        emit(TraceKind::cycle_detected, current_rule(), subject, 0, cycle_path(subject));
        return Status::cycle;
      }
      return Status::holds;
    }
    bool askable = kb_.find_qualifier(subject) || kb_.find_variable(subject);
    if (!askable) return Status::holds;  // undeclared; lookups yield Unknown
    if (in_progress(subject)) {
      emit(TraceKind::cycle_detected, current_rule(), subject, 0, cycle_path(subject));
      return Status::cycle;
    }
    stack_.push_back(subject);
    for (std::size_t index : rules_for(subject)) {
      if (fact(subject)) break;
      if (rule_state_[index] || rule_on_stack(index)) continue;
      evaluate_rule(index);
    }
    stack_.pop_back();
    if (fact(subject)) return Status::holds;
    ask(subject);
    return Status::holds;
  }

  std::string current_rule() const { return frames_.empty() ? std::string() : kb_.rules[frames_.back().rule].name; }

  std::string cycle_path(const std::string& subject) const {
    std::string path;
    auto it = std::find(stack_.begin(), stack_.end(), subject);
    for (; it != stack_.end(); ++it) path += *it + " -> ";
    return path + subject;
  }

  void ask(const std::string& subject) {
    int id = next_question_++;
    for (const auto& a : s_.answers) {
      if (a.subject != subject) continue;
      emit(TraceKind::question_asked, current_rule(), subject, id);
      emit(TraceKind::answered, current_rule(), subject, id, to_string(a.value));
      s_.facts.push_back(Fact{subject, a.value, FromAnswer{id}});
      s_.asked.push_back(AskedQuestion{id, subject, a.value});
      return;
    }
    s_.pending_question = make_question(kb_, id, subject);
    s_.pending_chain = snapshot();
    emit(TraceKind::question_asked, current_rule(), subject, id, "pending");
    throw Suspend{};
  }

  std::vector<SubjectOrigin> origins(const Condition& c) {
    std::vector<SubjectOrigin> out;
    for (const auto& name : condition_subjects(c)) {
      SubjectOrigin so{name, std::nullopt};
      if (const Fact* f = fact(name)) so.origin = f->origin;
      out.push_back(std::move(so));
    }
    return out;
  }

  std::vector<ExplanationNode> snapshot() {
    std::vector<ExplanationNode> chain;
    for (const Frame& f : frames_) {
      const Rule& r = kb_.rules[f.rule];
      ExplanationNode node{r.name, NodeOutcome::pending, {}};
      for (std::size_t j = 0; j < r.premise.size(); ++j) {
        ConditionStatus st = j < f.condition ? ConditionStatus::holds : ConditionStatus::unknown;
        if (j == f.condition && f.else_branch) st = ConditionStatus::fails;
        node.conditions.push_back(ConditionReport{r.premise[j], st, origins(r.premise[j])});
      }
      chain.push_back(std::move(node));
    }
    return chain;
  }

  Status evaluate_condition(const Condition& c) {
    if (const auto* qt = std::get_if<QualifierTest>(&c.form)) {
      Status st = ensure(qt->qualifier);
      if (st == Status::cycle) return st;
      const Fact* f = fact(qt->qualifier);
      return f && qualifier_test_holds(*qt, f->value) ? Status::holds : Status::fails;
    }
    const auto& cmp = std::get<Comparison>(c.form);
    for (const auto& name : condition_subjects(c)) {
      Status st = ensure(name);
      if (st == Status::cycle) return st;
      if (std::holds_alternative<UnknownValue>(value_of(name))) return Status::fails;
    }
    auto lookup = [&](const std::string& name) { return value_of(name); };
    EvalResult l = evaluate_expression(*cmp.lhs, lookup);
    EvalResult r = evaluate_expression(*cmp.rhs, lookup);
    if (l.division_by_zero || r.division_by_zero) {
      emit(TraceKind::division_by_zero, current_rule(), "", 0, to_string(c));
      return Status::fails;
    }
    return compare(l.value, cmp.op, r.value) ? Status::holds : Status::fails;
  }

  void evaluate_rule(std::size_t index) {
    const Rule& rule = kb_.rules[index];
    s_.tried.insert(rule.name);
    emit(TraceKind::rule_tried, rule.name, "");
    frames_.push_back(Frame{index, 0});
    for (std::size_t i = 0; i < rule.premise.size(); ++i) {
      frames_.back().condition = i;
      Status st = evaluate_condition(rule.premise[i]);
      if (st == Status::cycle) {
        frames_.pop_back();
        emit(TraceKind::cycle_detected, rule.name, "", 0, "rule abandoned");
        return;
      }
      if (st == Status::fails) {
        if (rule.else_part.empty()) {
          frames_.pop_back();
          decide(index, RuleResult::not_fired);
          emit(TraceKind::rule_failed, rule.name, "", 0, "condition " + std::to_string(i + 1));
          return;
        }
        frames_.back().else_branch = true;
        fire(index, RuleResult::else_fired);
        frames_.pop_back();
        return;
      }
    }
    frames_.back().condition = rule.premise.size();
    fire(index, RuleResult::then_fired);
    frames_.pop_back();
  }

  void decide(std::size_t index, RuleResult result) {
    rule_state_[index] = result;
    s_.decided[kb_.rules[index].name] = result;
  }

  void fire(std::size_t index, RuleResult result) {
    const Rule& rule = kb_.rules[index];
    decide(index, result);
    emit(TraceKind::rule_fired, rule.name, "", 0, to_string(result));
    const auto& part = result == RuleResult::then_fired ? rule.then_part : rule.else_part;
    for (const auto& c : part) assert_conclusion(rule, c);
  }

  void assert_conclusion(const Rule& rule, const Conclusion& c) {
    if (const auto* ca = std::get_if<ChoiceAssign>(&c.target)) {
      ChoiceScore* sc = score(ca->choice);
      if (!sc) return;
      sc->contributions.push_back(Contribution{rule.name, ca->confidence});
      sc->combined = combine_confidences(kb_.mode, sc->values());
      emit(TraceKind::score_updated, rule.name, ca->choice, 0, format_number(sc->combined.value) + (sc->combined.locked ? " locked" : ""));
      return;
    }
    const std::string& subject = conclusion_subject(c);
    if (fact(subject)) {
      emit(TraceKind::assignment_skipped, rule.name, subject, 0, "already known");
      return;
    }
    if (const auto* qa = std::get_if<QualifierAssign>(&c.target)) {
      s_.facts.push_back(Fact{subject, qa->values, FromRule{rule.name}});
      emit(TraceKind::fact_asserted, rule.name, subject, 0, to_string(FactValue{qa->values}));
      return;
    }
    const auto& va = std::get<VariableAssign>(c.target);
    for (const auto& name : referenced_names(*va.value)) {
      if (ensure(name) == Status::cycle) {
        emit(TraceKind::assignment_skipped, rule.name, subject, 0, "cyclic dependency");
        return;
      }
    }
    auto lookup = [&](const std::string& name) { return value_of(name); };
    EvalResult r = evaluate_expression(*va.value, lookup);
    if (r.division_by_zero) emit(TraceKind::division_by_zero, rule.name, subject, 0, to_string(*va.value));
    const Variable* var = kb_.find_variable(subject);
    FactValue value;
    if (const double* d = std::get_if<double>(&r.value); d && var && var->value_kind == ValueKind::numeric) {
      value = *d;
    } else if (const std::string* t = std::get_if<std::string>(&r.value); t && var && var->value_kind == ValueKind::text) {
      value = *t;
    } else {
      emit(TraceKind::assignment_skipped, rule.name, subject, 0, "value unknown");
      return;
    }
    if (fact(subject)) {
      emit(TraceKind::assignment_skipped, rule.name, subject, 0, "already known");
      return;
    }
    s_.facts.push_back(Fact{subject, value, FromRule{rule.name}});
    emit(TraceKind::fact_asserted, rule.name, subject, 0, to_string(value));
  }

  Session& s_;
  const KnowledgeBase& kb_;
  std::map<std::string, std::vector<std::size_t>> concluding_;
  std::vector<std::optional<RuleResult>> rule_state_;
  std::vector<std::string> stack_;
  std::vector<Frame> frames_;
  std::set<std::string> resolved_choices_;
  int next_question_ = 1;
};

inline void run(Session& session) { Runner(session).run(); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Consultation operations

inline Session start_session(std::shared_ptr<const KnowledgeBase> kb, std::optional<std::vector<std::string>> goals = std::nullopt) {
  if (!kb) throw Error(Errc::invalid_knowledge_base, "no knowledge base");
  auto diagnostics = validate(*kb);
  if (has_errors(diagnostics)) {
    for (const auto& d : diagnostics) {
      if (d.severity == Severity::error) throw Error(Errc::invalid_knowledge_base, to_string(d.kind) + ": " + d.message);
    }
  }
  Session s;
  s.goals = goals && !goals->empty() ? *goals : kb->effective_goals();
  for (const auto& g : s.goals) {
    if (!kb->find_choice(g)) throw Error(Errc::unknown_goal, "'" + g + "' is not a declared choice");
  }
  s.kb = std::move(kb);
  detail::run(s);
  return s;
}

inline Session start_session(KnowledgeBase kb, std::optional<std::vector<std::string>> goals = std::nullopt) {
  return start_session(std::make_shared<const KnowledgeBase>(std::move(kb)), std::move(goals));
}

inline Session& answer(Session& session, int question_id, const FactValue& value) {
  if (session.status != SessionStatus::awaiting_answer || !session.pending_question) {
    throw Error(Errc::stale_question, "the consultation has no pending question");
  }
  if (session.pending_question->id != question_id) {
    throw Error(Errc::stale_question, "question " + std::to_string(question_id) + " is not the pending question " +
                                          std::to_string(session.pending_question->id));
  }
  const std::string subject = session.pending_question->subject;
  FactValue normalized = normalize_answer(*session.kb, subject, value);
  session.answers.push_back(GivenAnswer{subject, std::move(normalized)});
  detail::run(session);
  return session;
}

// Resolves a single choice against the session's current answers without
// touching the session itself.
inline ChoiceScore resolve_goal(const Session& session, const std::string& choice) {
  if (!session.kb->find_choice(choice)) throw Error(Errc::unknown_goal, "'" + choice + "' is not a declared choice");
  Session probe;
  probe.kb = session.kb;
  probe.goals = {choice};
  probe.answers = session.answers;
  detail::run(probe);
  return *probe.find_score(choice);
}

struct Solution {
  std::string choice;
  std::string statement;
  CertaintyValue confidence;
  friend bool operator==(const Solution&, const Solution&) = default;
};

// Scored choices above the mode's display floor, highest first; ties keep
// declaration order.
inline std::vector<Solution> solutions(const Session& session) {
  if (session.status != SessionStatus::finished) throw Error(Errc::not_finished, "the consultation is still awaiting an answer");
  std::vector<Solution> out;
  for (const auto& s : session.scores) {
    if (s.contributions.empty() || !above_display_floor(session.kb->mode.kind, s.combined.value)) continue;
    out.push_back(Solution{s.choice, session.kb->find_choice(s.choice)->statement, s.combined});
  }
  std::stable_sort(out.begin(), out.end(), [](const Solution& a, const Solution& b) { return a.confidence.value > b.confidence.value; });
  return out;
}

}  // namespace ledgermind
