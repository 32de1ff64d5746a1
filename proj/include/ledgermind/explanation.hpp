#pragma once

// WHY chains, condition provenance ("?" on a rule), expression drill-down
// and what-if revision of earlier answers.

#include <string>
#include <utility>
#include <vector>

#include "ledgermind/engine.hpp"

namespace ledgermind {

// The sub-goal stack behind the pending question, outermost goal's rule
// first, ending at the rule whose condition raised the question.
inline const std::vector<ExplanationNode>& why(const Session& session) {
  if (session.status != SessionStatus::awaiting_answer || !session.pending_question) {
    throw Error(Errc::no_pending_question, "the consultation has no pending question");
  }
  return session.pending_chain;
}

namespace detail {

inline ConditionStatus condition_status(const Session& session, const Condition& c) {
  if (const auto* qt = std::get_if<QualifierTest>(&c.form)) {
    const Fact* f = session.find_fact(qt->qualifier);
    if (!f) return ConditionStatus::unknown;
    return qualifier_test_holds(*qt, f->value) ? ConditionStatus::holds : ConditionStatus::fails;
  }
  for (const auto& name : condition_subjects(c)) {
    bool is_choice = session.kb->find_choice(name) != nullptr;
    if (!is_choice && !session.find_fact(name)) return ConditionStatus::unknown;
    if (std::holds_alternative<UnknownValue>(session_value(session, name))) return ConditionStatus::fails;
  }
  const auto& cmp = std::get<Comparison>(c.form);
  EvalResult l = evaluate_expression(*cmp.lhs, session);
  EvalResult r = evaluate_expression(*cmp.rhs, session);
  if (l.division_by_zero || r.division_by_zero) return ConditionStatus::fails;
  return compare(l.value, cmp.op, r.value) ? ConditionStatus::holds : ConditionStatus::fails;
}

}  // namespace detail

// Per-condition provenance of a rule the latest run has visited.
inline ExplanationNode explain_rule(const Session& session, const std::string& rule_name) {
  const Rule* rule = session.kb->find_rule(rule_name);
  if (!rule || !session.tried.count(rule_name)) {
    throw Error(Errc::rule_not_in_trace, "rule '" + rule_name + "' was not used in this consultation");
  }
  ExplanationNode node{rule_name, NodeOutcome::pending, {}};
  if (auto it = session.decided.find(rule_name); it != session.decided.end()) {
    switch (it->second) {
      case RuleResult::then_fired: node.outcome = NodeOutcome::then_fired; break;
      case RuleResult::else_fired: node.outcome = NodeOutcome::else_fired; break;
      case RuleResult::not_fired: node.outcome = NodeOutcome::not_fired; break;
    }
  }
  for (const auto& c : rule->premise) {
    ConditionReport report{c, detail::condition_status(session, c), {}};
    for (const auto& name : condition_subjects(c)) {
      SubjectOrigin so{name, std::nullopt};
      if (const Fact* f = session.find_fact(name)) so.origin = f->origin;
      report.origins.push_back(std::move(so));
    }
    node.conditions.push_back(std::move(report));
  }
  return node;
}

// Every name the expression references, once each, with its current value.
inline std::vector<std::pair<std::string, Scalar>> explain_expression(const Session& session, const Expression& expr) {
  std::vector<std::pair<std::string, Scalar>> out;
  for (const auto& name : referenced_names(expr)) out.emplace_back(name, session_value(session, name));
  return out;
}

// Replaces the answer given to `question_id` and replays the consultation.
// Answers to subjects the new run still needs are reused; newly needed
// subjects become questions again.
inline Session& revise_answer(Session& session, int question_id, const FactValue& new_value) {
  const AskedQuestion* asked = nullptr;
  for (const auto& a : session.asked) {
    if (a.id == question_id) asked = &a;
  }
  if (!asked) throw Error(Errc::unknown_question, "question " + std::to_string(question_id) + " has not been answered");
  const std::string subject = asked->subject;
  FactValue normalized = normalize_answer(*session.kb, subject, new_value);
  for (auto& given : session.answers) {
    if (given.subject == subject) given.value = normalized;
  }
  session.history.push_back(std::move(session.trace));
  session.trace.clear();
  detail::run(session);
  return session;
}

// -- text rendering shared by the console and the service -------------------

inline std::string describe_origin(const std::optional<FactOrigin>& origin) {
  if (!origin) return "Unresolved";
  if (const auto* a = std::get_if<FromAnswer>(&*origin)) return "UserAnswer(question " + std::to_string(a->question_id) + ")";
  return "RuleConclusion(" + std::get<FromRule>(*origin).rule + ")";
}

inline std::string render_node(const KnowledgeBase& kb, const ExplanationNode& node) {
  std::string out = "RULE " + node.rule + " [" + to_string(node.outcome) + "]\n";
  for (std::size_t i = 0; i < node.conditions.size(); ++i) {
    const auto& c = node.conditions[i];
    out += "  " + std::to_string(i + 1) + ". " + std::string(i ? "AND " : "IF ") + to_string(c.condition) + "  -> " + to_string(c.status);
    for (const auto& o : c.origins) out += " | " + o.subject + ": " + describe_origin(o.origin);
    out += "\n";
  }
  if (const Rule* r = kb.find_rule(node.rule)) {
    if (r->note) out += "  NOTE " + *r->note + "\n";
    if (r->reference) out += "  REFERENCE " + *r->reference + "\n";
  }
  return out;
}

}  // namespace ledgermind
