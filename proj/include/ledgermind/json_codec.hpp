#pragma once

// JSON shapes shared by the session log and the wire API.

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "ledgermind/engine.hpp"
#include "ledgermind/explanation.hpp"
#include "ledgermind/kb_parser.hpp"

namespace ledgermind::codec {

using nlohmann::json;

inline json encode_value(const FactValue& v) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, LabelSet>) return json(x);
        else if constexpr (std::is_same_v<T, double>) return json(x);
        else if constexpr (std::is_same_v<T, std::string>) return json(x);
        else return json("UNKNOWN");
      },
      v);
}

// Interprets a wire value for `subject`. Strings for qualifiers follow the
// console syntax (comma-separated labels or option numbers).
inline FactValue decode_value(const KnowledgeBase& kb, const std::string& subject, const json& j) {
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    if (s == "UNKNOWN") return UnknownValue{};
    if (kb.find_variable(subject) && kb.find_variable(subject)->value_kind == ValueKind::text) return normalize_answer(kb, subject, s);
    return parse_answer(kb, subject, s);
  }
  if (j.is_number()) return normalize_answer(kb, subject, j.get<double>());
  if (j.is_array()) {
    LabelSet labels;
    for (const auto& e : j) {
      if (!e.is_string()) throw Error(Errc::illegal_value, "label lists hold strings");
      labels.push_back(e.get<std::string>());
    }
    return normalize_answer(kb, subject, labels);
  }
  throw Error(Errc::illegal_value, "unsupported answer value " + j.dump());
}

inline json encode_question(const Question& q) {
  json j = {{"id", q.id}, {"subject", q.subject}, {"prompt", q.prompt}};
  if (q.kind == SubjectKind::qualifier) {
    j["kind"] = "qualifier";
    j["options"] = q.options;
    j["multi_select"] = q.multi_select;
  } else {
    j["kind"] = "variable";
    j["options"] = q.value_kind == ValueKind::numeric ? "numeric" : "text";
  }
  return j;
}

inline json encode_origin(const std::optional<FactOrigin>& origin) {
  if (!origin) return {{"kind", "Unresolved"}};
  if (const auto* a = std::get_if<FromAnswer>(&*origin)) return {{"kind", "UserAnswer"}, {"question_id", a->question_id}};
  return {{"kind", "RuleConclusion"}, {"rule", std::get<FromRule>(*origin).rule}};
}

inline json encode_node(const ExplanationNode& node) {
  json conditions = json::array();
  for (const auto& c : node.conditions) {
    json origins = json::array();
    for (const auto& o : c.origins) {
      json e = encode_origin(o.origin);
      e["subject"] = o.subject;
      origins.push_back(e);
    }
    conditions.push_back({{"condition", to_string(c.condition)}, {"status", to_string(c.status)}, {"origins", origins}});
  }
  return {{"rule", node.rule}, {"outcome", to_string(node.outcome)}, {"conditions", conditions}};
}

inline json encode_solutions(const std::vector<Solution>& solutions, ModeKind mode) {
  json out = json::array();
  for (const auto& s : solutions) {
    out.push_back({{"choice", s.choice},
                   {"statement", s.statement},
                   {"confidence", s.confidence.value},
                   {"locked", s.confidence.locked},
                   {"mode", mode_name(mode)}});
  }
  return out;
}

inline ModeKind decode_mode(const std::string& name) {
  for (ModeKind k : {ModeKind::yes_no, ModeKind::zero_10, ModeKind::minus100_plus100, ModeKind::incr_decr, ModeKind::custom_formula, ModeKind::fuzzy}) {
    if (mode_name(k) == name) return k;
  }
  throw Error(Errc::parse_failure, "unknown mode '" + name + "'");
}

inline std::vector<Solution> decode_solutions(const json& j) {
  std::vector<Solution> out;
  for (const auto& e : j) {
    Solution s;
    s.choice = e.at("choice").get<std::string>();
    s.statement = e.at("statement").get<std::string>();
    s.confidence.mode = decode_mode(e.at("mode").get<std::string>());
    s.confidence.value = e.at("confidence").get<double>();
    s.confidence.locked = e.value("locked", false);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ledgermind::codec
