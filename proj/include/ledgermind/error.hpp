#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ledgermind {

enum class Errc {
  // knowledge base / consultation
  invalid_knowledge_base,
  unknown_goal,
  stale_question,
  illegal_value,
  not_finished,
  no_pending_question,
  rule_not_in_trace,
  unknown_question,
  out_of_range,
  // valuation
  negative_component,
  fraction_out_of_range,
  insufficient_quantity,
  over_depreciated,
  period_inconsistent,
  invalid_number,
  // plumbing
  io_error,
  parse_failure,
  unknown_session,
  unknown_knowledge_base,
  corrupt_log,
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_knowledge_base: return "InvalidKnowledgeBase";
    case Errc::unknown_goal: return "UnknownGoal";
    case Errc::stale_question: return "StaleQuestion";
    case Errc::illegal_value: return "IllegalValue";
    case Errc::not_finished: return "NotFinished";
    case Errc::no_pending_question: return "NoPendingQuestion";
    case Errc::rule_not_in_trace: return "RuleNotInTrace";
    case Errc::unknown_question: return "UnknownQuestion";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::negative_component: return "NegativeComponent";
    case Errc::fraction_out_of_range: return "FractionOutOfRange";
    case Errc::insufficient_quantity: return "InsufficientQuantity";
    case Errc::over_depreciated: return "OverDepreciated";
    case Errc::period_inconsistent: return "PeriodInconsistent";
    case Errc::invalid_number: return "InvalidNumber";
    case Errc::io_error: return "IoError";
    case Errc::parse_failure: return "ParseFailure";
    case Errc::unknown_session: return "UnknownSession";
    case Errc::unknown_knowledge_base: return "UnknownKnowledgeBase";
    case Errc::corrupt_log: return "CorruptLog";
  }
  return "Unknown";
}

// Every failure surfaced by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ledgermind
