#pragma once

// Console front ends: `check` and the interactive or scripted consultation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ledgermind/engine.hpp"
#include "ledgermind/explanation.hpp"
#include "ledgermind/kb_parser.hpp"

namespace ledgermind {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int parse_error = 1;
inline constexpr int diagnostics = 2;
inline constexpr int io_error = 3;
inline constexpr int script_exhausted = 4;
}  // namespace exit_code

inline std::optional<std::string> read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return buf.str();
}

inline std::string format_diagnostic(const std::string& file, const Diagnostic& d) {
  std::string out = file + ": " + (d.severity == Severity::error ? "error" : "warning") + " " + to_string(d.kind);
  if (!d.rule.empty()) out += " (rule " + d.rule + ")";
  return out + ": " + d.message;
}

inline int cli_check(const std::filesystem::path& path, std::ostream& out, std::ostream& err) {
  auto text = read_text_file(path);
  if (!text) {
    err << "error: cannot read " << path.string() << "\n";
    return exit_code::io_error;
  }
  auto parsed = parse_kb(*text);
  if (!parsed.ok()) {
    for (const auto& e : parsed.errors()) err << path.string() << ":" << format_error(e) << "\n";
    return exit_code::parse_error;
  }
  auto diags = validate(parsed.value());
  if (!diags.empty()) {
    for (const auto& d : diags) err << format_diagnostic(path.string(), d) << "\n";
    return exit_code::diagnostics;
  }
  const auto& kb = parsed.value();
  out << path.string() << ": ok (" << kb.qualifiers.size() << " qualifiers, " << kb.variables.size() << " variables, "
      << kb.choices.size() << " choices, " << kb.rules.size() << " rules, mode " << mode_name(kb.mode.kind) << ")\n";
  return exit_code::ok;
}

inline std::string format_question(const Question& q) {
  std::string out = "Q" + std::to_string(q.id) + ": " + q.prompt + "\n";
  if (q.kind == SubjectKind::qualifier) {
    for (std::size_t i = 0; i < q.options.size(); ++i) out += "  " + std::to_string(i + 1) + " " + q.options[i] + "\n";
    if (q.multi_select) out += "  (one or more, separated by commas)\n";
  }
  return out;
}

inline std::string format_solutions(const std::vector<Solution>& list) {
  if (list.empty()) return "No recommendation reached.\n";
  std::string out = "Solutions:\n";
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& s = list[i];
    out += "  " + std::to_string(i + 1) + ". " + s.choice + ": " + s.statement + "  Confidence=" +
           format_confidence(s.confidence.mode, s.confidence.value) + "\n";
  }
  return out;
}

inline std::string format_derived(const Session& session) {
  std::string out;
  for (const auto& f : session.facts) {
    if (!std::holds_alternative<FromRule>(f.origin) || !session.kb->find_variable(f.subject)) continue;
    out += "  [" + f.subject + "] = " + to_string(f.value) + "  (" + std::get<FromRule>(f.origin).rule + ")\n";
  }
  return out.empty() ? out : "Derived values:\n" + out;
}

struct RunOptions {
  std::vector<std::string> goals;
  bool trace = false;
  bool scripted = false;  // commands come from a file, so echo them
};

namespace detail {

inline std::string trim_copy(std::string s) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && ws(s[i])) ++i;
  return s.substr(i);
}

inline void print_why(const Session& s, std::ostream& out) {
  const auto& chain = why(s);
  out << "Reasoning chain (" << chain.size() << (chain.size() == 1 ? " rule" : " rules") << "):\n";
  for (const auto& node : chain) out << render_node(*s.kb, node);
}

inline void print_drill_down(const Session& s, const std::string& arg, std::ostream& out) {
  if (s.kb->find_rule(arg)) {
    out << render_node(*s.kb, explain_rule(s, arg));
    return;
  }
  auto expr = parse_expression(arg);
  if (!expr.ok()) throw Error(Errc::rule_not_in_trace, "'" + arg + "' is neither a rule nor an expression");
  auto values = explain_expression(s, *expr.value());
  if (values.empty()) out << "  (no variables)\n";
  for (const auto& [name, v] : values) out << "  [" << name << "] = " << to_string(v) << "\n";
}

}  // namespace detail

// Runs a consultation reading answers and commands from `in`, one per line:
//   <answer>               labels or option numbers, a number, text, UNKNOWN
//   why                    the chain of rules behind the pending question
//   ? <rule>               condition provenance of a rule
//   ? <expression>         current values of the expression's variables
//   revise <qid> <answer>  what-if change of an earlier answer
//   solutions              re-print the ranking
// End of input while a question is pending returns exit code 4.
inline int cli_run(std::shared_ptr<const KnowledgeBase> kb, const RunOptions& options, std::istream& in, std::ostream& out) {
  Session session;
  try {
    session = start_session(kb, options.goals.empty() ? std::nullopt : std::optional(options.goals));
  } catch (const Error& e) {
    out << e.what() << "\n";
    return exit_code::diagnostics;
  }
  if (!kb->title.empty()) out << kb->title << "\n\n";

  bool reported = false;
  auto report = [&] {
    if (session.status == SessionStatus::finished && !reported) {
      out << format_solutions(solutions(session));
      out << format_derived(session);
      reported = true;
    }
    if (session.pending_question) {
      reported = false;
      out << format_question(*session.pending_question);
    }
  };
  report();

  std::string line;
  while (true) {
    if (!options.scripted) out << "> " << std::flush;
    if (!std::getline(in, line)) break;
    line = detail::trim_copy(line);
    if (line.empty() || line[0] == '#') continue;
    if (options.scripted) out << "> " << line << "\n";
    try {
      if (line == "why") {
        detail::print_why(session, out);
      } else if (line[0] == '?') {
        detail::print_drill_down(session, detail::trim_copy(line.substr(1)), out);
      } else if (line == "solutions") {
        out << format_solutions(solutions(session));
      } else if (line.rfind("revise ", 0) == 0) {
        std::istringstream args(line.substr(7));
        int qid = 0;
        if (!(args >> qid)) throw Error(Errc::unknown_question, "usage: revise <question id> <answer>");
        std::string rest;
        std::getline(args, rest);
        const AskedQuestion* asked = nullptr;
        for (const auto& a : session.asked) {
          if (a.id == qid) asked = &a;
        }
        if (!asked) throw Error(Errc::unknown_question, "question " + std::to_string(qid) + " has not been answered");
        revise_answer(session, qid, parse_answer(*kb, asked->subject, detail::trim_copy(rest)));
        reported = false;
        report();
      } else if (session.pending_question) {
        answer(session, session.pending_question->id, parse_answer(*kb, session.pending_question->subject, line));
        report();
      } else {
        throw Error(Errc::stale_question, "no question is pending");
      }
    } catch (const Error& e) {
      out << e.what() << "\n";
    }
  }

  if (options.trace) {
    out << "Trace:\n";
    for (const auto& e : session.trace) out << "  " << to_string(e) << "\n";
  }
  if (session.status != SessionStatus::finished) {
    out << "Input ended with question " << session.pending_question->id << " pending: " << session.pending_question->prompt << "\n";
    return exit_code::script_exhausted;
  }
  return exit_code::ok;
}

inline int cli_run(const std::filesystem::path& path, const RunOptions& options, std::istream& in, std::ostream& out, std::ostream& err) {
  auto text = read_text_file(path);
  if (!text) {
    err << "error: cannot read " << path.string() << "\n";
    return exit_code::io_error;
  }
  auto parsed = parse_kb(*text);
  if (!parsed.ok()) {
    for (const auto& e : parsed.errors()) err << path.string() << ":" << format_error(e) << "\n";
    return exit_code::parse_error;
  }
  auto diags = validate(parsed.value());
  if (has_errors(diags)) {
    for (const auto& d : diags) err << format_diagnostic(path.string(), d) << "\n";
    return exit_code::diagnostics;
  }
  return cli_run(std::make_shared<const KnowledgeBase>(parsed.value()), options, in, out);
}

}  // namespace ledgermind
