#pragma once

// Reader and canonical writer for the `.kb` knowledge-base language.
//
//   TITLE "Bank credit demo"
//   MODE 0-10
//   QUALIFIER history "The repayment history of the applicant is"
//     1 excellent
//     2 poor
//   VARIABLE [income] NUMERIC "monthly net income"
//   CHOICE grant "Grant the credit"
//   GOAL grant
//   RULE
//     IF history IS excellent
//     AND [income] > 1000
//     THEN grant Confidence=8
//     ELSE grant Confidence=2
//     NOTE "free text"
//     REFERENCE "free text"
//     NAME R1
//
// Layout is free-form: clauses may share a line. `#` starts a comment.

#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ledgermind/error.hpp"
#include "ledgermind/kb_model.hpp"

namespace ledgermind {

struct SourceSpan {
  int line = 1;
  int column = 1;
  int length = 0;
  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

struct ParseError {
  SourceSpan span;
  std::string message;
  std::string expected;
};

inline std::string format_error(const ParseError& e) {
  std::string out = std::to_string(e.span.line) + ":" + std::to_string(e.span.column) + ": " + e.message;
  if (!e.expected.empty()) out += " (expected " + e.expected + ")";
  return out;
}

// Either a value or the full list of errors found in one pass.
template <class T>
class Parsed {
 public:
  Parsed(T value) : state_(std::move(value)) {}  // NOLINT
  Parsed(std::vector<ParseError> errors) : state_(std::move(errors)) {}  // NOLINT

  bool ok() const { return state_.index() == 0; }
  explicit operator bool() const { return ok(); }
  const T& value() const& {
    if (!ok()) throw Error(Errc::parse_failure, format_error(errors().front()));
    return std::get<0>(state_);
  }
  T&& value() && {
    if (!ok()) throw Error(Errc::parse_failure, format_error(errors().front()));
    return std::get<0>(std::move(state_));
  }
  const std::vector<ParseError>& errors() const {
    static const std::vector<ParseError> none;
    return ok() ? none : std::get<1>(state_);
  }

 private:
  std::variant<T, std::vector<ParseError>> state_;
};

namespace detail {

enum class Tok { ident, number, string, var_ref, punct, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;  // identifier, punctuation, unescaped string, or bracketed name
  double number = 0;
  SourceSpan span;
};

inline bool is_ident_start(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; }
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run(std::vector<ParseError>& errors) {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (pos_ >= src_.size()) break;
      SourceSpan start{line_, col_, 0};
      std::size_t begin = pos_;
      char c = src_[pos_];
      Token t;
      if (is_ident_start(c)) {
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
        t.kind = Tok::ident;
        t.text = std::string(src_.substr(begin, pos_ - begin));
        if (t.text == "IS" && src_.substr(pos_, 4) == "-NOT" &&
            (pos_ + 4 >= src_.size() || !is_ident_char(src_[pos_ + 4]))) {
          for (int i = 0; i < 4; ++i) advance();
          t.text = "IS-NOT";
        }
      } else if (is_digit(c) || (c == '.' && pos_ + 1 < src_.size() && is_digit(src_[pos_ + 1]))) {
        while (pos_ < src_.size() && is_digit(src_[pos_])) advance();
        if (pos_ < src_.size() && src_[pos_] == '.') {
          advance();
          while (pos_ < src_.size() && is_digit(src_[pos_])) advance();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
          std::size_t save_pos = pos_;
          int save_col = col_;
          advance();
          if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
          if (pos_ < src_.size() && is_digit(src_[pos_])) {
            while (pos_ < src_.size() && is_digit(src_[pos_])) advance();
          } else {
            pos_ = save_pos;
            col_ = save_col;
          }
        }
        t.kind = Tok::number;
        t.text = std::string(src_.substr(begin, pos_ - begin));
        t.number = std::strtod(t.text.c_str(), nullptr);
      } else if (c == '"') {
        advance();
        std::string value;
        bool closed = false;
        while (pos_ < src_.size() && src_[pos_] != '\n') {
          char d = src_[pos_];
          if (d == '"') {
            advance();
            closed = true;
            break;
          }
          if (d == '\\' && pos_ + 1 < src_.size()) {
            advance();
            char e = src_[pos_];
            value += (e == 'n') ? '\n' : e;
            advance();
            continue;
          }
          value += d;
          advance();
        }
        if (!closed) {
          start.length = col_ - start.column;
          errors.push_back({start, "unterminated string literal", "closing '\"'"});
        }
        t.kind = Tok::string;
        t.text = std::move(value);
      } else if (c == '[') {
        advance();
        std::size_t name_begin = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
        std::string name(src_.substr(name_begin, pos_ - name_begin));
        if (pos_ < src_.size() && src_[pos_] == ']' && !name.empty() && is_ident_start(name[0])) {
          advance();
        } else {
          start.length = std::max(1, col_ - start.column);
          errors.push_back({start, "malformed variable reference", "'[' identifier ']'"});
        }
        t.kind = Tok::var_ref;
        t.text = std::move(name);
      } else {
        static constexpr std::string_view two[] = {"<>", "<=", ">="};
        t.kind = Tok::punct;
        for (auto op : two) {
          if (src_.substr(pos_, 2) == op) {
            t.text = std::string(op);
            advance();
            advance();
            break;
          }
        }
        if (t.text.empty()) {
          if (std::string_view(",+-*/()=<>").find(c) != std::string_view::npos) {
            t.text = std::string(1, c);
            advance();
          } else {
            advance();
            start.length = 1;
            errors.push_back({start, std::string("unexpected character '") + c + "'", ""});
            continue;
          }
        }
      }
      start.length = std::max(1, col_ - start.column);
      t.span = start;
      out.push_back(std::move(t));
    }
    Token end;
    end.kind = Tok::end;
    end.span = SourceSpan{line_, col_, 0};
    out.push_back(end);
    return out;
  }

 private:
  void advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
      ++col_;  // count code points, not continuation bytes
    }
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

inline bool is_top_level(const Token& t) {
  if (t.kind != Tok::ident) return false;
  static constexpr std::string_view words[] = {"TITLE", "MODE", "QUALIFIER", "VARIABLE", "CHOICE", "GOAL", "RULE"};
  for (auto w : words) if (t.text == w) return true;
  return false;
}

inline bool is_reserved(std::string_view word) {
  static constexpr std::string_view words[] = {"TITLE", "MODE", "QUALIFIER", "VARIABLE", "CHOICE", "GOAL", "RULE", "IF", "AND",
                                               "THEN", "ELSE", "NOTE", "REFERENCE", "NAME", "IS", "IS-NOT", "MULTI",
                                               "NUMERIC", "TEXT", "Confidence"};
  for (auto w : words) if (word == w) return true;
  return false;
}

struct Recover {};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::vector<ParseError>& errors) : toks_(std::move(tokens)), errors_(errors) {}

  KnowledgeBase knowledge_base() {
    KnowledgeBase kb;
    bool have_mode = false;
    std::vector<bool> explicit_names;
    while (!at_end()) {
      try {
        const Token& t = peek();
        if (!is_top_level(t)) {
          fail(t, "unexpected '" + describe(t) + "'", "a declaration keyword");
        }
        if (t.text == "TITLE") {
          next();
          kb.title = expect_string("title text");
        } else if (t.text == "MODE") {
          const Token& kw = next();
          if (have_mode) error_at(kw.span, "a knowledge base declares exactly one MODE", "");
          kb.mode = mode();
          have_mode = true;
        } else if (t.text == "QUALIFIER") {
          next();
          kb.qualifiers.push_back(qualifier());
        } else if (t.text == "VARIABLE") {
          next();
          kb.variables.push_back(variable());
        } else if (t.text == "CHOICE") {
          next();
          Choice c;
          c.name = expect_name("choice name");
          c.statement = expect_string("choice statement");
          if (c.statement.empty()) error_at(prev().span, "choice statement must not be empty", "");
          kb.choices.push_back(std::move(c));
        } else if (t.text == "GOAL") {
          next();
          kb.goals.push_back(expect_name("choice name"));
          while (accept_punct(",")) kb.goals.push_back(expect_name("choice name"));
        } else {
          next();
          kb.rules.push_back(rule(kb.rules.size() + 1));
        }
      } catch (const Recover&) {
        synchronize();
      }
    }
    if (!have_mode) error_at(SourceSpan{1, 1, 0}, "knowledge base declares no MODE", "MODE");
    return kb;
  }

  ExprPtr standalone_expression() {
    try {
      ExprPtr e = expression();
      if (!at_end()) fail(peek(), "unexpected '" + describe(peek()) + "' after expression", "operator or end of input");
      return e;
    } catch (const Recover&) {
      return nullptr;
    }
  }

 private:
  // -- token helpers -------------------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& prev() const { return toks_[pos_ == 0 ? 0 : pos_ - 1]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Tok::end; }

  bool is_word(const Token& t, std::string_view w) const { return t.kind == Tok::ident && t.text == w; }
  bool is_punct(const Token& t, std::string_view p) const { return t.kind == Tok::punct && t.text == p; }

  bool accept_word(std::string_view w) {
    if (!is_word(peek(), w)) return false;
    next();
    return true;
  }
  bool accept_punct(std::string_view p) {
    if (!is_punct(peek(), p)) return false;
    next();
    return true;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::end: return "end of input";
      case Tok::string: return quote_text(t.text);
      case Tok::var_ref: return "[" + t.text + "]";
      default: return t.text;
    }
  }

  void error_at(SourceSpan span, std::string message, std::string expected) {
    errors_.push_back(ParseError{span, std::move(message), std::move(expected)});
  }

  [[noreturn]] void fail(const Token& t, std::string message, std::string expected) {
    SourceSpan span = t.span;
    if (t.kind == Tok::end) {
      // Point at the last real character so the span stays inside the source.
      span = pos_ > 0 ? toks_[pos_ - 1].span : SourceSpan{1, 1, 0};
      if (pos_ > 0) {
        span.column += span.length > 0 ? span.length - 1 : 0;
        span.length = span.length > 0 ? 1 : 0;
      }
    }
    error_at(span, std::move(message), std::move(expected));
    throw Recover{};
  }

  void synchronize() {
    if (!at_end()) next();
    while (!at_end() && !is_top_level(peek())) next();
  }

  std::string expect_string(const std::string& what) {
    if (peek().kind != Tok::string) fail(peek(), "expected " + what + ", found '" + describe(peek()) + "'", "quoted text");
    return next().text;
  }

  std::string expect_name(const std::string& what) {
    const Token& t = peek();
    if (t.kind != Tok::ident || is_reserved(t.text)) fail(t, "expected " + what + ", found '" + describe(t) + "'", "identifier");
    return next().text;
  }

  std::string expect_label() {
    const Token& t = peek();
    if (t.kind == Tok::string) return next().text;
    if (t.kind == Tok::ident && !is_reserved(t.text)) return next().text;
    fail(t, "expected a value label, found '" + describe(t) + "'", "identifier or quoted label");
  }

  std::vector<std::string> label_list() {
    std::vector<std::string> labels{expect_label()};
    while (accept_punct(",")) labels.push_back(expect_label());
    return labels;
  }

  // -- declarations ----------------------------------------------------------

  CertaintyMode mode() {
    CertaintyMode m;
    const Token& t = peek();
    if (is_word(t, "YES") && is_punct(peek(1), "/") && is_word(peek(2), "NO")) {
      pos_ += 3;
      m.kind = ModeKind::yes_no;
    } else if (is_word(t, "INCR") && is_punct(peek(1), "/") && is_word(peek(2), "DECR")) {
      pos_ += 3;
      m.kind = ModeKind::incr_decr;
    } else if (is_word(t, "FUZZY")) {
      next();
      m.kind = ModeKind::fuzzy;
    } else if (t.kind == Tok::number && t.text == "0" && is_punct(peek(1), "-") && peek(2).kind == Tok::number && peek(2).text == "10") {
      pos_ += 3;
      m.kind = ModeKind::zero_10;
    } else if (is_punct(t, "-") && peek(1).text == "100" && is_punct(peek(2), "/") && is_punct(peek(3), "+") && peek(4).text == "100") {
      pos_ += 5;
      m.kind = ModeKind::minus100_plus100;
    } else if (is_word(t, "CUSTOM")) {
      next();
      m.kind = ModeKind::custom_formula;
      formula_ = true;
      m.formula = expression();
      formula_ = false;
    } else {
      fail(t, "unknown certainty mode '" + describe(t) + "'", "YES/NO, 0-10, -100/+100, INCR/DECR, CUSTOM <formula> or FUZZY");
    }
    return m;
  }

  Qualifier qualifier() {
    Qualifier q;
    q.name = expect_name("qualifier name");
    if (accept_word("MULTI")) q.multi_select = true;
    q.prompt = expect_string("qualifier prompt");
    if (q.prompt.empty()) error_at(prev().span, "qualifier prompt must not be empty", "");
    int expected_index = 1;
    while (peek().kind == Tok::number) {
      const Token& idx = next();
      if (idx.text != std::to_string(expected_index)) {
        error_at(idx.span, "value lines must be numbered 1, 2, 3, ...", std::to_string(expected_index));
      }
      q.values.push_back(expect_label());
      ++expected_index;
    }
    if (q.values.empty()) fail(peek(), "qualifier '" + q.name + "' declares no values", "numbered value line");
    return q;
  }

  Variable variable() {
    Variable v;
    if (peek().kind != Tok::var_ref) fail(peek(), "expected a bracketed variable name, found '" + describe(peek()) + "'", "[name]");
    v.name = next().text;
    if (accept_word("NUMERIC")) v.value_kind = ValueKind::numeric;
    else if (accept_word("TEXT")) v.value_kind = ValueKind::text;
    else fail(peek(), "expected variable kind, found '" + describe(peek()) + "'", "NUMERIC or TEXT");
    v.description = expect_string("variable description");
    return v;
  }

  Rule rule(std::size_t ordinal) {
    Rule r;
    bool named = false;
    if (peek().kind == Tok::ident && !is_reserved(peek().text)) {
      r.name = next().text;
      named = true;
    }
    if (!is_word(peek(), "IF")) fail(peek(), "rule must start with IF, found '" + describe(peek()) + "'", "IF");
    next();
    r.premise.push_back(condition());
    while (accept_word("AND")) r.premise.push_back(condition());
    if (!is_word(peek(), "THEN")) fail(peek(), "expected THEN, found '" + describe(peek()) + "'", "AND or THEN");
    next();
    r.then_part = conclusions();
    bool have_else = false, have_note = false, have_ref = false, have_name = false;
    while (true) {
      const Token& t = peek();
      auto once = [&](bool& flag) {
        if (flag) fail(t, "duplicate " + t.text + " clause", "");
        flag = true;
        next();
      };
      if (is_word(t, "ELSE")) {
        once(have_else);
        r.else_part = conclusions();
      } else if (is_word(t, "NOTE")) {
        once(have_note);
        r.note = expect_string("note text");
      } else if (is_word(t, "REFERENCE")) {
        once(have_ref);
        r.reference = expect_string("reference text");
      } else if (is_word(t, "NAME")) {
        const Token& kw = t;
        once(have_name);
        std::string name = expect_name("rule name");
        if (named && name != r.name) error_at(kw.span, "NAME '" + name + "' contradicts rule header '" + r.name + "'", "");
        r.name = name;
        named = true;
      } else {
        break;
      }
    }
    if (!at_end() && !is_top_level(peek())) {
      fail(peek(), "unexpected '" + describe(peek()) + "' in rule", "AND, ELSE, NOTE, REFERENCE, NAME or a new declaration");
    }
    if (!named) r.name = "R" + std::to_string(ordinal);
    return r;
  }

  Condition condition() {
    const Token& t = peek();
    if (t.kind == Tok::ident && !is_reserved(t.text)) {
      QualifierTest qt;
      qt.qualifier = next().text;
      if (accept_word("IS")) qt.negated = false;
      else if (accept_word("IS-NOT")) qt.negated = true;
      else fail(peek(), "expected IS or IS-NOT after qualifier '" + qt.qualifier + "'", "IS or IS-NOT");
      qt.values = label_list();
      return Condition{qt};
    }
    Comparison cmp;
    cmp.lhs = expression();
    const Token& op = peek();
    static const std::pair<std::string_view, CompareOp> ops[] = {
        {"=", CompareOp::eq}, {"<>", CompareOp::ne}, {"<", CompareOp::lt}, {"<=", CompareOp::le}, {">", CompareOp::gt}, {">=", CompareOp::ge}};
    bool found = false;
    for (const auto& [text, value] : ops) {
      if (is_punct(op, text)) {
        cmp.op = value;
        found = true;
      }
    }
    if (!found) fail(op, "expected a comparison operator, found '" + describe(op) + "'", "=, <>, <, <=, > or >=");
    next();
    cmp.rhs = expression();
    return Condition{cmp};
  }

  std::vector<Conclusion> conclusions() {
    std::vector<Conclusion> out{conclusion()};
    while (accept_word("AND")) out.push_back(conclusion());
    return out;
  }

  Conclusion conclusion() {
    const Token& t = peek();
    if (t.kind == Tok::var_ref) {
      VariableAssign va;
      va.variable = next().text;
      if (!accept_punct("=")) fail(peek(), "expected '=' after [" + va.variable + "]", "=");
      va.value = expression();
      return Conclusion{va};
    }
    std::string name = expect_name("choice, qualifier or [variable]");
    if (accept_word("IS")) {
      QualifierAssign qa;
      qa.qualifier = std::move(name);
      qa.values = label_list();
      return Conclusion{qa};
    }
    if (is_word(peek(), "Confidence")) {
      const Token& kw = next();
      SourceSpan span = kw.span;
      if (!is_punct(peek(), "=")) {
        error_at(span, "expected '=' after Confidence", "Confidence=<n>");
        throw Recover{};
      }
      const Token& eq = next();
      span.length = eq.span.column + eq.span.length - span.column;
      ChoiceAssign ca;
      ca.choice = std::move(name);
      double sign = 1;
      if (accept_punct("-")) sign = -1;
      else accept_punct("+");
      if (peek().kind == Tok::number) {
        ca.confidence = sign * next().number;
      } else if (sign == 1 && (is_word(peek(), "YES") || is_word(peek(), "NO"))) {
        ca.confidence = next().text == "YES" ? 1 : 0;
      } else {
        error_at(span, "Confidence= needs a number", "number, YES or NO");
        throw Recover{};
      }
      return Conclusion{ca};
    }
    fail(peek(), "expected IS or Confidence= after '" + name + "'", "IS or Confidence=");
  }

  // -- expressions -------------------------------------------------------------

  ExprPtr expression() {
    ExprPtr lhs = term();
    while (is_punct(peek(), "+") || is_punct(peek(), "-")) {
      BinaryOp op = next().text == "+" ? BinaryOp::add : BinaryOp::subtract;
      lhs = make_binary(op, lhs, term());
    }
    return lhs;
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    while (is_punct(peek(), "*") || is_punct(peek(), "/")) {
      BinaryOp op = next().text == "*" ? BinaryOp::multiply : BinaryOp::divide;
      lhs = make_binary(op, lhs, unary());
    }
    return lhs;
  }

  ExprPtr unary() {
    if (accept_punct("-")) return make_negate(unary());
    return primary();
  }

  ExprPtr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::number: next(); return make_number(t.number);
      case Tok::string: next(); return make_text(t.text);
      case Tok::var_ref:
        if (formula_) fail(t, "custom formulas reference only PREV and NEW", "PREV or NEW");
        next();
        return make_var(t.text);
      case Tok::ident:
        if (formula_ && (t.text == "PREV" || t.text == "NEW")) {
          next();
          return make_var(t.text);
        }
        break;
      case Tok::punct:
        if (t.text == "(") {
          next();
          ExprPtr inner = expression();
          if (!accept_punct(")")) fail(peek(), "expected ')'", ")");
          return inner;
        }
        break;
      case Tok::end: break;
    }
    fail(t, "expected an operand, found '" + describe(t) + "'", "number, text, [variable], '-' or '('");
  }

  std::vector<Token> toks_;
  std::vector<ParseError>& errors_;
  std::size_t pos_ = 0;
  bool formula_ = false;
};

inline std::string label_text(const std::string& label) {
  bool bare = !label.empty() && is_ident_start(label[0]) && !is_reserved(label);
  for (char c : label) bare = bare && is_ident_char(c);
  return bare ? label : quote_text(label);
}

inline std::string labels_text(const std::vector<std::string>& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ", ";
    out += label_text(labels[i]);
  }
  return out;
}

}  // namespace detail

inline Parsed<KnowledgeBase> parse_kb(std::string_view source) {
  std::vector<ParseError> errors;
  auto tokens = detail::Lexer(source).run(errors);
  KnowledgeBase kb = detail::Parser(std::move(tokens), errors).knowledge_base();
  if (!errors.empty()) return errors;
  return kb;
}

inline Parsed<ExprPtr> parse_expression(std::string_view source) {
  std::vector<ParseError> errors;
  auto tokens = detail::Lexer(source).run(errors);
  ExprPtr e = detail::Parser(std::move(tokens), errors).standalone_expression();
  if (!errors.empty() || !e) return errors;
  return e;
}

inline std::string to_string(const Condition& c) {
  if (const auto* qt = std::get_if<QualifierTest>(&c.form)) {
    return qt->qualifier + (qt->negated ? " IS-NOT " : " IS ") + detail::labels_text(qt->values);
  }
  const auto& cmp = std::get<Comparison>(c.form);
  return to_string(*cmp.lhs) + " " + to_string(cmp.op) + " " + to_string(*cmp.rhs);
}

inline std::string to_string(const Conclusion& c, ModeKind mode) {
  return std::visit(
      [&](const auto& t) -> std::string {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, ChoiceAssign>) {
          if (mode == ModeKind::yes_no && (t.confidence == 0 || t.confidence == 1)) {
            return t.choice + " Confidence=" + (t.confidence == 1 ? "YES" : "NO");
          }
          return t.choice + " Confidence=" + format_number(t.confidence);
        } else if constexpr (std::is_same_v<T, QualifierAssign>) {
          return t.qualifier + " IS " + detail::labels_text(t.values);
        } else {
          return "[" + t.variable + "] = " + to_string(*t.value);
        }
      },
      c.target);
}

inline std::string mode_text(const CertaintyMode& mode) {
  if (mode.kind == ModeKind::custom_formula) return "CUSTOM " + (mode.formula ? to_formula_string(*mode.formula) : std::string("NEW"));
  return mode_name(mode.kind);
}

// Canonical text: sections in fixed order, rules as authored, one clause per line.
inline std::string serialize_kb(const KnowledgeBase& kb) {
  std::string out;
  if (!kb.title.empty()) out += "TITLE " + quote_text(kb.title) + "\n";
  out += "MODE " + mode_text(kb.mode) + "\n";
  if (!kb.qualifiers.empty()) out += "\n";
  for (const auto& q : kb.qualifiers) {
    out += "QUALIFIER " + q.name + (q.multi_select ? " MULTI " : " ") + quote_text(q.prompt) + "\n";
    for (std::size_t i = 0; i < q.values.size(); ++i) {
      out += "  " + std::to_string(i + 1) + " " + detail::label_text(q.values[i]) + "\n";
    }
  }
  if (!kb.variables.empty()) out += "\n";
  for (const auto& v : kb.variables) {
    out += "VARIABLE [" + v.name + "] " + (v.value_kind == ValueKind::numeric ? "NUMERIC " : "TEXT ") + quote_text(v.description) + "\n";
  }
  if (!kb.choices.empty()) out += "\n";
  for (const auto& c : kb.choices) out += "CHOICE " + c.name + " " + quote_text(c.statement) + "\n";
  if (!kb.goals.empty()) {
    out += "\nGOAL ";
    for (std::size_t i = 0; i < kb.goals.size(); ++i) out += (i ? ", " : "") + kb.goals[i];
    out += "\n";
  }
  for (const auto& r : kb.rules) {
    out += "\nRULE\n";
    for (std::size_t i = 0; i < r.premise.size(); ++i) out += (i ? "  AND " : "  IF ") + to_string(r.premise[i]) + "\n";
    for (std::size_t i = 0; i < r.then_part.size(); ++i) out += (i ? "  AND " : "  THEN ") + to_string(r.then_part[i], kb.mode.kind) + "\n";
    for (std::size_t i = 0; i < r.else_part.size(); ++i) out += (i ? "  AND " : "  ELSE ") + to_string(r.else_part[i], kb.mode.kind) + "\n";
    if (r.note) out += "  NOTE " + quote_text(*r.note) + "\n";
    if (r.reference) out += "  REFERENCE " + quote_text(*r.reference) + "\n";
    out += "  NAME " + r.name + "\n";
  }
  return out;
}

}  // namespace ledgermind
