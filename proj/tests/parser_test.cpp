#include <gtest/gtest.h>

#include "generators.hpp"
#include "ledgermind/kb_parser.hpp"

using namespace ledgermind;

namespace {

KnowledgeBase parse_ok(std::string_view src) {
  auto p = parse_kb(src);
  if (!p.ok()) {
    std::string all;
    for (const auto& e : p.errors()) all += format_error(e) + "\n";
    ADD_FAILURE() << all;
    return {};
  }
  return p.value();
}

int line_count(std::string_view s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')) + 1; }

}  // namespace

TEST(ParseKb, MinimalKb) {
  auto kb = parse_ok("MODE 0-10\nCHOICE c \"Grant credit\"\nRULE r1 IF [x] > 1 THEN c Confidence=8\n");
  ASSERT_EQ(kb.rules.size(), 1u);
  ASSERT_EQ(kb.choices.size(), 1u);
  EXPECT_EQ(kb.rules[0].name, "r1");
  EXPECT_EQ(kb.mode.kind, ModeKind::zero_10);
  const auto& cmp = std::get<Comparison>(kb.rules[0].premise[0].form);
  EXPECT_EQ(cmp.op, CompareOp::gt);
  EXPECT_EQ(std::get<ChoiceAssign>(kb.rules[0].then_part[0].target).confidence, 8);
}

TEST(ParseKb, AllSixRuleComponents) {
  auto kb = parse_ok(R"(MODE 0-10
QUALIFIER h "History is"
  1 good
  2 bad
CHOICE yes_c "Yes"
CHOICE no_c "No"
RULE
  IF h IS good
  THEN yes_c Confidence=9
  ELSE no_c Confidence=3
  NOTE "Good payers repay."
  REFERENCE "Credit manual, ch. 2"
  NAME history_rule
)");
  ASSERT_EQ(kb.rules.size(), 1u);
  const Rule& r = kb.rules[0];
  EXPECT_EQ(r.name, "history_rule");
  EXPECT_EQ(r.note, "Good payers repay.");
  EXPECT_EQ(r.reference, "Credit manual, ch. 2");
  EXPECT_EQ(r.else_part.size(), 1u);
}

TEST(ParseKb, MissingConfidenceNumberPointsAtKeyword) {
  std::string src = "MODE 0-10\nCHOICE c \"C\"\nRULE IF [x] > 1 THEN c Confidence=\n";
  auto p = parse_kb(src);
  ASSERT_FALSE(p.ok());
  const auto& e = p.errors().front();
  EXPECT_EQ(e.span.line, 3);
  EXPECT_EQ(src.substr(src.find("Confidence="), static_cast<std::size_t>(e.span.length)), "Confidence=");
  EXPECT_EQ(e.span.column, static_cast<int>(std::string("RULE IF [x] > 1 THEN c ").size()) + 1);
}

TEST(ParseKb, RecoversAndReportsSeveralErrors) {
  auto p = parse_kb("MODE 0-10\nCHOICE \"no name\"\nCHOICE ok \"fine\"\nRULE IF THEN ok Confidence=1\nVARIABLE [v] BOGUS \"d\"\n");
  ASSERT_FALSE(p.ok());
  EXPECT_GE(p.errors().size(), 3u);
  EXPECT_THROW(p.value(), Error);
}

TEST(ParseKb, ModeErrors) {
  EXPECT_FALSE(parse_kb("CHOICE c \"C\"\n").ok());
  EXPECT_FALSE(parse_kb("MODE 0-10\nMODE FUZZY\n").ok());
  EXPECT_FALSE(parse_kb("MODE 0-11\n").ok());
}

TEST(ParseKb, ModeSpellings) {
  EXPECT_EQ(parse_ok("MODE YES/NO\n").mode.kind, ModeKind::yes_no);
  EXPECT_EQ(parse_ok("MODE 0-10\n").mode.kind, ModeKind::zero_10);
  EXPECT_EQ(parse_ok("MODE -100/+100\n").mode.kind, ModeKind::minus100_plus100);
  EXPECT_EQ(parse_ok("MODE INCR/DECR\n").mode.kind, ModeKind::incr_decr);
  EXPECT_EQ(parse_ok("MODE FUZZY\n").mode.kind, ModeKind::fuzzy);
  auto custom = parse_ok("MODE CUSTOM (PREV + NEW) / 2\n");
  EXPECT_EQ(custom.mode.kind, ModeKind::custom_formula);
  EXPECT_EQ(to_formula_string(*custom.mode.formula), "(PREV + NEW) / 2");
  EXPECT_FALSE(parse_kb("MODE CUSTOM PREV + [x]\n").ok());
}

TEST(ParseKb, YesNoSugar) {
  auto kb = parse_ok("MODE YES/NO\nCHOICE c \"C\"\nRULE IF [x] > 1 THEN c Confidence=YES ELSE c Confidence=NO\n");
  EXPECT_EQ(std::get<ChoiceAssign>(kb.rules[0].then_part[0].target).confidence, 1);
  EXPECT_EQ(std::get<ChoiceAssign>(kb.rules[0].else_part[0].target).confidence, 0);
}

TEST(ParseKb, CommentsAndDecimals) {
  auto kb = parse_ok("# header\nMODE 0-10 # trailing\nCHOICE c \"C # not a comment\"\nRULE IF [x] >= 1.5 THEN c Confidence=7.25\n");
  EXPECT_EQ(kb.choices[0].statement, "C # not a comment");
  EXPECT_EQ(std::get<ChoiceAssign>(kb.rules[0].then_part[0].target).confidence, 7.25);
}

TEST(ParseKb, QualifierTestsAndValueLines) {
  auto kb = parse_ok(R"(MODE 0-10
QUALIFIER colour MULTI "The colours are"
  1 red
  2 "dark blue"
  3 green
CHOICE c "C"
RULE IF colour IS-NOT red, "dark blue" THEN c Confidence=2 NAME x
)");
  EXPECT_TRUE(kb.qualifiers[0].multi_select);
  EXPECT_EQ(kb.qualifiers[0].values, (std::vector<std::string>{"red", "dark blue", "green"}));
  const auto& qt = std::get<QualifierTest>(kb.rules[0].premise[0].form);
  EXPECT_TRUE(qt.negated);
  EXPECT_EQ(qt.values.size(), 2u);
  EXPECT_FALSE(parse_kb("MODE 0-10\nQUALIFIER q \"Q\"\n  1 a\n  3 b\n").ok());
}

TEST(ParseKb, AutoNamesAreDeterministic) {
  std::string src = "MODE 0-10\nCHOICE c \"C\"\nRULE IF [x] > 1 THEN c Confidence=1\nRULE IF [x] > 2 THEN c Confidence=2 NAME mid\nRULE IF [x] > 3 THEN c Confidence=3\n";
  auto a = parse_ok(src), b = parse_ok(src);
  EXPECT_EQ(a.rules[0].name, "R1");
  EXPECT_EQ(a.rules[1].name, "mid");
  EXPECT_EQ(a.rules[2].name, "R3");
  EXPECT_EQ(a, b);
}

TEST(SerializeKb, EmitsExplicitAutoNames) {
  auto kb = parse_ok("MODE 0-10\nCHOICE c \"C\"\nRULE IF [x] > 1 THEN c Confidence=1\n");
  EXPECT_NE(serialize_kb(kb).find("  NAME R1\n"), std::string::npos);
}

TEST(SerializeKb, CanonicalLayout) {
  auto kb = parse_ok("MODE 0-10\nCHOICE c \"C\"\nQUALIFIER q \"Q is\"\n1 a\n2 b\n3 c3\nRULE IF q IS a AND [n] > 1 THEN c Confidence=8 NAME r\nVARIABLE [n] NUMERIC \"n\"\n");
  EXPECT_EQ(serialize_kb(kb),
            "MODE 0-10\n"
            "\n"
            "QUALIFIER q \"Q is\"\n"
            "  1 a\n"
            "  2 b\n"
            "  3 c3\n"
            "\n"
            "VARIABLE [n] NUMERIC \"n\"\n"
            "\n"
            "CHOICE c \"C\"\n"
            "\n"
            "RULE\n"
            "  IF q IS a\n"
            "  AND [n] > 1\n"
            "  THEN c Confidence=8\n"
            "  NAME r\n");
}

TEST(SerializeKb, RoundTripsGeneratedKbs) {
  gen::Rng rng(101);
  for (int i = 0; i < 300; ++i) {
    ModeKind mode = gen::all_modes[i % 6];
    KnowledgeBase kb = gen::random_kb(rng, mode);
    std::string text = serialize_kb(kb);
    auto once = parse_kb(text);
    ASSERT_TRUE(once.ok()) << format_error(once.errors().front()) << "\n" << text;
    EXPECT_EQ(once.value(), kb) << text;
    EXPECT_EQ(serialize_kb(once.value()), text);
  }
}

TEST(ParseExpression, Precedence) {
  auto e = parse_expression("[price] + [taxes] * 2");
  ASSERT_TRUE(e.ok());
  auto want = make_binary(BinaryOp::add, make_var("price"), make_binary(BinaryOp::multiply, make_var("taxes"), make_number(2)));
  EXPECT_EQ(*e.value(), *want);
}

TEST(ParseExpression, UnaryMinus) {
  auto e = parse_expression("-( [a] )");
  ASSERT_TRUE(e.ok());
  EXPECT_EQ(*e.value(), *make_negate(make_var("a")));
}

TEST(ParseExpression, LeftAssociative) {
  auto e = parse_expression("1 - 2 - 3");
  ASSERT_TRUE(e.ok());
  EXPECT_EQ(*e.value(), *make_binary(BinaryOp::subtract, make_binary(BinaryOp::subtract, make_number(1), make_number(2)), make_number(3)));
}

TEST(ParseExpression, MissingOperand) {
  auto e = parse_expression("[a] +");
  ASSERT_FALSE(e.ok());
  EXPECT_NE(e.errors().front().expected.find("number"), std::string::npos);
  EXPECT_FALSE(parse_expression("").ok());
  EXPECT_FALSE(parse_expression("(1").ok());
  EXPECT_FALSE(parse_expression("1 2").ok());
}

TEST(ParseExpression, PrintReparseIdentity) {
  gen::Rng rng(7);
  std::vector<std::string> names = {"a", "b", "total_cost"};
  for (int i = 0; i < 2000; ++i) {
    ExprPtr e = gen::random_expression(rng, names, 5, true);
    auto back = parse_expression(to_string(*e));
    ASSERT_TRUE(back.ok()) << to_string(*e);
    EXPECT_EQ(*back.value(), *e) << to_string(*e);
  }
}

TEST(ParseErrors, SpansStayInsideSource) {
  gen::Rng rng(13);
  const std::string alphabet = "MODE 0-10\nRULE IF THEN ELSE AND [x] \"q\" # , = < > ( ) + - * / 12.5e3 NAME NOTE é\n";
  for (int i = 0; i < 2000; ++i) {
    std::string src;
    for (int k = 0, n = rng.uniform(0, 80); k < n; ++k) src += alphabet[static_cast<std::size_t>(rng.uniform(0, static_cast<int>(alphabet.size()) - 1))];
    auto p = parse_kb(src);
    if (p.ok()) continue;
    for (const auto& e : p.errors()) {
      EXPECT_GE(e.span.line, 1);
      EXPECT_GE(e.span.column, 1);
      EXPECT_LE(e.span.line, line_count(src));
      EXPECT_FALSE(e.message.empty());
    }
  }
}

TEST(ParseErrors, UnterminatedString) {
  auto p = parse_kb("MODE 0-10\nCHOICE c \"open\n");
  ASSERT_FALSE(p.ok());
  EXPECT_EQ(p.errors().front().span.line, 2);
}
