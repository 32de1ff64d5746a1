#include <gtest/gtest.h>

#include "service_support.hpp"

using namespace ledgermind;
using fixture::TempDir;

namespace {

std::shared_ptr<const KnowledgeBase> kb_ptr(std::string_view src) {
  auto p = parse_kb(src);
  EXPECT_TRUE(p.ok());
  return std::make_shared<const KnowledgeBase>(p.value());
}

const char* two_questions = R"(MODE 0-10
QUALIFIER q "q"
  1 a
  2 b
VARIABLE [n] NUMERIC "n"
CHOICE c "C"
CHOICE d "D"
RULE IF q IS a AND [n] > 2 THEN c Confidence=8 ELSE d Confidence=4 NAME r1
)";

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::io_error;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Events, JsonRoundTripAndIds) {
  SessionEvent e{3, EventKind::score_updated, {{"choice", "c"}, {"value", 7.5}, {"locked", false}}, utc_now()};
  SessionEvent back = event_from_json(nlohmann::json::parse(to_json(e).dump()));
  EXPECT_EQ(back.seq, 3);
  EXPECT_EQ(back.kind, EventKind::score_updated);
  EXPECT_EQ(back.payload, e.payload);
  EXPECT_EQ(back.timestamp.back(), 'Z');
  std::string id = new_session_id();
  EXPECT_EQ(id.size(), 32u);
  EXPECT_EQ(id.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_NE(id, new_session_id());
  EXPECT_EQ(code_of([] { parse_event_kind("Exploded"); }), Errc::corrupt_log);
}

TEST(Manager, LogIsDenseAndStartsWithStarted) {
  TempDir dir;
  SessionManager m({{"k", kb_ptr(two_questions)}}, dir.path());
  std::string id = m.create("k", std::nullopt);
  m.answer(id, 1, "a");
  m.answer(id, 2, 5);
  auto events = m.events(id);
  ASSERT_GE(events.size(), 5u);
  for (std::size_t i = 0; i < events.size(); ++i) EXPECT_EQ(events[i].seq, static_cast<int>(i + 1));
  EXPECT_EQ(events.front().kind, EventKind::started);
  EXPECT_EQ(events.front().payload.at("kb"), "k");
  EXPECT_EQ(events.back().kind, EventKind::finished);
  EXPECT_EQ(m.snapshot(id).find_score("c")->combined.value, 8);
}

TEST(Manager, StaleAnswerChangesNothing) {
  TempDir dir;
  SessionManager m({{"k", kb_ptr(two_questions)}}, dir.path());
  std::string id = m.create("k", std::nullopt);
  m.answer(id, 1, "a");
  Session before = m.snapshot(id);
  auto bytes = std::filesystem::file_size(m.store().log_path(id));
  EXPECT_EQ(code_of([&] { m.answer(id, 1, "b"); }), Errc::stale_question);
  EXPECT_EQ(code_of([&] { m.answer(id, 2, "many"); }), Errc::illegal_value);
  EXPECT_TRUE(fixture::same_state(before, m.snapshot(id)));
  EXPECT_EQ(std::filesystem::file_size(m.store().log_path(id)), bytes);
}

TEST(Manager, UnknownNames) {
  TempDir dir;
  SessionManager m({{"k", kb_ptr(two_questions)}}, dir.path());
  EXPECT_EQ(code_of([&] { m.create("nope", std::nullopt); }), Errc::unknown_knowledge_base);
  EXPECT_EQ(code_of([&] { m.create("k", std::vector<std::string>{"zz"}); }), Errc::unknown_goal);
  EXPECT_EQ(code_of([&] { m.snapshot("ffff"); }), Errc::unknown_session);
  std::string id = m.create("k", std::nullopt);
  EXPECT_EQ(code_of([&] { m.revise(id, 1, "a"); }), Errc::unknown_question);
}

TEST(Recovery, RestartRestoresPendingQuestion) {
  TempDir dir;
  KbCatalog kbs{{"k", kb_ptr(two_questions)}};
  std::string id;
  Session before;
  {
    SessionManager m(kbs, dir.path());
    id = m.create("k", std::nullopt);
    m.answer(id, 1, "a");
    before = m.snapshot(id);
  }
  SessionManager again(kbs, dir.path());
  auto report = again.recover();
  ASSERT_EQ(report.recovered, std::vector<std::string>{id});
  EXPECT_TRUE(report.quarantined.empty());
  Session after = again.snapshot(id);
  EXPECT_TRUE(fixture::same_state(before, after));
  again.answer(id, 2, 1);
  EXPECT_EQ(again.snapshot(id).status, SessionStatus::finished);
  EXPECT_EQ(again.events(id).back().seq, static_cast<int>(again.events(id).size()));
}

TEST(Recovery, TornTailIsDroppedAndCompleted) {
  TempDir dir;
  KbCatalog kbs{{"k", kb_ptr(two_questions)}};
  std::string id;
  std::string full;
  {
    SessionManager m(kbs, dir.path());
    id = m.create("k", std::nullopt);
    m.answer(id, 1, "a");
    full = fixture::read_file(m.store().log_path(id));
  }
  auto lines = lines_of(full);
  // Keep Started..Answered, lose the derived event after it, tear a partial line on.
  std::size_t answered = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find("\"Answered\"") != std::string::npos) answered = i;
  }
  std::string cut;
  for (std::size_t i = 0; i <= answered; ++i) cut += lines[i] + "\n";
  cut += lines[answered + 1].substr(0, 10);
  fixture::write_file(dir.path() / (id + ".log"), cut);

  SessionManager again(kbs, dir.path());
  auto report = again.recover();
  ASSERT_EQ(report.recovered.size(), 1u);
  auto events = again.events(id);
  ASSERT_EQ(events.size(), lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto original = event_from_json(nlohmann::json::parse(lines[i]));
    EXPECT_EQ(events[i].kind, original.kind);
    EXPECT_EQ(events[i].payload, original.payload);
  }
  EXPECT_EQ(again.snapshot(id).pending_question->subject, "n");
}

TEST(Recovery, TamperedLogsAreQuarantined) {
  TempDir dir;
  KbCatalog kbs{{"k", kb_ptr(two_questions)}};
  std::string good, forged, gap, garbage, empty;
  {
    SessionManager m(kbs, dir.path());
    for (auto* id : {&good, &forged, &gap, &garbage, &empty}) {
      *id = m.create("k", std::nullopt);
      m.answer(*id, 1, "a");
      m.answer(*id, 2, 9);
    }
  }
  auto edit = [&](const std::string& id, auto&& f) {
    auto lines = lines_of(fixture::read_file(dir.path() / (id + ".log")));
    f(lines);
    fixture::write_file(dir.path() / (id + ".log"), fixture::join_lines(lines));
  };
  edit(forged, [](auto& lines) {
    for (auto& l : lines) {
      auto j = nlohmann::json::parse(l);
      if (j["kind"] == "ScoreUpdated") {
        j["payload"]["value"] = 10;
        l = j.dump();
      }
    }
  });
  edit(gap, [](auto& lines) { lines.erase(lines.begin() + 1); });
  edit(garbage, [](auto& lines) { lines[1] = "{not json"; });
  fixture::write_file(dir.path() / (empty + ".log"), "");

  SessionManager again(kbs, dir.path());
  auto report = again.recover();
  EXPECT_EQ(report.recovered, std::vector<std::string>{good});
  ASSERT_EQ(report.quarantined.size(), 4u);
  for (const auto& id : {forged, gap, garbage, empty}) {
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "quarantine" / (id + ".log"))) << id;
    EXPECT_FALSE(std::filesystem::exists(dir.path() / (id + ".log")));
    EXPECT_EQ(code_of([&] { again.snapshot(id); }), Errc::unknown_session);
  }
}

TEST(Recovery, RandomInterruptionPoints) {
  gen::Rng rng(31);
  int points = 0;
  for (int iter = 0; iter < 40; ++iter) {
    TempDir dir;
    KbCatalog kbs{{"g", std::make_shared<const KnowledgeBase>(gen::random_engine_kb(rng, gen::all_modes[iter % 6]))}};
    std::string id;
    std::vector<fixture::Step> steps;
    std::string full;
    {
      SessionManager m(kbs, dir.path() / "live");
      gen::Script script{{}, rng.engine()()};
      steps = fixture::recorded_consultation(m, "g", script, rng, id);
      full = fixture::read_file(m.store().log_path(id));
    }
    for (int cut = 0; cut < 5; ++cut, ++points) {
      std::size_t offset = static_cast<std::size_t>(rng.uniform(0, static_cast<int>(full.size())));
      auto store = dir.path() / ("cut" + std::to_string(cut));
      std::filesystem::create_directories(store);
      fixture::write_file(store / (id + ".log"), full.substr(0, offset));

      std::size_t complete = full.rfind('\n', offset == 0 ? 0 : offset - 1);
      complete = (complete == std::string::npos || offset == 0) ? 0 : complete + 1;
      SessionManager again(kbs, store);
      auto report = again.recover();
      if (complete == 0) {
        ASSERT_EQ(report.quarantined.size(), 1u);
        continue;
      }
      ASSERT_EQ(report.recovered.size(), 1u) << report.quarantined.front().second;
      std::size_t k = 0;
      while (k + 1 < steps.size() && steps[k + 1].log_bytes <= complete) ++k;
      if (complete > steps[k].log_bytes) ++k;
      ASSERT_TRUE(fixture::same_state(again.snapshot(id), steps[k].state)) << "iteration " << iter << " offset " << offset;
      auto recovered = again.events(id);
      auto original = lines_of(full.substr(0, steps[k].log_bytes));
      ASSERT_EQ(recovered.size(), original.size());
      for (std::size_t i = 0; i < original.size(); ++i) {
        ASSERT_EQ(to_json(recovered[i]).at("payload"), nlohmann::json::parse(original[i]).at("payload"));
      }
    }
  }
  EXPECT_EQ(points, 200);
}

TEST(KbDir, LoadsValidFilesAndReportsTheRest) {
  TempDir dir;
  fixture::write_file(dir.path() / "good.kb", two_questions);
  fixture::write_file(dir.path() / "broken.kb", "MODE 0-10\nRULE IF\n");
  fixture::write_file(dir.path() / "dangling.kb", "MODE 0-10\nCHOICE c \"C\"\nRULE IF zz IS a THEN c Confidence=3\n");
  fixture::write_file(dir.path() / "notes.txt", "ignored");
  auto report = load_kb_dir(dir.path());
  ASSERT_EQ(report.catalog.size(), 1u);
  EXPECT_TRUE(report.catalog.count("good"));
  EXPECT_EQ(report.rejected.size(), 2u);
  EXPECT_EQ(code_of([&] { load_kb_dir(dir.path() / "none"); }), Errc::io_error);
}

TEST(Codec, ValuesForEachSubjectKind) {
  auto kb = kb_ptr(R"(MODE 0-10
QUALIFIER q MULTI "q"
  1 a
  2 b
VARIABLE [n] NUMERIC "n"
VARIABLE [t] TEXT "t"
CHOICE c "C"
)");
  EXPECT_EQ(std::get<LabelSet>(codec::decode_value(*kb, "q", nlohmann::json::array({"b", "a"}))), (LabelSet{"a", "b"}));
  EXPECT_EQ(std::get<LabelSet>(codec::decode_value(*kb, "q", "2")), LabelSet{"b"});
  EXPECT_EQ(std::get<double>(codec::decode_value(*kb, "n", 2.5)), 2.5);
  EXPECT_EQ(std::get<double>(codec::decode_value(*kb, "n", "2.5")), 2.5);
  EXPECT_EQ(std::get<std::string>(codec::decode_value(*kb, "t", "1, 2")), "1, 2");
  EXPECT_TRUE(std::holds_alternative<UnknownValue>(codec::decode_value(*kb, "t", "UNKNOWN")));
  EXPECT_EQ(code_of([&] { codec::decode_value(*kb, "n", nlohmann::json::object()); }), Errc::illegal_value);
  EXPECT_EQ(code_of([&] { codec::decode_value(*kb, "q", nlohmann::json::array({1})); }), Errc::illegal_value);
  for (const FactValue& v : {FactValue(LabelSet{"a"}), FactValue(3.25), FactValue(std::string("x y")), FactValue(UnknownValue{})}) {
    const std::string subject = std::holds_alternative<LabelSet>(v) ? "q" : std::holds_alternative<double>(v) ? "n" : "t";
    EXPECT_EQ(codec::decode_value(*kb, subject, codec::encode_value(v)), v);
  }
}
