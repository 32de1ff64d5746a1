#pragma once

// Event-sourced consultation persistence.
//
// Each session is one JSON-lines file `<id>.log` under the store root. Input
// events (Started, Answered, Revised) are what replay feeds to the engine;
// derived events (QuestionAsked, RuleFired, ScoreUpdated, Finished) are
// recomputed during replay and must match what was written, otherwise the log
// is treated as corrupt and moved to `quarantine/`.

#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <string>
#include <vector>

#include "ledgermind/engine.hpp"
#include "ledgermind/explanation.hpp"
#include "ledgermind/json_codec.hpp"

namespace ledgermind {

enum class EventKind { started, question_asked, answered, revised, rule_fired, score_updated, finished };

inline std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::started: return "Started";
    case EventKind::question_asked: return "QuestionAsked";
    case EventKind::answered: return "Answered";
    case EventKind::revised: return "Revised";
    case EventKind::rule_fired: return "RuleFired";
    case EventKind::score_updated: return "ScoreUpdated";
    case EventKind::finished: return "Finished";
  }
  return "?";
}

inline EventKind parse_event_kind(const std::string& s) {
  for (EventKind k : {EventKind::started, EventKind::question_asked, EventKind::answered, EventKind::revised,
                      EventKind::rule_fired, EventKind::score_updated, EventKind::finished}) {
    if (to_string(k) == s) return k;
  }
  throw Error(Errc::corrupt_log, "unknown event kind '" + s + "'");
}

struct SessionEvent {
  int seq = 0;
  EventKind kind = EventKind::started;
  nlohmann::json payload = nlohmann::json::object();
  std::string timestamp;  // UTC, ISO 8601
};

inline nlohmann::json to_json(const SessionEvent& e) {
  return {{"seq", e.seq}, {"kind", to_string(e.kind)}, {"payload", e.payload}, {"timestamp", e.timestamp}};
}

inline SessionEvent event_from_json(const nlohmann::json& j) {
  SessionEvent e;
  e.seq = j.at("seq").get<int>();
  e.kind = parse_event_kind(j.at("kind").get<std::string>());
  e.payload = j.at("payload");
  e.timestamp = j.at("timestamp").get<std::string>();
  return e;
}

inline std::string utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

inline std::string new_session_id() {
  static thread_local std::mt19937_64 gen{std::random_device{}() ^ (static_cast<std::uint64_t>(std::random_device{}()) << 32)};
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(gen()), static_cast<unsigned long long>(gen()));
  return buf;
}

// Derived events describing how `after` differs from `before`.
inline std::vector<SessionEvent> derived_events(const Session* before, const Session& after) {
  std::vector<SessionEvent> out;
  auto push = [&](EventKind k, nlohmann::json payload) { out.push_back(SessionEvent{0, k, std::move(payload), {}}); };
  for (const auto& [rule, result] : after.fired()) {
    if (before) {
      auto old = before->fired();
      auto it = old.find(rule);
      if (it != old.end() && it->second == result) continue;
    }
    push(EventKind::rule_fired, {{"rule", rule}, {"outcome", to_string(result)}});
  }
  for (const auto& sc : after.scores) {
    const ChoiceScore* old = before ? before->find_score(sc.choice) : nullptr;
    if (old ? old->combined == sc.combined : sc.contributions.empty()) continue;
    push(EventKind::score_updated, {{"choice", sc.choice}, {"value", sc.combined.value}, {"locked", sc.combined.locked}});
  }
  if (after.pending_question) {
    push(EventKind::question_asked, {{"question_id", after.pending_question->id}, {"subject", after.pending_question->subject}});
  } else if (after.status == SessionStatus::finished) {
    push(EventKind::finished, {{"solutions", solutions(after).size()}});
  }
  return out;
}

class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) throw Error(Errc::io_error, "cannot create store directory " + root_.string() + ": " + ec.message());
  }

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path log_path(const std::string& id) const { return root_ / (id + ".log"); }

  void append(const std::string& id, const std::vector<SessionEvent>& events) {
    std::ofstream out(log_path(id), std::ios::app | std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot open log for session " + id);
    for (const auto& e : events) out << to_json(e).dump() << '\n';
    out.flush();
    if (!out) throw Error(Errc::io_error, "cannot write log for session " + id);
  }

  std::vector<std::string> session_ids() const {
    std::vector<std::string> ids;
    for (const auto& entry : std::filesystem::directory_iterator(root_)) {
      if (entry.is_regular_file() && entry.path().extension() == ".log") ids.push_back(entry.path().stem().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  // A trailing line without its newline is an interrupted write and is
  // dropped; any other unreadable line makes the log corrupt.
  std::vector<SessionEvent> load(const std::string& id) const {
    std::ifstream in(log_path(id), std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot read log for session " + id);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<SessionEvent> events;
    std::size_t start = 0;
    while (start < content.size()) {
      std::size_t nl = content.find('\n', start);
      if (nl == std::string::npos) break;
      std::string line = content.substr(start, nl - start);
      start = nl + 1;
      try {
        events.push_back(event_from_json(nlohmann::json::parse(line)));
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::corrupt_log, "session " + id + ": unreadable event: " + e.what());
      }
      if (events.back().seq != static_cast<int>(events.size())) {
        throw Error(Errc::corrupt_log, "session " + id + ": event sequence is not dense");
      }
    }
    return events;
  }

  // Rewrites the log with exactly `events`; used to trim a torn tail.
  void rewrite(const std::string& id, const std::vector<SessionEvent>& events) {
    auto tmp = root_ / (id + ".tmp");
    {
      std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
      for (const auto& e : events) out << to_json(e).dump() << '\n';
      if (!out) throw Error(Errc::io_error, "cannot rewrite log for session " + id);
    }
    std::filesystem::rename(tmp, log_path(id));
  }

  void quarantine(const std::string& id) {
    auto dir = root_ / "quarantine";
    std::filesystem::create_directories(dir);
    std::filesystem::rename(log_path(id), dir / (id + ".log"));
  }

 private:
  std::filesystem::path root_;
};

using KbCatalog = std::map<std::string, std::shared_ptr<const KnowledgeBase>>;

struct RecoveryReport {
  std::vector<std::string> recovered;
  std::vector<std::pair<std::string, std::string>> quarantined;  // id, reason
};

struct Replayed {
  Session session;
  std::string kb_name;
  // Derived events of the last input event that the log lost to an
  // interrupted write; recovery appends them.
  std::vector<SessionEvent> missing;
};

// Rebuilds a session from its log, checking every derived event.
inline Replayed replay_events(const KbCatalog& kbs, const std::vector<SessionEvent>& events) {
  if (events.empty() || events.front().kind != EventKind::started) throw Error(Errc::corrupt_log, "log does not begin with Started");
  Replayed out;
  const auto& start = events.front().payload;
  try {
    out.kb_name = start.at("kb").get<std::string>();
    auto it = kbs.find(out.kb_name);
    if (it == kbs.end()) throw Error(Errc::corrupt_log, "log refers to unknown knowledge base '" + out.kb_name + "'");
    out.session = start_session(it->second, start.at("goals").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::corrupt_log, std::string("malformed Started event: ") + e.what());
  }
  auto is_input = [](EventKind k) { return k == EventKind::started || k == EventKind::answered || k == EventKind::revised; };

  std::vector<SessionEvent> expected = derived_events(nullptr, out.session);
  std::size_t i = 1;
  while (true) {
    std::size_t k = 0;
    for (; i < events.size() && !is_input(events[i].kind); ++i, ++k) {
      if (k >= expected.size() || expected[k].kind != events[i].kind || expected[k].payload != events[i].payload) {
        throw Error(Errc::corrupt_log, "derived event at seq " + std::to_string(events[i].seq) + " does not match replay");
      }
    }
    if (k != expected.size()) {
      if (i < events.size()) throw Error(Errc::corrupt_log, "derived events missing before seq " + std::to_string(events[i].seq));
      out.missing.assign(expected.begin() + static_cast<std::ptrdiff_t>(k), expected.end());
    }
    if (i == events.size()) break;
    const SessionEvent& input = events[i];
    if (input.kind == EventKind::started) throw Error(Errc::corrupt_log, "second Started event at seq " + std::to_string(input.seq));
    Session before = out.session;
    try {
      int qid = input.payload.at("question_id").get<int>();
      std::string subject = input.payload.at("subject").get<std::string>();
      FactValue value = codec::decode_value(*out.session.kb, subject, input.payload.at("value"));
      if (input.kind == EventKind::answered) answer(out.session, qid, value);
      else revise_answer(out.session, qid, value);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::corrupt_log, std::string("malformed input event: ") + e.what());
    } catch (const Error& e) {
      throw Error(Errc::corrupt_log, "input event at seq " + std::to_string(input.seq) + " rejected on replay: " + e.what());
    }
    expected = derived_events(&before, out.session);
    ++i;
  }
  return out;
}

// Owns the live sessions of a service process. Operations on one session are
// serialized by its mutex; the map itself is guarded by a shared mutex.
class SessionManager {
 public:
  SessionManager(KbCatalog kbs, std::filesystem::path store_dir) : kbs_(std::move(kbs)), store_(std::move(store_dir)) {}

  const KbCatalog& knowledge_bases() const { return kbs_; }
  SessionStore& store() { return store_; }

  RecoveryReport recover() {
    RecoveryReport report;
    for (const auto& id : store_.session_ids()) {
      try {
        auto events = store_.load(id);
        Replayed replayed = replay_events(kbs_, events);
        auto entry = std::make_shared<Entry>();
        entry->kb_name = replayed.kb_name;
        entry->session = std::move(replayed.session);
        entry->next_seq = static_cast<int>(events.size()) + 1;
        store_.rewrite(id, events);
        if (!replayed.missing.empty()) persist(id, *entry, replayed.missing);
        std::unique_lock lock(map_mutex_);
        sessions_[id] = entry;
        report.recovered.push_back(id);
      } catch (const Error& e) {
        store_.quarantine(id);
        report.quarantined.emplace_back(id, e.what());
      }
    }
    return report;
  }

  std::string create(const std::string& kb_name, std::optional<std::vector<std::string>> goals) {
    auto it = kbs_.find(kb_name);
    if (it == kbs_.end()) throw Error(Errc::unknown_knowledge_base, "no knowledge base named '" + kb_name + "'");
    auto entry = std::make_shared<Entry>();
    entry->kb_name = kb_name;
    entry->session = start_session(it->second, goals);
    std::string id = new_session_id();
    std::vector<SessionEvent> events;
    events.push_back(SessionEvent{0, EventKind::started, {{"kb", kb_name}, {"goals", entry->session.goals}}, {}});
    for (auto& e : derived_events(nullptr, entry->session)) events.push_back(std::move(e));
    persist(id, *entry, events);
    std::unique_lock lock(map_mutex_);
    sessions_[id] = entry;
    return id;
  }

  template <class F>
  auto with_session(const std::string& id, F&& f) {
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    return f(static_cast<const Session&>(entry->session));
  }

  Session snapshot(const std::string& id) {
    return with_session(id, [](const Session& s) { return s; });
  }

  SessionStatus answer(const std::string& id, int question_id, const nlohmann::json& value) {
    return mutate(id, EventKind::answered, question_id, value);
  }

  SessionStatus revise(const std::string& id, int question_id, const nlohmann::json& value) {
    return mutate(id, EventKind::revised, question_id, value);
  }

  std::vector<SessionEvent> events(const std::string& id) {
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    return store_.load(id);
  }

  std::vector<std::string> ids() const {
    std::shared_lock lock(map_mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : sessions_) out.push_back(id);
    return out;
  }

 private:
  struct Entry {
    std::mutex mutex;
    std::string kb_name;
    Session session;
    int next_seq = 1;
  };

  std::shared_ptr<Entry> find(const std::string& id) const {
    std::shared_lock lock(map_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(Errc::unknown_session, "no session '" + id + "'");
    return it->second;
  }

  void persist(const std::string& id, Entry& entry, std::vector<SessionEvent>& events) {
    std::string now = utc_now();
    for (auto& e : events) {
      e.seq = entry.next_seq++;
      e.timestamp = now;
    }
    store_.append(id, events);
  }

  SessionStatus mutate(const std::string& id, EventKind kind, int question_id, const nlohmann::json& value) {
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    Session next = entry->session;
    std::string subject;
    if (kind == EventKind::answered) {
      if (!next.pending_question || next.pending_question->id != question_id) {
        throw Error(Errc::stale_question, "question " + std::to_string(question_id) + " is not pending");
      }
      subject = next.pending_question->subject;
      FactValue v = codec::decode_value(*next.kb, subject, value);
      ledgermind::answer(next, question_id, v);
    } else {
      for (const auto& a : next.asked) {
        if (a.id == question_id) subject = a.subject;
      }
      if (subject.empty()) throw Error(Errc::unknown_question, "question " + std::to_string(question_id) + " has not been answered");
      FactValue v = codec::decode_value(*next.kb, subject, value);
      revise_answer(next, question_id, v);
    }
    std::vector<SessionEvent> events;
    events.push_back(SessionEvent{0, kind, {{"question_id", question_id}, {"subject", subject}, {"value", value}}, {}});
    for (auto& e : derived_events(&entry->session, next)) events.push_back(std::move(e));
    persist(id, *entry, events);
    entry->session = std::move(next);
    return entry->session.status;
  }

  KbCatalog kbs_;
  SessionStore store_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

}  // namespace ledgermind
