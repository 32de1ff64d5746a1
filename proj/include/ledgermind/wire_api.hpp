#pragma once

// HTTP/JSON front end over a SessionManager.

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ledgermind/json_codec.hpp"
#include "ledgermind/session_store.hpp"

namespace ledgermind {

inline int http_status(Errc code) {
  switch (code) {
    case Errc::unknown_session:
    case Errc::unknown_knowledge_base:
    case Errc::rule_not_in_trace: return 404;
    case Errc::stale_question:
    case Errc::not_finished:
    case Errc::no_pending_question: return 409;
    case Errc::illegal_value:
    case Errc::unknown_goal:
    case Errc::unknown_question: return 422;
    case Errc::parse_failure: return 400;
    default: return 500;
  }
}

struct KbLoadReport {
  KbCatalog catalog;
  std::vector<std::string> rejected;  // "file: reason"
};

// Loads every valid `*.kb` file of `dir`, keyed by file stem.
inline KbLoadReport load_kb_dir(const std::filesystem::path& dir) {
  KbLoadReport report;
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw Error(Errc::io_error, "not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".kb") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    auto parsed = parse_kb(buf.str());
    if (!parsed.ok()) {
      report.rejected.push_back(path.filename().string() + ": " + format_error(parsed.errors().front()));
      continue;
    }
    auto diags = validate(parsed.value());
    if (has_errors(diags)) {
      report.rejected.push_back(path.filename().string() + ": " + to_string(diags.front().kind) + ": " + diags.front().message);
      continue;
    }
    report.catalog[path.stem().string()] = std::make_shared<const KnowledgeBase>(parsed.value());
  }
  return report;
}

namespace detail {

inline void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& error, const std::string& message) {
  send_json(res, status, {{"error", error}, {"message", message}});
}

template <class Handler>
auto guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), std::string(to_string(e.code())), e.what());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, "MalformedRequest", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "InternalError", e.what());
    }
  };
}

inline nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  auto j = nlohmann::json::parse(req.body);
  if (!j.is_object()) throw Error(Errc::parse_failure, "request body must be an object");
  return j;
}

inline nlohmann::json trace_json(const std::vector<SessionEvent>& events) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : events) out.push_back(to_json(e));
  return out;
}

}  // namespace detail

inline void mount_routes(httplib::Server& server, SessionManager& manager) {
  using detail::guarded;
  using detail::send_json;
  using nlohmann::json;

  server.Post(R"(/kbs/([^/]+)/sessions)", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
    json body = detail::parse_body(req);
    std::optional<std::vector<std::string>> goals;
    if (body.contains("goals") && !body["goals"].is_null()) goals = body["goals"].get<std::vector<std::string>>();
    std::string id = manager.create(req.matches[1], goals);
    send_json(res, 201, {{"session_id", id}});
  }));

  server.Get(R"(/sessions/([0-9a-f]+)/next)", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
    json out = manager.with_session(req.matches[1], [](const Session& s) {
      json j = {{"status", to_string(s.status)}};
      if (s.pending_question) j["question"] = codec::encode_question(*s.pending_question);
      return j;
    });
    send_json(res, 200, out);
  }));

  server.Post(R"(/sessions/([0-9a-f]+)/answers)", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
    json body = detail::parse_body(req);
    SessionStatus st = manager.answer(req.matches[1], body.at("question_id").get<int>(), body.at("value"));
    send_json(res, 200, {{"status", to_string(st)}});
  }));

  server.Post(R"(/sessions/([0-9a-f]+)/revisions)", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
    json body = detail::parse_body(req);
    SessionStatus st = manager.revise(req.matches[1], body.at("question_id").get<int>(), body.at("value"));
    send_json(res, 200, {{"status", to_string(st)}});
  }));

  server.Get(R"(/sessions/([0-9a-f]+)/why)", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
    json out = manager.with_session(req.matches[1], [](const Session& s) {
      json nodes = json::array();
      for (const auto& n : why(s)) nodes.push_back(codec::encode_node(n));
      return nodes;
    });
    send_json(res, 200, out);
  }));

  server.Get(R"(/sessions/([0-9a-f]+)/rules/([^/]+))", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
    std::string rule = req.matches[2];
    json out = manager.with_session(req.matches[1], [&](const Session& s) { return codec::encode_node(explain_rule(s, rule)); });
    send_json(res, 200, out);
  }));

  server.Get(R"(/sessions/([0-9a-f]+)/solutions)", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
    json out = manager.with_session(req.matches[1], [](const Session& s) { return codec::encode_solutions(solutions(s), s.kb->mode.kind); });
    send_json(res, 200, out);
  }));

  server.Get(R"(/sessions/([0-9a-f]+)/trace)", guarded([&manager](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, detail::trace_json(manager.events(req.matches[1])));
  }));

  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) detail::send_error(res, res.status, "NotFound", "no such endpoint");
  });
}

}  // namespace ledgermind
