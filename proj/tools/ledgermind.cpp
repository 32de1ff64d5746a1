#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "ledgermind/console.hpp"
#include "ledgermind/valuation.hpp"
#include "ledgermind/wire_api.hpp"

namespace lm = ledgermind;

namespace {

int run_cost(const std::string& csv, const std::string& qty, const std::string& method_name) {
  auto method = lm::valuation::parse_issue_method(method_name);
  if (!method) {
    std::cerr << "error: unknown method '" << method_name << "' (WAC, FIFO or LIFO)\n";
    return 2;
  }
  std::ifstream in(csv);
  if (!in) {
    std::cerr << "error: cannot read " << csv << "\n";
    return lm::exit_code::io_error;
  }
  try {
    auto ledger = lm::valuation::read_lot_csv(in);
    auto result = lm::valuation::issue_cost(ledger, lm::Decimal::parse(qty), *method);
    std::cout << "cost " << result.cost.to_string() << "\n"
              << "remaining value " << result.remaining.value().to_string() << "\n"
              << lm::valuation::write_lot_csv(result.remaining);
    return 0;
  } catch (const lm::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}

int run_serve(const std::string& host, int port, const std::string& kb_dir, std::string store_dir) {
  if (const char* env = std::getenv("LEDGERMIND_STORE"); env && *env) store_dir = env;
  lm::KbLoadReport kbs;
  try {
    kbs = lm::load_kb_dir(kb_dir);
  } catch (const lm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lm::exit_code::io_error;
  }
  for (const auto& r : kbs.rejected) std::cerr << "skipped " << r << "\n";
  if (kbs.catalog.empty()) {
    std::cerr << "error: no valid .kb file in " << kb_dir << "\n";
    return lm::exit_code::diagnostics;
  }
  std::unique_ptr<lm::SessionManager> manager;
  try {
    manager = std::make_unique<lm::SessionManager>(kbs.catalog, store_dir);
  } catch (const lm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lm::exit_code::io_error;
  }
  auto report = manager->recover();
  for (const auto& [id, why] : report.quarantined) std::cerr << "quarantined session " << id << ": " << why << "\n";
  std::cerr << "recovered " << report.recovered.size() << " session(s) from " << store_dir << "\n";

  httplib::Server server;
  lm::mount_routes(server, *manager);
  if (!server.bind_to_port(host, port)) {
    std::cerr << "error: cannot listen on " << host << ":" << port << " (port in use?)\n";
    return lm::exit_code::io_error;
  }
  std::cerr << "serving " << kbs.catalog.size() << " knowledge base(s) on http://" << host << ":" << port << "\n";
  server.listen_after_bind();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ledgermind: rule-based consultation shell and valuation calculators"};
  app.require_subcommand(1);

  std::string check_path;
  auto* check = app.add_subcommand("check", "parse and validate a knowledge base");
  check->add_option("kb", check_path, "knowledge base file")->required();

  std::string run_path, script_path;
  lm::RunOptions run_options;
  auto* run = app.add_subcommand("run", "run a consultation");
  run->add_option("kb", run_path, "knowledge base file")->required();
  run->add_option("--goal", run_options.goals, "goal choice (repeatable)");
  run->add_option("--script", script_path, "answers file, one per line");
  run->add_flag("--trace", run_options.trace, "print the inference trace at the end");

  std::string kb_dir = "kb", store_dir = "sessions", host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "serve the consultation API");
  serve->add_option("--port", port, "TCP port");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--kb-dir", kb_dir, "directory of .kb files");
  serve->add_option("--store-dir", store_dir, "session log directory (LEDGERMIND_STORE overrides)");

  std::string csv, qty, method = "FIFO";
  auto* cost = app.add_subcommand("cost", "issue cost of a quantity from a lot ledger");
  cost->add_option("ledger", csv, "CSV with header seq,quantity,unit_cost")->required();
  cost->add_option("--qty", qty, "quantity issued")->required();
  cost->add_option("--method", method, "WAC, FIFO or LIFO");

  CLI11_PARSE(app, argc, argv);

  if (*check) return lm::cli_check(check_path, std::cout, std::cerr);
  if (*run) {
    if (script_path.empty()) return lm::cli_run(run_path, run_options, std::cin, std::cout, std::cerr);
    std::ifstream script(script_path);
    if (!script) {
      std::cerr << "error: cannot read " << script_path << "\n";
      return lm::exit_code::io_error;
    }
    run_options.scripted = true;
    return lm::cli_run(run_path, run_options, script, std::cout, std::cerr);
  }
  if (*serve) return run_serve(host, port, kb_dir, store_dir);
  if (*cost) return run_cost(csv, qty, method);
  return 0;
}
