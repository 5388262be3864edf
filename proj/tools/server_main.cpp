#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "lela/service.hpp"

namespace {
httplib::Server* g_server = nullptr;
void stop(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HTTP API for the entity-linking pipeline", "lela-server"};
  std::string host = "127.0.0.1";
  int port = 8765;
  std::string data_dir = "lela-data";
  std::string defaults_path;
  std::string static_dir;
  std::string cache_dir;
  std::size_t max_chars = 100000;
  app.add_option("--host", host, "Bind address");
  app.add_option("--port", port, "Port");
  app.add_option("--data-dir", data_dir, "Where uploaded knowledge bases are stored");
  app.add_option("--defaults", defaults_path, "Default pipeline config (JSON)");
  app.add_option("--static-dir", static_dir, "UI bundle served at /");
  app.add_option("--cache-dir", cache_dir, "Inference response cache");
  app.add_option("--max-chars", max_chars, "Largest accepted input text");
  CLI11_PARSE(app, argc, argv);

  lela::ServiceOptions options;
  options.data_dir = data_dir;
  options.max_text_chars = max_chars;
  if (!static_dir.empty()) options.static_dir = static_dir;
  if (!cache_dir.empty()) options.cache = std::make_shared<lela::ResponseCache>(cache_dir);
  if (!defaults_path.empty()) {
    std::ifstream in(defaults_path);
    try {
      options.defaults = lela::json::parse(in, nullptr, true, true);
    } catch (const std::exception& e) {
      std::cerr << "bad defaults config: " << e.what() << '\n';
      return 2;
    }
  }

  lela::Service service(options);
  httplib::Server server;
  service.mount(server);
  g_server = &server;
  std::signal(SIGINT, stop);
  std::signal(SIGTERM, stop);
  spdlog::info("listening on {}:{}", host, port);
  if (!server.listen(host, port)) {
    std::cerr << "cannot listen on " << host << ":" << port << '\n';
    return 1;
  }
  return 0;
}
