#pragma once

#include <atomic>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "lela/types.hpp"

namespace lela::fixture {

/// Scripted OpenAI-compatible / NER / rerank server on an ephemeral port.
class MockServer {
 public:
  using ChatFn = std::function<std::vector<std::string>(const json& request)>;
  using EmbedFn = std::function<std::vector<double>(const std::string& text)>;
  using RerankFn = std::function<double(const std::string& query, const std::string& doc)>;
  using NerFn = std::function<json(const std::string& text, const json& labels)>;

  MockServer();
  ~MockServer();
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int port() const { return port_; }

  void on_chat(ChatFn fn);
  void on_embed(EmbedFn fn);
  void on_rerank(RerankFn fn);
  void on_ner(NerFn fn);

  /// The next `count` requests to `path` get `status` with an error body.
  void fail_next(const std::string& path, int status, int count = 1);
  /// Queues a verbatim response for `path`, served before the scripted handler.
  void enqueue(const std::string& path, int status, std::string body);

  std::size_t requests() const;
  std::size_t requests(const std::string& path) const;
  std::vector<json> bodies(const std::string& path) const;
  void reset_counters();

 private:
  bool intercept(const std::string& path, const httplib::Request& req, httplib::Response& res);

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;

  mutable std::mutex mutex_;
  ChatFn chat_;
  EmbedFn embed_;
  RerankFn rerank_;
  NerFn ner_;
  std::map<std::string, std::deque<std::pair<int, std::string>>> queued_;
  std::map<std::string, std::size_t> counts_;
  std::map<std::string, std::vector<json>> bodies_;
};

}  // namespace lela::fixture
