#pragma once

#include <cstddef>
#include <filesystem>
#include <future>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "lela/backends.hpp"
#include "lela/pipeline.hpp"

namespace httplib {
class Server;
}

namespace lela {

struct ServiceOptions {
  /// Uploaded KBs live under data_dir/kbs as <kb_id>.jsonl.
  std::filesystem::path data_dir = "lela-data";
  /// Config that partial request configs are merged over. Its knowledge_base
  /// slot is replaced by the request's kb_id.
  json defaults = {{"ner", {{"name", "gazetteer"}}},
                   {"candidate_generator", {{"name", "bm25"}}},
                   {"reranker", {{"name", "none"}}},
                   {"disambiguator", {{"name", "first"}}}};
  std::size_t max_text_chars = 100000;
  std::size_t pipeline_cache_size = 8;
  std::shared_ptr<ResponseCache> cache;
  /// Served at / when set.
  std::optional<std::filesystem::path> static_dir;
  std::string cors_origin = "*";
};

struct KbInfo {
  std::string kb_id;
  std::string name;
  std::size_t entities = 0;
};

struct HttpReply {
  int status = 200;
  std::string body;
};

/// HTTP API over the pipeline. Handlers are usable without a server; mount()
/// wires them into an httplib::Server.
class Service {
 public:
  explicit Service(ServiceOptions options, const Registry& registry = default_registry());

  HttpReply run(const std::string& request_body);
  HttpReply upload_kb(const std::string& jsonl, const std::string& name);
  HttpReply list_kbs() const;
  HttpReply components() const;

  void mount(httplib::Server& server);

  std::size_t pipeline_builds() const;
  std::size_t cached_pipelines() const;

 private:
  using PipelinePtr = std::shared_ptr<const Pipeline>;

  PipelinePtr pipeline_for(const std::string& kb_id, const PipelineConfig& config);
  std::filesystem::path kb_path(const std::string& kb_id) const;
  void load_index();
  void save_index() const;

  ServiceOptions options_;
  const Registry& registry_;

  mutable std::mutex kb_mutex_;
  std::map<std::string, KbInfo> kbs_;

  mutable std::mutex cache_mutex_;
  std::list<std::string> lru_;
  std::map<std::string, std::pair<std::shared_future<PipelinePtr>, std::list<std::string>::iterator>> pipelines_;
  std::size_t builds_ = 0;
};

}  // namespace lela
