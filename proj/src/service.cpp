#include "lela/service.hpp"

#include <fstream>
#include <sstream>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "lela/errors.hpp"
#include "lela/kb.hpp"
#include "lela/output.hpp"
#include "lela/utf8.hpp"

namespace lela {

namespace fs = std::filesystem;

namespace {

HttpReply reply(int status, const json& body) { return HttpReply{status, body.dump()}; }

HttpReply error_reply(int status, const std::string& message, const std::string& stage = "") {
  json body = {{"error", message}};
  if (!stage.empty()) body["stage"] = stage;
  return reply(status, body);
}

bool is_remote_failure(const std::exception& e) {
  return dynamic_cast<const TransportError*>(&e) || dynamic_cast<const ApiError*>(&e) ||
         dynamic_cast<const MalformedResponse*>(&e) || dynamic_cast<const DimMismatch*>(&e);
}

}  // namespace

Service::Service(ServiceOptions options, const Registry& registry)
    : options_(std::move(options)), registry_(registry) {
  fs::create_directories(options_.data_dir / "kbs");
  load_index();
}

fs::path Service::kb_path(const std::string& kb_id) const { return options_.data_dir / "kbs" / (kb_id + ".jsonl"); }

void Service::load_index() {
  const fs::path index = options_.data_dir / "kbs" / "index.json";
  std::ifstream in(index);
  if (!in) return;
  try {
    const json j = json::parse(in);
    for (const auto& e : j) {
      KbInfo info{e.at("kb_id").get<std::string>(), e.value("name", ""), e.value("entities", std::size_t{0})};
      if (fs::exists(kb_path(info.kb_id))) kbs_.emplace(info.kb_id, info);
    }
  } catch (const json::exception& e) {
    spdlog::warn("ignoring unreadable KB index {}: {}", index.string(), e.what());
  }
}

void Service::save_index() const {
  json j = json::array();
  for (const auto& [id, info] : kbs_) j.push_back({{"kb_id", id}, {"name", info.name}, {"entities", info.entities}});
  const fs::path index = options_.data_dir / "kbs" / "index.json";
  const fs::path tmp = index.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, index);
}

HttpReply Service::upload_kb(const std::string& jsonl, const std::string& name) {
  std::size_t count = 0;
  try {
    count = parse_kb(jsonl).size();
  } catch (const Error& e) {
    return error_reply(400, e.what());
  }
  if (count == 0) return error_reply(400, "knowledge base is empty");

  const std::string kb_id = "kb_" + sha256_hex(jsonl).substr(0, 16);
  std::lock_guard lock(kb_mutex_);
  const fs::path path = kb_path(kb_id);
  if (!fs::exists(path)) {
    const fs::path tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << jsonl;
      if (!out) return error_reply(500, "cannot persist knowledge base");
    }
    fs::rename(tmp, path);
  }
  kbs_[kb_id] = KbInfo{kb_id, name.empty() ? kb_id : name, count};
  save_index();
  return reply(200, {{"kb_id", kb_id}, {"name", kbs_[kb_id].name}, {"entities", count}});
}

HttpReply Service::list_kbs() const {
  std::lock_guard lock(kb_mutex_);
  json out = json::array();
  for (const auto& [id, info] : kbs_) out.push_back({{"kb_id", id}, {"name", info.name}, {"entities", info.entities}});
  return reply(200, out);
}

HttpReply Service::components() const {
  json out = json::object();
  for (Slot s : kAllSlots) out[std::string(to_string(s))] = registry_.names(s);
  return reply(200, out);
}

Service::PipelinePtr Service::pipeline_for(const std::string& kb_id, const PipelineConfig& config) {
  const std::string key = kb_id + "\n" + config.to_json().dump();
  std::promise<PipelinePtr> promise;
  std::shared_future<PipelinePtr> future;
  bool builder = false;
  {
    std::lock_guard lock(cache_mutex_);
    auto it = pipelines_.find(key);
    if (it != pipelines_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.second);
      future = it->second.first;
    } else {
      future = promise.get_future().share();
      lru_.push_front(key);
      pipelines_.emplace(key, std::make_pair(future, lru_.begin()));
      while (pipelines_.size() > options_.pipeline_cache_size) {
        pipelines_.erase(lru_.back());
        lru_.pop_back();
      }
      ++builds_;
      builder = true;
    }
  }
  if (builder) {
    try {
      BuildOptions build;
      build.base_dir = options_.data_dir;
      build.cache = options_.cache;
      promise.set_value(build_pipeline(config, build, registry_));
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard lock(cache_mutex_);
      auto it = pipelines_.find(key);
      if (it != pipelines_.end()) {
        lru_.erase(it->second.second);
        pipelines_.erase(it);
      }
    }
  }
  return future.get();
}

HttpReply Service::run(const std::string& request_body) {
  json req;
  try {
    req = json::parse(request_body);
  } catch (const json::exception& e) {
    return error_reply(400, std::string("invalid JSON: ") + e.what());
  }
  if (!req.is_object()) return error_reply(400, "request must be a JSON object");
  if (!req.contains("text") || !req["text"].is_string()) return error_reply(400, "missing string field 'text'");
  if (!req.contains("kb_id") || !req["kb_id"].is_string()) return error_reply(400, "missing string field 'kb_id'");

  std::string text = req["text"].get<std::string>();
  if (!utf8::is_valid(text)) return error_reply(400, "text is not valid UTF-8");
  if (utf8::length(text) > options_.max_text_chars) {
    return error_reply(400, "text exceeds " + std::to_string(options_.max_text_chars) + " characters");
  }
  const std::string kb_id = req["kb_id"].get<std::string>();
  {
    std::lock_guard lock(kb_mutex_);
    if (!kbs_.contains(kb_id)) return error_reply(404, "unknown kb_id '" + kb_id + "'");
  }

  PipelineConfig config;
  try {
    json merged = options_.defaults;
    if (req.contains("config")) {
      if (!req["config"].is_object()) return error_reply(400, "'config' must be an object");
      merged.merge_patch(req["config"]);
    }
    merged["knowledge_base"] = {{"name", "jsonl"}, {"params", {{"path", kb_path(kb_id).string()}}}};
    config = PipelineConfig::from_json(merged);
  } catch (const Error& e) {
    return error_reply(400, e.what());
  } catch (const json::exception& e) {
    return error_reply(400, e.what());
  }

  PipelinePtr pipeline;
  try {
    pipeline = pipeline_for(kb_id, config);
  } catch (const UnknownComponent& e) {
    return error_reply(400, e.what());
  } catch (const InvalidParams& e) {
    return error_reply(400, e.what());
  } catch (const std::exception& e) {
    if (is_remote_failure(e)) return error_reply(502, e.what(), "build");
    return error_reply(500, e.what());
  }

  try {
    Document doc;
    doc.doc_id = req.value("doc_id", std::string("inline"));
    doc.text = std::move(text);
    const AnnotatedDocument result = pipeline->run(doc);
    return HttpReply{200, to_output_json(result).dump()};
  } catch (const StageError& e) {
    return error_reply(e.backend_failure() ? 502 : 500, e.what(), e.stage());
  } catch (const std::exception& e) {
    return error_reply(500, e.what());
  }
}

void Service::mount(httplib::Server& server) {
  const std::string origin = options_.cors_origin;
  server.set_default_headers({{"Access-Control-Allow-Origin", origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  const auto send = [](httplib::Response& res, const HttpReply& r) {
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Post("/api/run", [this, send](const httplib::Request& req, httplib::Response& res) { send(res, run(req.body)); });
  server.Post("/api/kb", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, upload_kb(req.body, req.get_param_value("name")));
  });
  server.Get("/api/kb", [this, send](const httplib::Request&, httplib::Response& res) { send(res, list_kbs()); });
  server.Get("/api/components", [this, send](const httplib::Request&, httplib::Response& res) { send(res, components()); });
  if (options_.static_dir) {
    if (!server.set_mount_point("/", options_.static_dir->string())) {
      spdlog::warn("static directory {} not found", options_.static_dir->string());
    }
  }
}

std::size_t Service::pipeline_builds() const {
  std::lock_guard lock(cache_mutex_);
  return builds_;
}

std::size_t Service::cached_pipelines() const {
  std::lock_guard lock(cache_mutex_);
  return pipelines_.size();
}

}  // namespace lela
