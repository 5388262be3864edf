#include "lela/backends.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "lela/errors.hpp"

namespace lela {

namespace {

std::size_t clamp_in_flight(std::size_t n) { return std::clamp<std::size_t>(n, 1, 1024); }

template <typename T>
T param_or(const json& params, const char* key, T fallback) {
  if (!params.is_object()) return fallback;
  auto it = params.find(key);
  if (it == params.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw InvalidParams(std::string("parameter '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string ParsedUrl::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

ParsedUrl parse_base_url(std::string_view url) {
  ParsedUrl out;
  const std::size_t sep = url.find("://");
  if (sep == std::string_view::npos) throw InvalidParams("base_url is not absolute: " + std::string(url));
  out.scheme = std::string(url.substr(0, sep));
  if (out.scheme != "http" && out.scheme != "https") {
    throw InvalidParams("base_url must use http or https: " + std::string(url));
  }
  std::string_view rest = url.substr(sep + 3);
  const std::size_t slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  std::string path = slash == std::string_view::npos ? std::string() : std::string(rest.substr(slash));
  if (authority.empty()) throw InvalidParams("base_url has no host: " + std::string(url));

  out.port = out.scheme == "https" ? 443 : 80;
  const std::size_t colon = authority.rfind(':');
  if (colon != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    try {
      std::size_t used = 0;
      const std::string port(authority.substr(colon + 1));
      out.port = std::stoi(port, &used);
      if (used != port.size() || out.port <= 0 || out.port > 65535) throw std::invalid_argument("port");
    } catch (const std::exception&) {
      throw InvalidParams("base_url has an invalid port: " + std::string(url));
    }
    authority = authority.substr(0, colon);
  }
  out.host = std::string(authority);

  while (!path.empty() && path.back() == '/') path.pop_back();
  // Accept both "http://host" and "http://host/v1" as the base.
  if (path.size() >= 3 && path.compare(path.size() - 3, 3, "/v1") == 0) path.resize(path.size() - 3);
  out.path_prefix = path;
  return out;
}

BackendConfig BackendConfig::from_params(const json& params, std::string_view default_model) {
  BackendConfig cfg;
  cfg.base_url = param_or<std::string>(params, "base_url", cfg.base_url);
  cfg.model = param_or<std::string>(params, "model", param_or<std::string>(params, "model_name", std::string(default_model)));
  if (params.is_object() && params.contains("api_key") && params["api_key"].is_string()) {
    cfg.api_key = params["api_key"].get<std::string>();
  }
  if (const char* env = std::getenv(kApiKeyEnv); env != nullptr && *env != '\0') cfg.api_key = env;

  const double timeout_s = param_or<double>(params, "timeout", 120.0);
  if (!(timeout_s > 0)) throw InvalidParams("timeout must be positive");
  cfg.timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
  cfg.max_retries = param_or<int>(params, "max_retries", cfg.max_retries);
  if (cfg.max_retries < 0) throw InvalidParams("max_retries must be >= 0");
  const int in_flight = param_or<int>(params, "max_in_flight", 8);
  if (in_flight < 1) throw InvalidParams("max_in_flight must be >= 1");
  cfg.max_in_flight = static_cast<std::size_t>(in_flight);
  cfg.backoff_base = std::chrono::milliseconds(param_or<long long>(params, "backoff_ms", 500));
  cfg.cache_sampled = param_or<bool>(params, "cache_sampled", true);
  parse_base_url(cfg.base_url);
  return cfg;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

CacheKey CacheKey::make(std::string_view kind, std::string_view model, const json& body) {
  // nlohmann::json objects are key-sorted, so dump() is canonical.
  std::string material;
  material.append(kind).push_back('\n');
  material.append(model).push_back('\n');
  material.append(body.dump());
  return CacheKey{sha256_hex(material)};
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) disable("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::filesystem::path ResponseCache::path_for(const CacheKey& key) const {
  return dir_ / key.digest.substr(0, 2) / key.digest;
}

void ResponseCache::disable(const std::string& why) const {
  if (enabled_.exchange(false)) spdlog::warn("response cache disabled: {}", why);
}

std::optional<std::string> ResponseCache::get(const CacheKey& key) const {
  if (!enabled()) return std::nullopt;
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return ss.str();
}

void ResponseCache::put(const CacheKey& key, std::string_view value) {
  if (!enabled()) return;
  const auto target = path_for(key);
  std::error_code ec;
  std::filesystem::create_directories(target.parent_path(), ec);
  if (ec) {
    disable(ec.message());
    return;
  }
  // Write-then-rename keeps concurrent readers from seeing partial entries.
  std::ostringstream tmp_name;
  tmp_name << target.string() << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id());
  const std::filesystem::path tmp = tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      disable("cannot write " + tmp.string());
      return;
    }
    out.write(value.data(), static_cast<std::streamsize>(value.size()));
    if (!out) {
      disable("write failed for " + tmp.string());
      return;
    }
  }
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    disable("cannot store cache entry: " + ec.message());
  }
}

JsonClient::JsonClient(BackendConfig config, std::shared_ptr<ResponseCache> cache)
    : config_(std::move(config)),
      url_(parse_base_url(config_.base_url)),
      cache_(std::move(cache)),
      in_flight_(static_cast<std::ptrdiff_t>(clamp_in_flight(config_.max_in_flight))) {}

JsonClient::~JsonClient() = default;

json JsonClient::post(std::string_view kind, std::string_view path, const json& body, bool cacheable) const {
  const bool use_cache = cacheable && cache_ != nullptr;
  std::optional<CacheKey> key;
  if (use_cache) {
    key = CacheKey::make(kind, config_.model, body);
    if (auto hit = cache_->get(*key)) {
      try {
        json parsed = json::parse(*hit);
        stats_.cache_hits.fetch_add(1);
        return parsed;
      } catch (const json::parse_error&) {
        spdlog::warn("ignoring corrupt cache entry {}", key->digest);
      }
    }
  }

  const std::string payload = body.dump();
  std::string raw;
  {
    in_flight_.acquire();
    struct Release {
      std::counting_semaphore<1024>& s;
      ~Release() { s.release(); }
    } release{in_flight_};
    raw = send(path, payload);
  }

  json parsed;
  try {
    parsed = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw MalformedResponse(std::string(kind) + " response is not JSON: " + e.what());
  }
  if (use_cache) cache_->put(*key, raw);
  return parsed;
}

std::vector<std::string> chat_complete(const JsonClient& client, const std::vector<ChatMessage>& messages,
                                       int n, double temperature) {
  if (n < 1) throw InvalidParams("chat_complete requires n >= 1");
  json body;
  body["model"] = client.config().model;
  body["messages"] = json::array();
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  body["n"] = n;
  body["temperature"] = temperature;

  const bool cacheable = temperature <= 0.0 || client.config().cache_sampled;
  const json resp = client.post("chat", "/v1/chat/completions", body, cacheable);
  if (!resp.is_object() || !resp.contains("choices") || !resp["choices"].is_array()) {
    throw MalformedResponse("chat response lacks a choices array");
  }

  std::map<long long, std::string> by_index;
  long long next = 0;
  for (const auto& choice : resp["choices"]) {
    long long idx = next;
    if (choice.contains("index") && choice["index"].is_number_integer()) idx = choice["index"].get<long long>();
    ++next;
    std::string content;
    if (choice.contains("message") && choice["message"].is_object()) {
      const auto& msg = choice["message"];
      if (msg.contains("content") && msg["content"].is_string()) content = msg["content"].get<std::string>();
    } else if (choice.contains("text") && choice["text"].is_string()) {
      content = choice["text"].get<std::string>();
    }
    by_index[idx] = std::move(content);
  }
  std::vector<std::string> out;
  out.reserve(by_index.size());
  for (auto& [idx, content] : by_index) out.push_back(std::move(content));
  return out;
}

}  // namespace lela
