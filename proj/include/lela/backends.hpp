#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "lela/types.hpp"

namespace lela {

inline constexpr const char* kApiKeyEnv = "LELA_API_KEY";

struct BackendConfig {
  std::string base_url = "http://localhost:8000";
  std::string model;
  std::optional<std::string> api_key;
  std::chrono::milliseconds timeout{120'000};
  int max_retries = 3;
  std::size_t max_in_flight = 8;
  /// Retry delay is backoff_base * 2^attempt plus up to 10% jitter.
  std::chrono::milliseconds backoff_base{500};
  /// Cache responses of sampled (temperature > 0) requests too.
  bool cache_sampled = true;

  /// Reads base_url, model (or model_name), api_key, timeout (s), max_retries,
  /// max_in_flight, backoff_ms and cache_sampled from component params. The
  /// LELA_API_KEY environment variable overrides api_key when set. Throws
  /// InvalidParams when base_url is not an absolute http(s) URL.
  static BackendConfig from_params(const json& params, std::string_view default_model = "");
};

struct ParsedUrl {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string path_prefix;  // no trailing slash, may be empty

  std::string origin() const;
};

/// Throws InvalidParams unless `url` is an absolute http(s) URL.
ParsedUrl parse_base_url(std::string_view url);

/// Content address of a logical request. Insensitive to JSON key order and
/// whitespace in the body.
struct CacheKey {
  std::string digest;  // lowercase hex SHA-256

  static CacheKey make(std::string_view kind, std::string_view model, const json& body);
  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

std::string sha256_hex(std::string_view data);

/// Persistent content-addressed store of raw response bodies. Storage errors
/// switch the cache off with a warning instead of failing the caller.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const CacheKey& key) const;
  void put(const CacheKey& key, std::string_view value);
  bool enabled() const { return enabled_.load(); }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_for(const CacheKey& key) const;
  void disable(const std::string& why) const;

  std::filesystem::path dir_;
  mutable std::atomic<bool> enabled_{true};
};

struct ClientStats {
  std::atomic<std::size_t> requests{0};  // HTTP attempts sent
  std::atomic<std::size_t> retries{0};
  std::atomic<std::size_t> cache_hits{0};
};

/// JSON-over-HTTP client shared by every remote component: cache lookup,
/// bounded in-flight requests, and retry with exponential backoff on transport
/// errors and 5xx. 4xx responses raise ApiError immediately.
class JsonClient {
 public:
  JsonClient(BackendConfig config, std::shared_ptr<ResponseCache> cache);
  ~JsonClient();
  JsonClient(const JsonClient&) = delete;
  JsonClient& operator=(const JsonClient&) = delete;

  /// `kind` names the endpoint family in the cache key ("chat", "embeddings").
  json post(std::string_view kind, std::string_view path, const json& body, bool cacheable = true) const;

  const BackendConfig& config() const { return config_; }
  const ClientStats& stats() const { return stats_; }

 private:
  std::string send(std::string_view path, const std::string& body) const;

  BackendConfig config_;
  ParsedUrl url_;
  std::shared_ptr<ResponseCache> cache_;
  mutable ClientStats stats_;
  mutable std::counting_semaphore<1024> in_flight_;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

/// POST {base}/v1/chat/completions with n samples; returns the message
/// contents in choice order.
std::vector<std::string> chat_complete(const JsonClient& client, const std::vector<ChatMessage>& messages,
                                       int n, double temperature);

}  // namespace lela
