#include <random>
#include <thread>

#include <spdlog/spdlog.h>

#include "httplib.h"
#include "lela/backends.hpp"
#include "lela/errors.hpp"

namespace lela {

namespace {

std::chrono::milliseconds backoff_delay(std::chrono::milliseconds base, int attempt) {
  thread_local std::mt19937 rng{std::random_device{}()};
  const auto delay = base * (1LL << std::min(attempt, 20));
  std::uniform_int_distribution<long long> jitter(0, std::max<long long>(0, delay.count() / 10));
  return delay + std::chrono::milliseconds(jitter(rng));
}

}  // namespace

std::string JsonClient::send(std::string_view path, const std::string& body) const {
  const std::string full_path = url_.path_prefix + std::string(path);

  httplib::Headers headers;
  if (config_.api_key) headers.emplace("Authorization", "Bearer " + *config_.api_key);

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      stats_.retries.fetch_add(1);
      std::this_thread::sleep_for(backoff_delay(config_.backoff_base, attempt - 1));
    }
    httplib::Client client(url_.origin());
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    stats_.requests.fetch_add(1);
    auto res = client.Post(full_path, headers, body, "application/json");
    if (!res) {
      last_error = "request to " + url_.origin() + full_path + " failed: " + httplib::to_string(res.error());
      spdlog::debug("{} (attempt {})", last_error, attempt + 1);
      continue;
    }
    if (res->status >= 500) {
      last_error = "server error " + std::to_string(res->status) + " from " + full_path;
      spdlog::debug("{} (attempt {})", last_error, attempt + 1);
      continue;
    }
    if (res->status >= 400) throw ApiError(res->status, res->body);
    if (res->status < 200 || res->status >= 300) {
      throw ApiError(res->status, res->body);
    }
    return res->body;
  }
  throw TransportError(last_error + " after " + std::to_string(config_.max_retries + 1) + " attempts");
}

}  // namespace lela
