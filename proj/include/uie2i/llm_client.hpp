#pragma once

// Provider-agnostic chat client. Fixture mode replays responses stored under
// the SHA-256 of the canonical request; live mode speaks the common
// chat-completions HTTP contract. Retries and rate limiting are decorators.

#include <chrono>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "httplib.h"
#include "uie2i/image.hpp"

namespace uie2i {

struct ChatMessage {
  std::string role = "user";
  std::string text;
  std::optional<RgbImage> image;
};

struct ChatRequest {
  std::string model;
  double temperature = 0.2;
  std::vector<ChatMessage> messages;
};

/// Canonical request identity. Images enter through their pixel hash, so the
/// key does not depend on PNG encoder settings.
inline std::string request_hash(const ChatRequest& req) {
  Json msgs = Json::array();
  for (const auto& m : req.messages) {
    Json jm = {{"role", m.role}, {"text", m.text}};
    if (m.image) jm["image_sha256"] = pixel_hash(*m.image);
    msgs.push_back(std::move(jm));
  }
  return json_hash(Json{{"model", req.model}, {"temperature", req.temperature}, {"messages", msgs}});
}

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string submit(const ChatRequest& req) = 0;
};

struct LlmSettings {
  std::string endpoint;  // e.g. https://api.openai.com/v1/chat/completions
  std::string model = "gpt-4o";
  double temperature = 0.2;
  int max_retries = 3;
  double requests_per_minute = 60;
  std::string api_key_env = "OPENAI_API_KEY";
  std::string fixture_dir;
  int timeout_seconds = 120;
  int backoff_initial_ms = 500;
  bool operator==(const LlmSettings&) const = default;
};

inline void to_json(Json& j, const LlmSettings& s) {
  j = Json{{"endpoint", s.endpoint},
           {"model", s.model},
           {"temperature", s.temperature},
           {"max_retries", s.max_retries},
           {"requests_per_minute", s.requests_per_minute},
           {"api_key_env", s.api_key_env},
           {"fixture_dir", s.fixture_dir},
           {"timeout_seconds", s.timeout_seconds},
           {"backoff_initial_ms", s.backoff_initial_ms}};
}
inline void from_json(const Json& j, LlmSettings& s) {
  s = LlmSettings{};
  s.endpoint = j.value("endpoint", s.endpoint);
  s.model = j.value("model", s.model);
  s.temperature = j.value("temperature", s.temperature);
  s.max_retries = j.value("max_retries", s.max_retries);
  s.requests_per_minute = j.value("requests_per_minute", s.requests_per_minute);
  s.api_key_env = j.value("api_key_env", s.api_key_env);
  s.fixture_dir = j.value("fixture_dir", s.fixture_dir);
  s.timeout_seconds = j.value("timeout_seconds", s.timeout_seconds);
  s.backoff_initial_ms = j.value("backoff_initial_ms", s.backoff_initial_ms);
  if (s.max_retries < 0) throw DataError("llm.max_retries must be >= 0");
  if (s.requests_per_minute < 0) throw DataError("llm.requests_per_minute must be >= 0");
}

inline std::string redact(std::string text, const std::string& secret) {
  if (secret.empty()) return text;
  for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos + 3))
    text.replace(pos, secret.size(), "***");
  return text;
}

class FixtureClient : public LlmClient {
 public:
  explicit FixtureClient(fs::path dir) : dir_(std::move(dir)) {
    if (!fs::is_directory(dir_)) throw DataError("fixture store not found: " + dir_.string());
  }
  fs::path path_for(const ChatRequest& req) const { return dir_ / (request_hash(req) + ".txt"); }
  std::string submit(const ChatRequest& req) override {
    const auto path = path_for(req);
    if (!fs::exists(path)) throw LlmError("no fixture for request " + path.filename().string(), false);
    return read_file(path);
  }

 private:
  fs::path dir_;
};

/// Forwards to another client and stores each response under its request hash.
class RecordingClient : public LlmClient {
 public:
  RecordingClient(LlmClient& inner, fs::path dir) : inner_(inner), dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }
  std::string submit(const ChatRequest& req) override {
    auto text = inner_.submit(req);
    std::lock_guard lock(mu_);
    write_file(dir_ / (request_hash(req) + ".txt"), text);
    return text;
  }

 private:
  LlmClient& inner_;
  fs::path dir_;
  std::mutex mu_;
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;

inline void real_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

/// Retries retryable failures with exponential backoff (initial, 2x, 4x, ...).
class RetryingClient : public LlmClient {
 public:
  RetryingClient(LlmClient& inner, int max_retries, std::chrono::milliseconds initial_backoff,
                 SleepFn sleep = real_sleep)
      : inner_(inner), max_retries_(max_retries), backoff_(initial_backoff), sleep_(std::move(sleep)) {}

  std::string submit(const ChatRequest& req) override {
    auto delay = backoff_;
    for (int attempt = 0;; ++attempt) {
      try {
        return inner_.submit(req);
      } catch (const LlmError& e) {
        if (!e.retryable || attempt >= max_retries_) throw;
        log_event("warn", "llm_retry", {{"attempt", attempt + 1}, {"error", e.what()}});
        sleep_(delay);
        delay *= 2;
      }
    }
  }

 private:
  LlmClient& inner_;
  int max_retries_;
  std::chrono::milliseconds backoff_;
  SleepFn sleep_;
};

/// Global requests-per-minute budget shared by every caller of one client.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;
  explicit RateLimiter(double requests_per_minute, SleepFn sleep = real_sleep)
      : interval_(requests_per_minute > 0
                      ? std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(60.0 / requests_per_minute))
                      : Clock::duration::zero()),
        sleep_(std::move(sleep)) {}

  void acquire() {
    if (interval_ == Clock::duration::zero()) return;
    Clock::time_point slot;
    {
      std::lock_guard lock(mu_);
      const auto now = Clock::now();
      slot = std::max(now, next_);
      next_ = slot + interval_;
    }
    const auto wait = slot - Clock::now();
    if (wait > Clock::duration::zero()) sleep_(std::chrono::ceil<std::chrono::milliseconds>(wait));
  }

 private:
  Clock::duration interval_;
  SleepFn sleep_;
  std::mutex mu_;
  Clock::time_point next_{};
};

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InvalidInput("endpoint must be an absolute URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

/// Request body in the chat-completions shape: a single user turn whose
/// content is the prompt text plus, for image messages, a base64 PNG data URL.
inline Json chat_completion_body(const ChatRequest& req) {
  Json messages = Json::array();
  for (const auto& m : req.messages) {
    Json content = Json::array();
    content.push_back({{"type", "text"}, {"text", m.text}});
    if (m.image)
      content.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:image/png;base64," + base64_encode(encode_png(*m.image))}}}});
    messages.push_back({{"role", m.role}, {"content", content}});
  }
  return Json{{"model", req.model}, {"temperature", req.temperature}, {"messages", messages}};
}

class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(LlmSettings settings, SleepFn sleep = real_sleep)
      : settings_(std::move(settings)), url_(split_url(settings_.endpoint)),
        limiter_(settings_.requests_per_minute, std::move(sleep)) {
    if (!settings_.api_key_env.empty())
      if (const char* key = std::getenv(settings_.api_key_env.c_str())) api_key_ = key;
  }

  std::string submit(const ChatRequest& req) override {
    limiter_.acquire();
    httplib::Client cli(url_.origin);
    cli.set_connection_timeout(std::chrono::seconds(30));
    cli.set_read_timeout(std::chrono::seconds(settings_.timeout_seconds));
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    const auto res = cli.Post(url_.path, headers, chat_completion_body(req).dump(), "application/json");
    if (!res) throw LlmError("transport error: " + httplib::to_string(res.error()), true);
    if (res->status == 429 || res->status >= 500)
      throw LlmError("provider returned HTTP " + std::to_string(res->status), true);
    if (res->status != 200)
      throw LlmError(redact("provider returned HTTP " + std::to_string(res->status) + ": " + res->body, api_key_),
                     false);
    try {
      const Json body = Json::parse(res->body);
      return body.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const Json::exception& e) {
      throw LlmError(std::string("malformed provider response: ") + e.what(), false);
    }
  }

 private:
  LlmSettings settings_;
  ParsedUrl url_;
  RateLimiter limiter_;
  std::string api_key_;
};

/// Client stack for the given settings: fixture replay when fixture_dir is
/// set, otherwise the live HTTP client; both wrapped in retries.
class ConfiguredClient : public LlmClient {
 public:
  explicit ConfiguredClient(const LlmSettings& s, SleepFn sleep = real_sleep) {
    if (!s.fixture_dir.empty()) base_ = std::make_unique<FixtureClient>(s.fixture_dir);
    else if (!s.endpoint.empty()) base_ = std::make_unique<HttpLlmClient>(s, sleep);
    else throw InvalidInput("llm settings need either fixture_dir or endpoint");
    retry_ = std::make_unique<RetryingClient>(*base_, s.max_retries,
                                              std::chrono::milliseconds(s.backoff_initial_ms), sleep);
  }
  std::string submit(const ChatRequest& req) override { return retry_->submit(req); }

 private:
  std::unique_ptr<LlmClient> base_;
  std::unique_ptr<RetryingClient> retry_;
};

}  // namespace uie2i
