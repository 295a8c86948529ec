#include "mcnest/llm.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "mcnest/errors.hpp"

namespace mcnest {

namespace {

using nlohmann::json;

void validate_request(const ModelRequest& request) {
  if (request.messages.empty()) {
    throw_error(ErrorCode::invalid_argument, "model request needs at least one message");
  }
  for (const Message& m : request.messages) {
    if (m.role != "system" && m.role != "user" && m.role != "assistant") {
      throw_error(ErrorCode::invalid_argument, "unknown message role '" + m.role + "'");
    }
  }
  if (request.max_tokens < 1) {
    throw_error(ErrorCode::invalid_argument, "max_tokens must be >= 1");
  }
  if (!(request.temperature >= 0.0)) {
    throw_error(ErrorCode::invalid_argument, "temperature must be >= 0");
  }
}

const std::string* last_user_message(const ModelRequest& request) {
  for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
    if (it->role == "user") {
      return &it->content;
    }
  }
  return nullptr;
}

std::string body_excerpt(const std::string& body, std::size_t limit = 200) {
  if (body.size() <= limit) {
    return body;
  }
  return body.substr(0, limit) + "...";
}

// httplib wants scheme://host[:port] and the path separately.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
  const std::size_t scheme = base_url.find("://");
  if (scheme == std::string::npos) {
    throw_error(ErrorCode::config, "base URL must include a scheme: " + base_url);
  }
  const std::size_t path_start = base_url.find('/', scheme + 3);
  if (path_start == std::string::npos) {
    return {base_url, ""};
  }
  std::string prefix = base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') {
    prefix.pop_back();
  }
  return {base_url.substr(0, path_start), prefix};
}

class Semaphore {
 public:
  explicit Semaphore(int count) : count_(count > 0 ? count : 1) {}

  void acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [this] { return count_ > 0; });
    --count_;
  }

  void release() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      ++count_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int count_;
};

struct SemaphoreGuard {
  explicit SemaphoreGuard(Semaphore& s) : sem(s) { sem.acquire(); }
  ~SemaphoreGuard() { sem.release(); }
  Semaphore& sem;
};

}  // namespace

std::string ModelClient::complete(const ModelRequest& request) {
  validate_request(request);
  if (log_enabled_) {
    std::lock_guard<std::mutex> lock(log_mutex_);
    log_.push_back(request);
  }
  count_.fetch_add(1);
  return do_complete(request);
}

std::vector<ModelRequest> ModelClient::call_log() const {
  if (!log_enabled_) {
    throw_error(ErrorCode::config, "call log requested but logging is disabled");
  }
  std::lock_guard<std::mutex> lock(log_mutex_);
  return log_;
}

ScriptedClient::ScriptedClient(std::vector<TranscriptEntry> entries, bool log_calls)
    : ModelClient(log_calls), entries_(std::move(entries)) {}

std::vector<TranscriptEntry> ScriptedClient::parse_transcript(const json& doc) {
  if (!doc.is_array()) {
    throw_error(ErrorCode::parse, "transcript must be a JSON array");
  }
  std::vector<TranscriptEntry> entries;
  entries.reserve(doc.size());
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("response") || !item["response"].is_string()) {
      throw_error(ErrorCode::parse,
                  "transcript entry " + std::to_string(entries.size()) +
                      " must be an object with a string 'response'");
    }
    TranscriptEntry entry;
    entry.response = item["response"].get<std::string>();
    if (item.contains("match") && !item["match"].is_null()) {
      if (!item["match"].is_string()) {
        throw_error(ErrorCode::parse, "transcript 'match' must be a string");
      }
      entry.match = item["match"].get<std::string>();
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::unique_ptr<ScriptedClient> ScriptedClient::from_json_text(const std::string& text,
                                                               bool log_calls) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& ex) {
    throw_error(ErrorCode::parse, std::string("transcript is not valid JSON: ") + ex.what());
  }
  return std::make_unique<ScriptedClient>(parse_transcript(doc), log_calls);
}

std::unique_ptr<ScriptedClient> ScriptedClient::open_file(const std::filesystem::path& path,
                                                          bool log_calls) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw_error(ErrorCode::io, "cannot open transcript file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_json_text(buffer.str(), log_calls);
}

std::size_t ScriptedClient::remaining() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size() - cursor_;
}

std::string ScriptedClient::do_complete(const ModelRequest& request) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (cursor_ >= entries_.size()) {
    throw_error(ErrorCode::transcript,
                "transcript exhausted after " + std::to_string(entries_.size()) + " entries");
  }
  const TranscriptEntry& entry = entries_[cursor_];
  if (entry.match) {
    const std::string* user = last_user_message(request);
    if (user == nullptr || user->find(*entry.match) == std::string::npos) {
      throw_error(ErrorCode::transcript,
                  "transcript entry " + std::to_string(cursor_) + " expects the user message "
                  "to contain \"" + *entry.match + "\"");
    }
  }
  ++cursor_;
  return entry.response;
}

struct HttpChatClient::Impl {
  HttpClientConfig config;
  std::string host;
  std::string path_prefix;
  Semaphore semaphore;

  explicit Impl(HttpClientConfig cfg)
      : config(std::move(cfg)), semaphore(config.max_concurrent) {
    if (config.base_url.empty()) {
      throw_error(ErrorCode::config, "model API base URL is not configured");
    }
    auto [h, prefix] = split_base_url(config.base_url);
    if (h.rfind("https://", 0) == 0) {
      throw_error(ErrorCode::config, "https endpoints are not supported by this build; "
                                     "use an http gateway or local proxy");
    }
    host = h;
    path_prefix = prefix;
  }
};

HttpChatClient::HttpChatClient(HttpClientConfig config)
    : ModelClient(config.log_calls), impl_(std::make_unique<Impl>(std::move(config))) {}

HttpChatClient::~HttpChatClient() = default;

int HttpChatClient::suggested_workers() const noexcept {
  return impl_->config.max_concurrent;
}

HttpClientConfig HttpChatClient::config_from_env() {
  HttpClientConfig config;
  if (const char* base = std::getenv("MODEL_API_BASE")) {
    config.base_url = base;
  }
  if (const char* key = std::getenv("MODEL_API_KEY")) {
    config.api_key = key;
  }
  if (const char* name = std::getenv("MODEL_NAME")) {
    config.model_name = name;
  }
  return config;
}

std::string HttpChatClient::do_complete(const ModelRequest& request) {
  SemaphoreGuard guard(impl_->semaphore);

  json body;
  body["model"] = request.model_name.empty() ? impl_->config.model_name : request.model_name;
  body["messages"] = json::array();
  for (const Message& m : request.messages) {
    body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }
  body["max_tokens"] = request.max_tokens;
  body["temperature"] = request.temperature;
  const std::string payload = body.dump();

  const std::string path = impl_->path_prefix + "/chat/completions";
  std::string last_failure = "no attempt made";
  ErrorCode last_code = ErrorCode::transport;
  int attempts_used = 0;

  for (int attempt = 1; attempt <= impl_->config.max_attempts; ++attempt) {
    attempts_used = attempt;
    if (attempt > 1) {
      const auto delay =
          std::chrono::milliseconds(impl_->config.backoff_ms) * (1LL << (attempt - 2));
      std::this_thread::sleep_for(delay);
    }

    httplib::Client client(impl_->host);
    client.set_connection_timeout(impl_->config.timeout_seconds, 0);
    client.set_read_timeout(impl_->config.timeout_seconds, 0);
    client.set_write_timeout(impl_->config.timeout_seconds, 0);
    httplib::Headers headers;
    if (!impl_->config.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + impl_->config.api_key);
    }

    auto result = client.Post(path, headers, payload, "application/json");
    if (!result) {
      const auto err = result.error();
      last_code = err == httplib::Error::ConnectionTimeout ? ErrorCode::timeout
                                                           : ErrorCode::transport;
      last_failure = "connection to " + impl_->host + " failed: " + httplib::to_string(err);
      continue;
    }

    const int status = result->status;
    if (status >= 200 && status < 300) {
      json doc;
      try {
        doc = json::parse(result->body);
      } catch (const json::exception& ex) {
        throw_error(ErrorCode::transport,
                    std::string("malformed response body: ") + ex.what() + " in \"" +
                        body_excerpt(result->body) + "\"");
      }
      if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty() ||
          !doc["choices"][0].contains("message") ||
          !doc["choices"][0]["message"].contains("content") ||
          !doc["choices"][0]["message"]["content"].is_string()) {
        throw_error(ErrorCode::transport, "response has no choices[0].message.content: \"" +
                                              body_excerpt(result->body) + "\"");
      }
      return doc["choices"][0]["message"]["content"].get<std::string>();
    }

    last_code = ErrorCode::transport;
    last_failure = "HTTP " + std::to_string(status) + ": \"" + body_excerpt(result->body) + "\"";
    const bool retryable = status == 429 || status >= 500;
    if (!retryable) {
      break;
    }
  }

  throw_error(last_code,
              last_failure + " (after " + std::to_string(attempts_used) + " attempt" +
                  (attempts_used == 1 ? "" : "s") + ")");
}

}  // namespace mcnest
