#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcnest/llm_types.hpp"

namespace mcnest {

/// Base model client. complete() validates the request, appends it to the
/// call log (when enabled), bumps the call counter and delegates to the
/// concrete transport. Safe to share across threads.
class ModelClient {
 public:
  virtual ~ModelClient() = default;

  std::string complete(const ModelRequest& request);

  long long call_count() const noexcept { return count_.load(); }
  bool logging_enabled() const noexcept { return log_enabled_; }

  /// All requests in issue order. Requires a client created with logging.
  std::vector<ModelRequest> call_log() const;

  /// Worker-pool hint for batch evaluation over this client.
  virtual int suggested_workers() const noexcept { return 1; }

 protected:
  explicit ModelClient(bool log_calls) : log_enabled_(log_calls) {}
  virtual std::string do_complete(const ModelRequest& request) = 0;

 private:
  bool log_enabled_;
  std::atomic<long long> count_{0};
  mutable std::mutex log_mutex_;
  std::vector<ModelRequest> log_;
};

/// One canned exchange: when `match` is set, the outgoing user message must
/// contain it as a substring.
struct TranscriptEntry {
  std::optional<std::string> match;
  std::string response;
};

/// Deterministic mock that replays a transcript in order. Each entry is
/// consumed exactly once; running past the end or failing a match filter is a
/// transcript error.
class ScriptedClient : public ModelClient {
 public:
  explicit ScriptedClient(std::vector<TranscriptEntry> entries, bool log_calls = true);

  static std::vector<TranscriptEntry> parse_transcript(const nlohmann::json& doc);
  static std::unique_ptr<ScriptedClient> from_json_text(const std::string& text,
                                                        bool log_calls = true);
  static std::unique_ptr<ScriptedClient> open_file(const std::filesystem::path& path,
                                                   bool log_calls = true);

  std::size_t remaining() const;

 protected:
  std::string do_complete(const ModelRequest& request) override;

 private:
  mutable std::mutex mutex_;
  std::vector<TranscriptEntry> entries_;
  std::size_t cursor_ = 0;
};

struct HttpClientConfig {
  std::string base_url;  // e.g. http://localhost:8080/v1
  std::string api_key;
  std::string model_name;
  int timeout_seconds = 120;
  int max_attempts = 3;
  int backoff_ms = 250;
  int max_concurrent = 4;
  bool log_calls = false;
};

/// Chat-completions client: POSTs {model, messages, max_tokens, temperature}
/// to <base_url>/chat/completions and returns the first choice's message
/// content. Retries transport-level failures with exponential backoff and
/// bounds in-flight requests with an internal semaphore.
class HttpChatClient : public ModelClient {
 public:
  explicit HttpChatClient(HttpClientConfig config);
  ~HttpChatClient() override;

  /// Reads MODEL_API_BASE, MODEL_API_KEY and MODEL_NAME.
  static HttpClientConfig config_from_env();

  int suggested_workers() const noexcept override;

 protected:
  std::string do_complete(const ModelRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mcnest
