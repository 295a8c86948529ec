#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mcnest/errors.hpp"
#include "mcnest/llm.hpp"

using namespace mcnest;
using nlohmann::json;

namespace {

ModelRequest user_request(const std::string& text) {
  ModelRequest request;
  request.messages = {{"user", text}};
  return request;
}

/// Local chat-completions stub bound to an ephemeral port.
struct StubServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> hits{0};
  std::string last_body;
  std::mutex body_mutex;

  StubServer() {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                               httplib::Response& res) {
      hits++;
      {
        std::lock_guard<std::mutex> lock(body_mutex);
        last_body = req.body;
      }
      json reply = {{"choices", {{{"message", {{"content", "stub says 42"}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    server.Post("/broken/chat/completions",
                [this](const httplib::Request&, httplib::Response& res) {
                  hits++;
                  res.status = 500;
                  res.set_content("boom", "text/plain");
                });
    server.Post("/teapot/chat/completions",
                [](const httplib::Request&, httplib::Response& res) {
                  res.status = 418;
                  res.set_content("{\"error\":\"no\"}", "application/json");
                });
    port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~StubServer() {
    server.stop();
    thread.join();
  }

  std::string url(const std::string& prefix) const {
    return "http://127.0.0.1:" + std::to_string(port) + prefix;
  }
};

HttpClientConfig fast_config(const std::string& base_url) {
  HttpClientConfig config;
  config.base_url = base_url;
  config.model_name = "test-model";
  config.timeout_seconds = 5;
  config.backoff_ms = 1;
  return config;
}

}  // namespace

TEST_CASE("scripted client replays entries in order") {
  ScriptedClient client({{std::nullopt, "87"}});
  CHECK(client.complete(user_request("anything")) == "87");
  CHECK(client.remaining() == 0);

  // Exhaustion is a transcript error.
  try {
    client.complete(user_request("again"));
    FAIL("expected transcript error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::transcript);
  }
}

TEST_CASE("scripted client match filters check the outgoing user message") {
  ScriptedClient client(std::vector<TranscriptEntry>{{"critique", "ok"}});
  try {
    client.complete(user_request("no such word"));
    FAIL("expected transcript error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::transcript);
    CHECK(std::string(e.what()).find("critique") != std::string::npos);
  }

  ScriptedClient matching(std::vector<TranscriptEntry>{{"critique", "ok"}});
  CHECK(matching.complete(user_request("please critique this")) == "ok");
}

TEST_CASE("scripted client is deterministic over identical request sequences") {
  const std::vector<TranscriptEntry> entries = {{std::nullopt, "a"}, {std::nullopt, "b"},
                                                {std::nullopt, "c"}};
  ScriptedClient first(entries);
  ScriptedClient second(entries);
  for (const char* text : {"one", "two", "three"}) {
    CHECK(first.complete(user_request(text)) == second.complete(user_request(text)));
  }
}

TEST_CASE("transcript JSON parsing validates entries") {
  const auto client = ScriptedClient::from_json_text(
      R"([{"response":"87"},{"match":"refine","response":"{}"}])");
  CHECK(client->remaining() == 2);

  CHECK_THROWS_AS(ScriptedClient::from_json_text("{\"not\":\"a list\"}"), Error);
  CHECK_THROWS_AS(ScriptedClient::from_json_text("[{\"match\":\"x\"}]"), Error);
  CHECK_THROWS_AS(ScriptedClient::from_json_text("not json"), Error);
  CHECK_THROWS_AS(ScriptedClient::open_file("/nonexistent/transcript.json"), Error);
}

TEST_CASE("call log records requests in order when enabled") {
  ScriptedClient client({{std::nullopt, "1"}, {std::nullopt, "2"}});
  CHECK(client.call_log().empty());
  client.complete(user_request("first"));
  client.complete(user_request("second"));
  const auto log = client.call_log();
  REQUIRE(log.size() == 2);
  CHECK(log[0].messages[0].content == "first");
  CHECK(log[1].messages[0].content == "second");
  CHECK(client.call_count() == 2);

  ScriptedClient silent({{std::nullopt, "1"}}, /*log_calls=*/false);
  CHECK_THROWS_AS(silent.call_log(), Error);
}

TEST_CASE("requests are validated before hitting any transport") {
  ScriptedClient client({{std::nullopt, "1"}});
  ModelRequest bad_role;
  bad_role.messages = {{"oracle", "hi"}};
  CHECK_THROWS_AS(client.complete(bad_role), Error);
  CHECK_THROWS_AS(client.complete(ModelRequest{}), Error);
  ModelRequest bad_tokens = user_request("hi");
  bad_tokens.max_tokens = 0;
  CHECK_THROWS_AS(client.complete(bad_tokens), Error);
  CHECK(client.call_count() == 0);
}

TEST_CASE("http client returns the first choice content from a local stub") {
  StubServer stub;
  HttpChatClient client(fast_config(stub.url("/v1")));
  CHECK(client.complete(user_request("hello")) == "stub says 42");
  CHECK(stub.hits.load() == 1);
}

TEST_CASE("http client sends the exact message bytes and request shape") {
  StubServer stub;
  auto config = fast_config(stub.url("/v1"));
  config.log_calls = true;
  HttpChatClient client(config);

  ModelRequest request;
  request.messages = {{"system", "be exact"}, {"user", "bytes é\n\ttest"}};
  request.max_tokens = 77;
  request.temperature = 0.25;
  client.complete(request);

  json sent;
  {
    std::lock_guard<std::mutex> lock(stub.body_mutex);
    sent = json::parse(stub.last_body);
  }
  CHECK(sent["model"] == "test-model");
  CHECK(sent["max_tokens"] == 77);
  CHECK(sent["temperature"] == 0.25);
  REQUIRE(sent["messages"].size() == 2);
  CHECK(sent["messages"][0]["role"] == "system");
  CHECK(sent["messages"][0]["content"] == "be exact");
  CHECK(sent["messages"][1]["content"] == "bytes é\n\ttest");
}

TEST_CASE("http 5xx retries then surfaces a transport error") {
  StubServer stub;
  HttpChatClient client(fast_config(stub.url("/broken")));
  try {
    client.complete(user_request("hello"));
    FAIL("expected transport error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::transport);
    CHECK(std::string(e.what()).find("500") != std::string::npos);
  }
  CHECK(stub.hits.load() == 3);  // default max_attempts
}

TEST_CASE("http 4xx fails immediately with status and body excerpt") {
  StubServer stub;
  HttpChatClient client(fast_config(stub.url("/teapot")));
  try {
    client.complete(user_request("hello"));
    FAIL("expected transport error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::transport);
    CHECK(std::string(e.what()).find("418") != std::string::npos);
    CHECK(std::string(e.what()).find("no") != std::string::npos);
  }
}

TEST_CASE("connection failures are transport errors") {
  // Nothing listens on this port.
  HttpChatClient client(fast_config("http://127.0.0.1:1/v1"));
  try {
    client.complete(user_request("hello"));
    FAIL("expected transport error");
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::transport || e.code() == ErrorCode::timeout));
  }
}

TEST_CASE("https endpoints are rejected up front") {
  CHECK_THROWS_AS(HttpChatClient(fast_config("https://example.com/v1")), Error);
}

TEST_CASE("client config comes from the documented environment variables") {
  setenv("MODEL_API_BASE", "http://gateway:9999/v1", 1);
  setenv("MODEL_API_KEY", "secret-key", 1);
  setenv("MODEL_NAME", "env-model", 1);
  const HttpClientConfig config = HttpChatClient::config_from_env();
  CHECK(config.base_url == "http://gateway:9999/v1");
  CHECK(config.api_key == "secret-key");
  CHECK(config.model_name == "env-model");
  unsetenv("MODEL_API_BASE");
  unsetenv("MODEL_API_KEY");
  unsetenv("MODEL_NAME");
}
