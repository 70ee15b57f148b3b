#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "doctest.h"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "semvote/error.hpp"
#include "semvote/llm_gateway.hpp"
#include "semvote/prompts.hpp"
#include "semvote/util.hpp"

using namespace semvote;
using namespace semvote::llm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("semvote_gw_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

class CountingProvider final : public ChatProvider {
 public:
  ChatReply chat(const ChatRequest& r) override {
    ++calls;
    return {"reply " + std::to_string(r.sample_index) + " for " + r.prompt_hash.substr(0, 8), 3, 4};
  }
  std::string name() const override { return "counting"; }
  std::atomic<int> calls{0};
};

class FlakyProvider final : public ChatProvider {
 public:
  explicit FlakyProvider(int failures, bool transient) : failures_(failures), transient_(transient) {}
  ChatReply chat(const ChatRequest&) override {
    if (calls++ < failures_) throw ProviderFailure(transient_, "boom");
    return {"fine", 0, 0};
  }
  std::string name() const override { return "flaky"; }
  int calls = 0;

 private:
  int failures_;
  bool transient_;
};

struct EnvGuard {
  std::string name;
  explicit EnvGuard(std::string n, const char* value) : name(std::move(n)) {
    if (value) ::setenv(name.c_str(), value, 1);
    else ::unsetenv(name.c_str());
  }
  ~EnvGuard() { ::unsetenv(name.c_str()); }
};

}  // namespace

TEST_CASE("cache key path layout") {
  SamplingParams p;
  p.temperature = 0.8;
  p.thinking_level = ThinkingLevel::kMedium;
  auto key = make_cache_key("vendor/model-x", p, "hello", 7);
  CHECK(key.prompt_hash == sha256_hex("hello"));
  CHECK(key.str() == "vendor_model-x/medium/" + sha256_hex("hello") + "/t0.8/7.json");
}

TEST_CASE("request body carries sampling parameters") {
  ChatRequest r{"m1", "say hi", sha256_hex("say hi"), {}, 0};
  r.params.temperature = 0.8;
  auto body = json::parse(render_request_body(r));
  CHECK(body["model"] == "m1");
  CHECK(body["messages"][0]["role"] == "user");
  CHECK(body["messages"][0]["content"] == "say hi");
  CHECK(body["temperature"] == 0.8);
  CHECK(body["thinking_level"] == "low");
  CHECK(body["n"] == 1);
  CHECK_FALSE(body.contains("top_p"));
  r.params.top_p = 0.95;
  CHECK(json::parse(render_request_body(r))["top_p"] == 0.95);
}

TEST_CASE("response body parsing") {
  auto reply = parse_response_body(R"({"choices":[{"message":{"content":"x = 1"}}],"usage":{"prompt_tokens":5,"completion_tokens":2}})");
  CHECK(reply.text == "x = 1");
  CHECK(reply.prompt_tokens == 5);
  CHECK(reply.completion_tokens == 2);
  CHECK_THROWS_AS(parse_response_body(R"({"choices":[]})"), ProviderFailure);
  CHECK_THROWS_AS(parse_response_body("not json"), ProviderFailure);
}

TEST_CASE("second identical request is served from cache with zero network calls") {
  auto dir = scratch("cache");
  auto provider = std::make_shared<CountingProvider>();
  SamplingParams p;
  std::string first;
  {
    Gateway gw(provider, ResponseCache(dir), "m", 0, std::chrono::milliseconds(1));
    first = gw.complete("prompt", p, 2);
    CHECK(gw.network_calls() == 1);
  }
  Gateway again(provider, ResponseCache(dir), "m", 0, std::chrono::milliseconds(1));
  CHECK(again.complete("prompt", p, 2) == first);
  CHECK(again.network_calls() == 0);
  CHECK(provider->calls == 1);
  // A different sample index or temperature is a different key.
  again.complete("prompt", p, 3);
  p.temperature = 0.0;
  again.complete("prompt", p, 2);
  CHECK(again.network_calls() == 2);
}

TEST_CASE("cache round-trips text byte-exactly and never stores the key") {
  auto dir = scratch("bytes");
  EnvGuard env("SEMVOTE_TEST_SECRET", "sk-very-secret-123");
  std::string tricky = "line1\n\ttab \"quote\" \\ back\x01\x1f end \xc3\xa9\r\n";
  ResponseCache cache(dir);
  SamplingParams p;
  auto key = make_cache_key("m", p, "q", 0);
  cache.store(key, ChatRequest{"m", "q", key.prompt_hash, p, 0}, ChatReply{tricky, 1, 1});
  auto loaded = cache.load(key);
  REQUIRE(loaded);
  CHECK(*loaded == tricky);
  auto raw = read_file(dir / key.relative_path());
  CHECK(raw.find("sk-very-secret-123") == std::string::npos);
  auto doc = json::parse(raw);
  CHECK(doc.contains("request"));
  CHECK(doc.contains("timestamp"));
  // Entries are immutable once written.
  cache.store(key, ChatRequest{"m", "q", key.prompt_hash, p, 0}, ChatReply{"other", 1, 1});
  CHECK(*cache.load(key) == tricky);
}

TEST_CASE("transient failures are retried, permanent ones are not") {
  SamplingParams p;
  {
    auto flaky = std::make_shared<FlakyProvider>(2, true);
    Gateway gw(flaky, std::nullopt, "m", 4, std::chrono::milliseconds(1));
    CHECK(gw.complete("x", p) == "fine");
    CHECK(gw.retries() == 2);
    CHECK(gw.network_calls() == 3);
  }
  {
    auto flaky = std::make_shared<FlakyProvider>(10, true);
    Gateway gw(flaky, std::nullopt, "m", 2, std::chrono::milliseconds(1));
    try {
      gw.complete("x", p);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kProviderUnavailable);
    }
    CHECK(flaky->calls == 3);
  }
  {
    auto flaky = std::make_shared<FlakyProvider>(1, false);
    Gateway gw(flaky, std::nullopt, "m", 4, std::chrono::milliseconds(1));
    CHECK_THROWS_AS(gw.complete("x", p), Error);
    CHECK(flaky->calls == 1);
    CHECK(gw.retries() == 0);
  }
}

TEST_CASE("missing API key is a configuration error") {
  EnvGuard env("SEMVOTE_TEST_ABSENT_KEY", nullptr);
  ProviderConfig cfg;
  cfg.api_key_env = "SEMVOTE_TEST_ABSENT_KEY";
  try {
    make_http_provider(cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
    CHECK(std::string(e.what()).find("SEMVOTE_TEST_ABSENT_KEY") != std::string::npos);
  }
}

TEST_CASE("HTTP provider retries a 503 then succeeds") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth, seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (hits++ == 0) {
      res.status = 503;
      res.set_content("busy", "text/plain");
      return;
    }
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    res.set_content(R"({"choices":[{"message":{"content":"def f(): pass"}}]})", "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  EnvGuard env("SEMVOTE_TEST_KEY", "sk-abc");
  ProviderConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  cfg.api_key_env = "SEMVOTE_TEST_KEY";
  auto dir = scratch("http");
  Gateway gw(make_http_provider(cfg), ResponseCache(dir), "model-y", 3, std::chrono::milliseconds(5));
  SamplingParams p;
  CHECK(gw.complete("write f", p, 0) == "def f(): pass");
  CHECK(gw.retries() == 1);
  CHECK(hits == 2);
  CHECK(seen_auth == "Bearer sk-abc");
  CHECK(json::parse(seen_body)["model"] == "model-y");
  auto raw = read_file(dir / make_cache_key("model-y", p, "write f", 0).relative_path());
  CHECK(raw.find("sk-abc") == std::string::npos);

  server.stop();
  t.join();
}

TEST_CASE("HTTP provider gives up after repeated server errors") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 429;
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  EnvGuard env("SEMVOTE_TEST_KEY", "k");
  ProviderConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  cfg.api_key_env = "SEMVOTE_TEST_KEY";
  Gateway gw(make_http_provider(cfg), std::nullopt, "m", 2, std::chrono::milliseconds(1));
  CHECK_THROWS_AS(gw.complete("p", SamplingParams{}), Error);
  CHECK(hits == 3);
  server.stop();
  t.join();
}

TEST_CASE("fixture provider serves hash-keyed responses") {
  auto dir = scratch("fixture");
  Problem prob{"T/0", "def f(x):\n    \"\"\"id\"\"\"\n", "f", {}, ""};
  auto prompt = prompts::candidate_prompt(prob.prompt);
  json doc;
  doc["samples"] = {"    return x\n", "    return x + 0\n"};
  doc["greedy"] = "    return x\n";
  write_file_atomic(dir / (sha256_hex(prompt) + ".json"), doc.dump());
  Gateway gw(make_fixture_provider(dir), std::nullopt, "fixture");
  SamplingParams p;
  auto outs = sample_candidates(prob, 3, p, gw);
  REQUIRE(outs.size() == 3);
  CHECK(outs[0].text == "    return x\n");
  CHECK(outs[1].text == "    return x + 0\n");
  CHECK(outs[2].text == "    return x\n");
  p.temperature = 0.0;
  CHECK(gw.complete(prompt, p) == "    return x\n");
  CHECK_THROWS_AS(gw.complete("unknown prompt", p), Error);
  CHECK_THROWS_AS(make_fixture_provider(dir / "missing"), Error);
}
