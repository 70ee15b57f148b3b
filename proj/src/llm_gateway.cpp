#include "semvote/llm_gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "semvote/error.hpp"
#include "semvote/prompts.hpp"
#include "semvote/util.hpp"

namespace semvote::llm {
namespace {

std::string path_safe(std::string s) {
  for (auto& c : s) {
    if (c == '/' || c == '\\' || c == ':' || c == ' ') c = '_';
  }
  return s;
}

class HttpProvider final : public ChatProvider {
 public:
  HttpProvider(const ProviderConfig& cfg, std::string api_key) : cfg_(cfg), api_key_(std::move(api_key)) {
    auto scheme = cfg.base_url.find("://");
    if (scheme == std::string::npos) throw Error(ErrorKind::kConfig, "malformed provider URL: " + cfg.base_url);
    auto slash = cfg.base_url.find('/', scheme + 3);
    origin_ = cfg.base_url.substr(0, slash);
    prefix_ = slash == std::string::npos ? "" : cfg.base_url.substr(slash);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  }

  ChatReply chat(const ChatRequest& request) override {
    httplib::Client client(origin_);
    client.set_read_timeout(cfg_.request_timeout);
    client.set_connection_timeout(std::chrono::seconds(10));
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = client.Post(prefix_ + "/chat/completions", headers, render_request_body(request), "application/json");
    if (!res) throw ProviderFailure(true, "transport error: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500) {
      throw ProviderFailure(true, "provider returned HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) throw ProviderFailure(false, "provider returned HTTP " + std::to_string(res->status));
    return parse_response_body(res->body);
  }

  std::string name() const override { return "http:" + origin_; }

 private:
  ProviderConfig cfg_;
  std::string api_key_;
  std::string origin_;
  std::string prefix_;
};

class FixtureProvider final : public ChatProvider {
 public:
  explicit FixtureProvider(std::filesystem::path dir) : dir_(std::move(dir)) {}

  ChatReply chat(const ChatRequest& request) override {
    auto path = dir_ / (request.prompt_hash + ".json");
    if (!std::filesystem::exists(path)) {
      throw ProviderFailure(false, "no fixture response for prompt " + request.prompt_hash);
    }
    auto doc = json::parse(read_file(path));
    ChatReply reply;
    if (request.params.temperature == 0.0 && doc.contains("greedy")) {
      reply.text = doc["greedy"].get<std::string>();
      return reply;
    }
    const auto& samples = doc.at("samples");
    if (samples.empty()) throw ProviderFailure(false, "fixture has no samples: " + path.string());
    reply.text = samples.at(request.sample_index % samples.size()).get<std::string>();
    return reply;
  }

  std::string name() const override { return "fixture:" + dir_.string(); }

 private:
  std::filesystem::path dir_;
};

}  // namespace

std::filesystem::path CacheKey::relative_path() const {
  return std::filesystem::path(path_safe(model_id)) / std::string(to_string(thinking_level)) / prompt_hash /
         fmt::format("t{}", temperature) / (std::to_string(sample_index) + ".json");
}

std::string CacheKey::str() const { return relative_path().generic_string(); }

CacheKey make_cache_key(const std::string& model_id, const SamplingParams& params, const std::string& prompt,
                        std::size_t sample_index) {
  return {model_id, params.thinking_level, params.temperature, sha256_hex(prompt), sample_index};
}

std::string render_request_body(const ChatRequest& request) {
  json body;
  body["model"] = request.model_id;
  body["messages"] = json::array({json{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.params.temperature;
  body["thinking_level"] = std::string(to_string(request.params.thinking_level));
  body["n"] = 1;
  if (request.params.top_p) body["top_p"] = *request.params.top_p;
  return body.dump();
}

ChatReply parse_response_body(const std::string& body) {
  ChatReply reply;
  try {
    auto doc = json::parse(body);
    reply.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
    if (doc.contains("usage")) {
      reply.prompt_tokens = doc["usage"].value("prompt_tokens", std::size_t{0});
      reply.completion_tokens = doc["usage"].value("completion_tokens", std::size_t{0});
    }
  } catch (const json::exception& e) {
    throw ProviderFailure(false, std::string("malformed provider response: ") + e.what());
  }
  return reply;
}

std::unique_ptr<ChatProvider> make_http_provider(const ProviderConfig& cfg) {
  const char* key = std::getenv(cfg.api_key_env.c_str());
  if (!key || !*key) {
    throw Error(ErrorKind::kConfig, "environment variable " + cfg.api_key_env + " (provider API key) is not set");
  }
  return std::make_unique<HttpProvider>(cfg, key);
}

std::unique_ptr<ChatProvider> make_fixture_provider(std::filesystem::path dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorKind::kConfig, "fixture dir not found: " + dir.string());
  return std::make_unique<FixtureProvider>(std::move(dir));
}

std::optional<std::string> ResponseCache::load(const CacheKey& key) const {
  auto path = root_ / key.relative_path();
  if (!std::filesystem::exists(path)) return std::nullopt;
  auto doc = json::parse(read_file(path));
  return doc.at("response").get<std::string>();
}

void ResponseCache::store(const CacheKey& key, const ChatRequest& request, const ChatReply& reply) const {
  auto path = root_ / key.relative_path();
  if (std::filesystem::exists(path)) return;
  json exchange;
  exchange["request"] = json::parse(render_request_body(request));
  exchange["request"]["sample_index"] = request.sample_index;
  exchange["request"]["prompt_hash"] = request.prompt_hash;
  exchange["response"] = reply.text;
  exchange["usage"] = {{"prompt_tokens", reply.prompt_tokens}, {"completion_tokens", reply.completion_tokens}};
  exchange["timestamp"] = utc_timestamp();
  write_file_atomic(path, exchange.dump(2));
}

Gateway::Gateway(std::shared_ptr<ChatProvider> provider, std::optional<ResponseCache> cache, std::string model_id,
                 std::size_t max_retries, std::chrono::milliseconds backoff_base, std::size_t max_concurrency)
    : provider_(std::move(provider)),
      cache_(std::move(cache)),
      model_id_(std::move(model_id)),
      max_retries_(max_retries),
      backoff_base_(backoff_base),
      max_concurrency_(std::max<std::size_t>(1, max_concurrency)) {}

std::string Gateway::complete(const std::string& prompt, const SamplingParams& params, std::size_t sample_index) {
  const CacheKey key = make_cache_key(model_id_, params, prompt, sample_index);
  if (cache_) {
    if (auto hit = cache_->load(key)) return *hit;
  }

  std::promise<std::string> promise;
  std::shared_future<std::string> shared;
  bool owner = false;
  {
    std::lock_guard lock(inflight_mu_);
    auto it = inflight_.find(key.str());
    if (it != inflight_.end()) {
      shared = it->second;
    } else {
      shared = promise.get_future().share();
      inflight_.emplace(key.str(), shared);
      owner = true;
    }
  }
  if (!owner) return shared.get();

  try {
    ChatRequest request{model_id_, prompt, key.prompt_hash, params, sample_index};
    promise.set_value(fetch(request, key));
  } catch (...) {
    promise.set_exception(std::current_exception());
  }
  {
    std::lock_guard lock(inflight_mu_);
    inflight_.erase(key.str());
  }
  return shared.get();
}

std::string Gateway::fetch(const ChatRequest& request, const CacheKey& key) {
  for (std::size_t attempt = 0;; ++attempt) {
    try {
      ++network_calls_;
      auto reply = provider_->chat(request);
      if (cache_) cache_->store(key, request, reply);
      return reply.text;
    } catch (const ProviderFailure& failure) {
      if (!failure.transient() || attempt >= max_retries_) {
        throw Error(ErrorKind::kProviderUnavailable,
                    fmt::format("{} failed after {} attempt(s): {}", provider_->name(), attempt + 1, failure.what()));
      }
      ++retries_;
      auto delay = backoff_base_ * (1LL << std::min<std::size_t>(attempt, 10));
      spdlog::warn("provider transient failure ({}); retry {}/{} in {} ms", failure.what(), attempt + 1, max_retries_,
                   delay.count());
      std::this_thread::sleep_for(delay);
    }
  }
}

std::vector<SampleOutcome> sample_candidates(const Problem& problem, std::size_t n, const SamplingParams& params,
                                             Gateway& gateway) {
  const std::string prompt = prompts::candidate_prompt(problem.prompt);
  std::vector<SampleOutcome> out(n);
  parallel_for(n, gateway.max_concurrency(), [&](std::size_t i) {
    out[i].sample_index = i;
    try {
      out[i].text = gateway.complete(prompt, params, i);
    } catch (const Error& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

}  // namespace semvote::llm
