#pragma once

// Provider-agnostic chat completion with a content-addressed response cache.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "semvote/types.hpp"

namespace semvote::llm {

struct ProviderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model_id;
  std::string api_key_env = "SEMVOTE_API_KEY";
  std::size_t max_retries = 4;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::seconds request_timeout{120};
};

struct SamplingParams {
  double temperature = 0.8;
  ThinkingLevel thinking_level = ThinkingLevel::kLow;
  std::optional<double> top_p;  // provider default when absent
};

struct CacheKey {
  std::string model_id;
  ThinkingLevel thinking_level = ThinkingLevel::kLow;
  double temperature = 0.0;
  std::string prompt_hash;
  std::size_t sample_index = 0;

  // cache/<model>/<thinking>/<prompt_hash>/t<temperature>/<sample_index>.json relative part.
  std::filesystem::path relative_path() const;
  std::string str() const;
};

CacheKey make_cache_key(const std::string& model_id, const SamplingParams& params, const std::string& prompt,
                        std::size_t sample_index);

struct ChatRequest {
  std::string model_id;
  std::string prompt;
  std::string prompt_hash;
  SamplingParams params;
  std::size_t sample_index = 0;
};

struct ChatReply {
  std::string text;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
};

// Thrown by providers; the gateway retries only transient failures.
class ProviderFailure : public std::runtime_error {
 public:
  ProviderFailure(bool transient, const std::string& what) : std::runtime_error(what), transient_(transient) {}
  bool transient() const noexcept { return transient_; }

 private:
  bool transient_;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ChatReply chat(const ChatRequest& request) = 0;
  virtual std::string name() const = 0;
};

// HTTP chat-completions client. Reads the API key from cfg.api_key_env at construction
// and throws Error(kConfig) when it is unset.
std::unique_ptr<ChatProvider> make_http_provider(const ProviderConfig& cfg);

// Offline provider: <dir>/<prompt_hash>.json = {"samples": [...], "greedy": "..."}.
// sample_index picks samples[i mod len]; temperature 0 prefers "greedy".
std::unique_ptr<ChatProvider> make_fixture_provider(std::filesystem::path dir);

// Request body sent to the HTTP provider, exposed for wire tests.
std::string render_request_body(const ChatRequest& request);
// Extract choices[0].message.content and usage; throws ProviderFailure(false) if absent.
ChatReply parse_response_body(const std::string& body);

class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path root) : root_(std::move(root)) {}
  std::optional<std::string> load(const CacheKey& key) const;
  void store(const CacheKey& key, const ChatRequest& request, const ChatReply& reply) const;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

class Gateway {
 public:
  Gateway(std::shared_ptr<ChatProvider> provider, std::optional<ResponseCache> cache, std::string model_id,
          std::size_t max_retries = 4, std::chrono::milliseconds backoff_base = std::chrono::milliseconds(500),
          std::size_t max_concurrency = 4);

  // Cache hit returns the stored text byte-exactly. Throws Error(kProviderUnavailable)
  // once retries are exhausted or on a permanent provider failure.
  std::string complete(const std::string& prompt, const SamplingParams& params, std::size_t sample_index = 0);

  const std::string& model_id() const { return model_id_; }
  std::size_t max_concurrency() const { return max_concurrency_; }
  std::size_t network_calls() const { return network_calls_.load(); }
  std::size_t retries() const { return retries_.load(); }

 private:
  std::string fetch(const ChatRequest& request, const CacheKey& key);

  std::shared_ptr<ChatProvider> provider_;
  std::optional<ResponseCache> cache_;
  std::string model_id_;
  std::size_t max_retries_;
  std::chrono::milliseconds backoff_base_;
  std::size_t max_concurrency_;

  std::mutex inflight_mu_;
  std::map<std::string, std::shared_future<std::string>> inflight_;
  std::atomic<std::size_t> network_calls_{0};
  std::atomic<std::size_t> retries_{0};
};

struct SampleOutcome {
  std::size_t sample_index = 0;
  std::optional<std::string> text;
  std::string error;  // set when text is absent
};

// Renders the candidate prompt and issues n samples with distinct sample indices.
std::vector<SampleOutcome> sample_candidates(const Problem& problem, std::size_t n, const SamplingParams& params,
                                             Gateway& gateway);

}  // namespace semvote::llm
