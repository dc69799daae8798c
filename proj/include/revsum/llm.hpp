// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef REVSUM_LLM_HPP
#define REVSUM_LLM_HPP

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace revsum::llm {

struct GenerationParams {
  std::string model = "gpt-4-1106-preview";
  double temperature = 0.5;
  double top_p = 0.5;
  double frequency_penalty = 0.1;
  double presence_penalty = 0.1;
  int max_output_tokens = 2048;

  void validate() const;
};

enum class Dialect {
  openai,  // POST {base}/chat/completions; also used for OpenAI-compatible hosts
  gemini,  // POST {base}/models/{model}:generateContent
  mock,    // in-process deterministic responder, no network
};

Dialect parse_dialect(std::string_view name);
std::string_view dialect_name(Dialect d);

struct ProviderEndpoint {
  std::string name;
  std::string base_url;
  std::string api_key_env;  // variable holding the key; the key itself is never stored
  Dialect dialect = Dialect::openai;
  std::size_t context_limit = 128000;  // tokens
  std::size_t max_in_flight = 4;
  double timeout_seconds = 120.0;
};

/// openai, gemini, llama (OpenAI-compatible host) and mock.
ProviderEndpoint builtin_endpoint(std::string_view name);

struct UsageRecord {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  double latency_seconds = 0.0;
  double cost = 0.0;
  bool approximate_tokens = false;  // provider did not report counts
};

struct Completion {
  std::string text;
  UsageRecord usage;
  bool from_cache = false;
};

struct Price {
  double in_per_million = 0.0;
  double out_per_million = 0.0;
};

/// in * in_price / 1e6 + out * out_price / 1e6, evaluated as one division so
/// integral micro-amounts come out exact.
double estimate_cost(const UsageRecord& usage, const Price& price);

/// ceil(1.3 * whitespace words); the fallback when a provider reports no counts.
std::int64_t estimate_tokens(std::string_view text);

// Transport.

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  double timeout_seconds = 120.0;
};

struct HttpResponse {
  int status = 0;
  std::string body;
  std::optional<double> retry_after_seconds;
};

class Transport {
 public:
  virtual ~Transport() = default;
  /// Throws Error(transport) when no response was received.
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib over HTTP(S).
class HttpTransport final : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override;
};

/// Strings the mock responder keys on; the evaluation prompts contain them.
inline constexpr std::string_view kRatingCue = "single integer rating";
inline constexpr std::string_view kEntityListCue = "JSON array of entity strings";

/// Deterministic reply to a prompt: a parseable chain for chain prompts, a
/// rating for readability prompts, an entity list for extraction prompts and
/// a short summary otherwise. Pure function of the prompt text.
std::string mock_reply(std::string_view prompt);

/// Answers OpenAI-shaped requests in process. Scripted responses are served
/// first, in order; a canned reply (when set) replaces mock_reply().
class MockTransport final : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override;

  void script(HttpResponse response);
  void set_canned_reply(std::string text);
  std::size_t calls() const { return calls_.load(); }

 private:
  std::mutex mutex_;
  std::deque<HttpResponse> scripted_;
  std::optional<std::string> canned_;
  std::atomic<std::size_t> calls_{0};
};

struct RetryPolicy {
  int max_retries = 3;
  double base_delay_seconds = 1.0;
  double max_delay_seconds = 30.0;
  std::function<void(double)> sleep;  // defaults to std::this_thread::sleep_for
};

/// Chat-completion client for one endpoint. Safe to share across threads; at
/// most endpoint.max_in_flight requests run at once.
class Client {
 public:
  Client(ProviderEndpoint endpoint, std::shared_ptr<Transport> transport, RetryPolicy retry = {});

  /// Sends the prompt as a single user message. Throws Error(context_overflow)
  /// before sending when the prompt cannot fit the context window,
  /// Error(rate_limited)/Error(transport) once retries are exhausted and
  /// Error(parse) on a malformed response body.
  Completion complete(std::string_view prompt, const GenerationParams& params) const;

  const ProviderEndpoint& endpoint() const { return endpoint_; }
  std::size_t requests_sent() const { return requests_.load(); }

  HttpRequest build_request(std::string_view prompt, const GenerationParams& params) const;
  /// Extracts text and token counts from a provider response body.
  Completion parse_response(std::string_view body) const;

 private:
  ProviderEndpoint endpoint_;
  std::shared_ptr<Transport> transport_;
  RetryPolicy retry_;
  mutable std::counting_semaphore<1024> slots_;
  mutable std::atomic<std::size_t> requests_{0};
};

/// One JSON file per key under `dir`; writes go to a temp file and are renamed.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  /// SHA-256 over (endpoint name, model, prompt, sampling params). A non-zero
  /// sample index separates repeated queries of the same prompt.
  static std::string key(const ProviderEndpoint& endpoint, std::string_view prompt, const GenerationParams& params,
                         int sample_index = 0);

  /// A corrupt entry is reported and treated as a miss.
  std::optional<Completion> get(const std::string& key) const;
  void put(const std::string& key, const ProviderEndpoint& endpoint, const GenerationParams& params,
           const Completion& completion) const;

  const std::filesystem::path& dir() const { return dir_; }
  std::mutex& lock_for(const std::string& key) const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex locks_mutex_;
  mutable std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

Completion cached_complete(const ResponseCache& cache, const Client& client, std::string_view prompt,
                           const GenerationParams& params, int sample_index = 0);

nlohmann::ordered_json to_json(const UsageRecord& usage);

}  // namespace revsum::llm

#endif  // REVSUM_LLM_HPP
