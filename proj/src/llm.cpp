// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include "revsum/llm.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "revsum/digest.hpp"
#include "revsum/error.hpp"
#include "revsum/log.hpp"
#include "revsum/text.hpp"

namespace revsum::llm {
namespace {

using json = nlohmann::json;

std::string trim_slash(std::string s) {
  while (!s.empty() && s.back() == '/') s.pop_back();
  return s;
}

bool mentions_context_overflow(std::string_view body) {
  return body.find("context_length_exceeded") != std::string_view::npos ||
         body.find("maximum context length") != std::string_view::npos ||
         body.find("exceeds the maximum number of tokens") != std::string_view::npos;
}

// Error bodies are quoted in messages; a provider echoing the key must not leak it.
std::string snippet(std::string_view body, const std::string& key_env) {
  constexpr std::size_t kMax = 300;
  std::string text(body);
  if (const char* key = key_env.empty() ? nullptr : std::getenv(key_env.c_str()); key != nullptr && *key != '\0') {
    const std::string secret(key);
    for (auto pos = text.find(secret); pos != std::string::npos; pos = text.find(secret, pos)) {
      text.replace(pos, secret.size(), "[redacted]");
    }
  }
  if (text.size() <= kMax) return text;
  return text.substr(0, kMax) + "...";
}

}  // namespace

void GenerationParams::validate() const {
  if (model.empty()) throw Error(Errc::invalid_argument, "model name is empty");
  if (!(temperature >= 0.0)) throw Error(Errc::invalid_argument, "temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw Error(Errc::invalid_argument, "top_p must lie in (0, 1]");
  for (double p : {frequency_penalty, presence_penalty}) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::invalid_argument, "penalties must lie in [0, 1]");
  }
  if (max_output_tokens <= 0) throw Error(Errc::invalid_argument, "max_output_tokens must be positive");
}

Dialect parse_dialect(std::string_view name) {
  if (name == "openai") return Dialect::openai;
  if (name == "gemini") return Dialect::gemini;
  if (name == "mock") return Dialect::mock;
  throw Error(Errc::usage, fmt::format("unknown request dialect '{}'", name));
}

std::string_view dialect_name(Dialect d) {
  switch (d) {
    case Dialect::openai: return "openai";
    case Dialect::gemini: return "gemini";
    case Dialect::mock: return "mock";
  }
  return "?";
}

ProviderEndpoint builtin_endpoint(std::string_view name) {
  if (name == "openai") return {"openai", "https://api.openai.com/v1", "OPENAI_API_KEY", Dialect::openai, 128000};
  if (name == "gemini") {
    return {"gemini", "https://generativelanguage.googleapis.com/v1beta", "GEMINI_API_KEY", Dialect::gemini, 1000000};
  }
  if (name == "llama") return {"llama", "http://localhost:8000/v1", "LLAMA_API_KEY", Dialect::openai, 128000};
  if (name == "mock") return {"mock", "mock://local", "", Dialect::mock, 128000};
  throw Error(Errc::usage, fmt::format("unknown provider '{}'; configure it in a [provider.{}] section", name, name));
}

double estimate_cost(const UsageRecord& usage, const Price& price) {
  if (price.in_per_million < 0.0 || price.out_per_million < 0.0) {
    throw Error(Errc::invalid_argument, "prices must be non-negative");
  }
  const double micro = static_cast<double>(usage.input_tokens) * price.in_per_million +
                       static_cast<double>(usage.output_tokens) * price.out_per_million;
  return micro / 1e6;
}

std::int64_t estimate_tokens(std::string_view text) {
  const auto words = static_cast<double>(count_whitespace_tokens(text));
  return static_cast<std::int64_t>(std::ceil(words * 1.3));
}

nlohmann::ordered_json to_json(const UsageRecord& usage) {
  nlohmann::ordered_json j;
  j["input_tokens"] = usage.input_tokens;
  j["output_tokens"] = usage.output_tokens;
  j["latency_seconds"] = usage.latency_seconds;
  j["cost"] = usage.cost;
  j["approximate_tokens"] = usage.approximate_tokens;
  return j;
}

// Client

Client::Client(ProviderEndpoint endpoint, std::shared_ptr<Transport> transport, RetryPolicy retry)
    : endpoint_(std::move(endpoint)),
      transport_(std::move(transport)),
      retry_(std::move(retry)),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(endpoint_.max_in_flight, 1, 1024))) {
  if (!transport_) throw Error(Errc::invalid_argument, "client needs a transport");
  if (!retry_.sleep) {
    retry_.sleep = [](double seconds) {
      std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    };
  }
}

HttpRequest Client::build_request(std::string_view prompt, const GenerationParams& params) const {
  HttpRequest req;
  req.timeout_seconds = endpoint_.timeout_seconds;
  req.headers.emplace_back("Content-Type", "application/json");

  std::string key;
  if (endpoint_.dialect != Dialect::mock && !endpoint_.api_key_env.empty()) {
    const char* value = std::getenv(endpoint_.api_key_env.c_str());
    if (value == nullptr || *value == '\0') {
      throw Error(Errc::usage, fmt::format("environment variable {} is not set for provider '{}'",
                                           endpoint_.api_key_env, endpoint_.name));
    }
    key = value;
  }

  json body;
  if (endpoint_.dialect == Dialect::gemini) {
    req.url = fmt::format("{}/models/{}:generateContent", trim_slash(endpoint_.base_url), params.model);
    if (!key.empty()) req.headers.emplace_back("x-goog-api-key", key);
    body["contents"] = json::array({{{"role", "user"}, {"parts", json::array({{{"text", prompt}}})}}});
    body["generationConfig"] = {{"temperature", params.temperature},
                                {"topP", params.top_p},
                                {"frequencyPenalty", params.frequency_penalty},
                                {"presencePenalty", params.presence_penalty},
                                {"maxOutputTokens", params.max_output_tokens}};
  } else {
    req.url = trim_slash(endpoint_.base_url) + "/chat/completions";
    if (!key.empty()) req.headers.emplace_back("Authorization", "Bearer " + key);
    body["model"] = params.model;
    body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
    body["temperature"] = params.temperature;
    body["top_p"] = params.top_p;
    body["frequency_penalty"] = params.frequency_penalty;
    body["presence_penalty"] = params.presence_penalty;
    body["max_tokens"] = params.max_output_tokens;
  }
  req.body = body.dump();
  return req;
}

Completion Client::parse_response(std::string_view body) const {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::parse, "response body is not a JSON object");
  Completion c;
  try {
    if (endpoint_.dialect == Dialect::gemini) {
      for (const auto& part : j.at("candidates").at(0).at("content").at("parts")) {
        c.text += part.value("text", std::string());
      }
      if (auto meta = j.find("usageMetadata"); meta != j.end()) {
        c.usage.input_tokens = meta->value("promptTokenCount", std::int64_t{-1});
        c.usage.output_tokens = meta->value("candidatesTokenCount", std::int64_t{-1});
      } else {
        c.usage.input_tokens = c.usage.output_tokens = -1;
      }
    } else {
      const auto& content = j.at("choices").at(0).at("message").at("content");
      if (!content.is_string()) throw Error(Errc::parse, "response message has no text content");
      c.text = content.get<std::string>();
      if (auto usage = j.find("usage"); usage != j.end()) {
        c.usage.input_tokens = usage->value("prompt_tokens", std::int64_t{-1});
        c.usage.output_tokens = usage->value("completion_tokens", std::int64_t{-1});
      } else {
        c.usage.input_tokens = c.usage.output_tokens = -1;
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("malformed response body: ") + e.what());
  }
  return c;
}

Completion Client::complete(std::string_view prompt, const GenerationParams& params) const {
  params.validate();
  const auto prompt_tokens = estimate_tokens(prompt);
  if (static_cast<std::size_t>(prompt_tokens) > endpoint_.context_limit) {
    throw Error(Errc::context_overflow,
                fmt::format("prompt of ~{} tokens (approximate count) exceeds the {}-token context window of '{}'",
                            prompt_tokens, endpoint_.context_limit, endpoint_.name));
  }
  const HttpRequest request = build_request(prompt, params);

  thread_local std::mt19937_64 rng{std::random_device{}()};
  auto backoff = [&](int attempt) {
    std::uniform_real_distribution<double> jitter(0.0, 0.25);
    double d = retry_.base_delay_seconds * std::pow(2.0, attempt) * (1.0 + jitter(rng));
    return std::min(d, retry_.max_delay_seconds);
  };

  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};

  const auto started = std::chrono::steady_clock::now();
  for (int attempt = 0;; ++attempt) {
    const bool last = attempt >= retry_.max_retries;
    HttpResponse resp;
    try {
      ++requests_;
      resp = transport_->post(request);
    } catch (const Error& e) {
      if (last) throw Error(Errc::transport, fmt::format("'{}': {} (after {} attempts)", endpoint_.name, e.what(), attempt + 1));
      log::warn("'{}': {}; retrying", endpoint_.name, e.what());
      retry_.sleep(backoff(attempt));
      continue;
    }

    if (resp.status == 200) {
      Completion c = parse_response(resp.body);
      // The in-process responder reports zero latency so offline runs stay byte-identical.
      if (endpoint_.dialect != Dialect::mock) {
        c.usage.latency_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      }
      if (c.usage.input_tokens < 0 || c.usage.output_tokens < 0) {
        c.usage.input_tokens = prompt_tokens;
        c.usage.output_tokens = estimate_tokens(c.text);
        c.usage.approximate_tokens = true;
      }
      return c;
    }
    if (resp.status == 429) {
      if (last) throw Error(Errc::rate_limited, fmt::format("'{}': rate limited after {} attempts", endpoint_.name, attempt + 1));
      double delay = resp.retry_after_seconds.value_or(backoff(attempt));
      log::warn("'{}': rate limited; retrying in {:.1f}s", endpoint_.name, delay);
      retry_.sleep(delay);
      continue;
    }
    if (resp.status >= 400 && resp.status < 500 && mentions_context_overflow(resp.body)) {
      throw Error(Errc::context_overflow,
                  fmt::format("'{}' rejected the prompt (~{} tokens, approximate) as exceeding its {}-token context window",
                              endpoint_.name, prompt_tokens, endpoint_.context_limit));
    }
    if (resp.status >= 500 && !last) {
      log::warn("'{}': HTTP {}; retrying", endpoint_.name, resp.status);
      retry_.sleep(backoff(attempt));
      continue;
    }
    throw Error(Errc::transport, fmt::format("'{}': HTTP {}: {}", endpoint_.name, resp.status, snippet(resp.body, endpoint_.api_key_env)));
  }
}

// Cache

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(Errc::io, "cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::string ResponseCache::key(const ProviderEndpoint& endpoint, std::string_view prompt,
                               const GenerationParams& params, int sample_index) {
  nlohmann::ordered_json j;
  j["endpoint"] = endpoint.name;
  j["model"] = params.model;
  j["prompt"] = prompt;
  j["params"] = {{"temperature", params.temperature},
                 {"top_p", params.top_p},
                 {"frequency_penalty", params.frequency_penalty},
                 {"presence_penalty", params.presence_penalty},
                 {"max_output_tokens", params.max_output_tokens}};
  if (sample_index != 0) j["sample"] = sample_index;
  return sha256_hex(j.dump());
}

std::optional<Completion> ResponseCache::get(const std::string& key) const {
  const auto path = dir_ / (key + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  json j = json::parse(content, nullptr, false);
  try {
    if (j.is_discarded() || j.at("key").get<std::string>() != key) throw std::runtime_error("bad entry");
    Completion c;
    c.text = j.at("text").get<std::string>();
    const auto& u = j.at("usage");
    c.usage.input_tokens = u.at("input_tokens").get<std::int64_t>();
    c.usage.output_tokens = u.at("output_tokens").get<std::int64_t>();
    c.usage.latency_seconds = u.at("latency_seconds").get<double>();
    c.usage.approximate_tokens = u.value("approximate_tokens", false);
    c.from_cache = true;
    return c;
  } catch (const std::exception&) {
    log::warn("cache entry {} is corrupt; recomputing", path.string());
    return std::nullopt;
  }
}

void ResponseCache::put(const std::string& key, const ProviderEndpoint& endpoint, const GenerationParams& params,
                        const Completion& completion) const {
  nlohmann::ordered_json j;
  j["key"] = key;
  j["endpoint"] = endpoint.name;
  j["model"] = params.model;
  j["text"] = completion.text;
  j["usage"] = to_json(completion.usage);

  const auto final_path = dir_ / (key + ".json");
  std::ostringstream tid;
  tid << std::this_thread::get_id();
  const auto tmp_path = dir_ / (key + ".json.tmp-" + tid.str());
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write cache entry " + tmp_path.string());
    out << j.dump(2) << '\n';
  }
  std::error_code ec;
  std::filesystem::rename(tmp_path, final_path, ec);
  if (ec) throw Error(Errc::io, "cannot commit cache entry " + final_path.string() + ": " + ec.message());
}

std::mutex& ResponseCache::lock_for(const std::string& key) const {
  std::lock_guard guard(locks_mutex_);
  auto& slot = locks_[key];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

Completion cached_complete(const ResponseCache& cache, const Client& client, std::string_view prompt,
                           const GenerationParams& params, int sample_index) {
  const auto key = ResponseCache::key(client.endpoint(), prompt, params, sample_index);
  std::lock_guard guard(cache.lock_for(key));
  if (auto hit = cache.get(key)) return *hit;
  Completion c = client.complete(prompt, params);
  cache.put(key, client.endpoint(), params, c);
  return c;
}

}  // namespace revsum::llm
