// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "revsum/error.hpp"
#include "revsum/llm.hpp"
#include "revsum/log.hpp"
#include "support.hpp"

using namespace revsum;
using namespace revsum::llm;

namespace {

constexpr const char* kKeyVar = "REVSUM_TEST_API_KEY";
constexpr const char* kSecret = "sk-test-7f3a9c1e5b2d4f60";

// Collects every log line for the lifetime of the object.
class LogCapture {
 public:
  LogCapture() {
    log::set_min_level(log::Level::debug);
    log::set_sink([this](log::Level, std::string_view msg) {
      std::lock_guard lock(mutex_);
      text_ += msg;
      text_ += '\n';
    });
  }
  ~LogCapture() {
    log::set_sink({});
    log::set_min_level(log::Level::info);
  }
  std::string text() const {
    std::lock_guard lock(mutex_);
    return text_;
  }

 private:
  mutable std::mutex mutex_;
  std::string text_;
};

ProviderEndpoint keyed_endpoint() {
  ProviderEndpoint e = builtin_endpoint("openai");
  e.name = "test-openai";
  e.base_url = "http://127.0.0.1:9";
  e.api_key_env = kKeyVar;
  return e;
}

RetryPolicy no_sleep(std::vector<double>* slept = nullptr) {
  RetryPolicy p;
  p.sleep = [slept](double s) {
    if (slept) slept->push_back(s);
  };
  return p;
}

HttpResponse ok_body(const std::string& text) {
  nlohmann::json j = {{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}},
                      {"usage", {{"prompt_tokens", 10}, {"completion_tokens", 3}}}};
  return {200, j.dump(), std::nullopt};
}

}  // namespace

TEST_CASE("generation parameter defaults and validation") {
  GenerationParams p;
  CHECK(p.temperature == 0.5);
  CHECK(p.top_p == 0.5);
  CHECK(p.frequency_penalty == 0.1);
  CHECK(p.presence_penalty == 0.1);
  CHECK(p.max_output_tokens == 2048);
  CHECK_NOTHROW(p.validate());
  p.top_p = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.temperature = -0.1;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.presence_penalty = 1.5;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("builtin endpoints") {
  CHECK(builtin_endpoint("openai").context_limit == 128000);
  CHECK(builtin_endpoint("gemini").dialect == Dialect::gemini);
  CHECK(builtin_endpoint("llama").dialect == Dialect::openai);
  CHECK(builtin_endpoint("mock").dialect == Dialect::mock);
  CHECK_THROWS_AS(builtin_endpoint("bedrock"), Error);
  CHECK(parse_dialect("gemini") == Dialect::gemini);
}

TEST_CASE("mock endpoint returns the canned reply") {
  auto transport = std::make_shared<MockTransport>();
  transport->set_canned_reply("canned!");
  Client client(builtin_endpoint("mock"), transport, no_sleep());
  const auto c = client.complete("hello there", {});
  CHECK(c.text == "canned!");
  CHECK(c.usage.latency_seconds >= 0.0);
  CHECK(c.usage.input_tokens >= 0);
  CHECK_FALSE(c.from_cache);
}

TEST_CASE("mock replies are a pure function of the prompt") {
  CHECK(mock_reply("Summarize these reviews") == mock_reply("Summarize these reviews"));
  const auto rating = mock_reply(std::string("Give a ") + std::string(kRatingCue) + " from 1 to 5.");
  REQUIRE(rating.size() >= 1);
  const auto ents = mock_reply(std::string("Return a ") + std::string(kEntityListCue) + ".\nSummary: fast rides");
  CHECK(ents.find('[') != std::string::npos);
}

TEST_CASE("429 then success retries once, honouring retry-after") {
  ::setenv(kKeyVar, kSecret, 1);
  auto transport = std::make_shared<MockTransport>();
  transport->script({429, R"({"error":"slow down"})", 2.5});
  transport->script(ok_body("fine"));
  std::vector<double> slept;
  Client client(keyed_endpoint(), transport, no_sleep(&slept));
  const auto c = client.complete("hello", {});
  CHECK(c.text == "fine");
  CHECK(transport->calls() == 2);
  REQUIRE(slept.size() == 1);
  CHECK(slept[0] == 2.5);
  CHECK(c.usage.input_tokens == 10);
  CHECK_FALSE(c.usage.approximate_tokens);
}

TEST_CASE("rate limiting and server errors give up after the retry budget") {
  ::setenv(kKeyVar, kSecret, 1);
  auto transport = std::make_shared<MockTransport>();
  for (int i = 0; i < 4; ++i) transport->script({429, "{}", std::nullopt});
  std::vector<double> slept;
  Client client(keyed_endpoint(), transport, no_sleep(&slept));
  try {
    client.complete("hello", {});
    FAIL("expected rate limit error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::rate_limited);
  }
  CHECK(transport->calls() == 4);
  REQUIRE(slept.size() == 3);
  // Exponential backoff with at most 25% jitter.
  CHECK(slept[0] >= 1.0);
  CHECK(slept[0] <= 1.25);
  CHECK(slept[2] >= 4.0);

  auto flaky = std::make_shared<MockTransport>();
  flaky->script({503, "unavailable", std::nullopt});
  flaky->script(ok_body("recovered"));
  Client retrying(keyed_endpoint(), flaky, no_sleep());
  CHECK(retrying.complete("hello", {}).text == "recovered");

  auto broken = std::make_shared<MockTransport>();
  broken->script({400, R"({"error":"bad request"})", std::nullopt});
  Client failing(keyed_endpoint(), broken, no_sleep());
  try {
    failing.complete("hello", {});
    FAIL("expected transport error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::transport);
  }
  CHECK(broken->calls() == 1);
}

TEST_CASE("an oversized prompt fails before sending and names the limit") {
  auto transport = std::make_shared<MockTransport>();
  Client client(builtin_endpoint("mock"), transport, no_sleep());
  std::string prompt;
  for (int i = 0; i < 100000; ++i) prompt += "word ";
  try {
    client.complete(prompt, {});
    FAIL("expected overflow");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::context_overflow);
    CHECK(std::string(e.what()).find("128000") != std::string::npos);
  }
  CHECK(transport->calls() == 0);
}

TEST_CASE("provider-side overflow is fatal") {
  ::setenv(kKeyVar, kSecret, 1);
  auto transport = std::make_shared<MockTransport>();
  transport->script({400, R"({"error":{"code":"context_length_exceeded","message":"maximum context length"}})",
                     std::nullopt});
  Client client(keyed_endpoint(), transport, no_sleep());
  CHECK_THROWS_AS(client.complete("hello", {}), Error);
  CHECK(transport->calls() == 1);
}

TEST_CASE("malformed bodies and missing usage") {
  Client client(builtin_endpoint("mock"), std::make_shared<MockTransport>(), no_sleep());
  CHECK_THROWS_AS(client.parse_response("not json"), Error);
  CHECK_THROWS_AS(client.parse_response(R"({"choices":[]})"), Error);
  const auto c = client.parse_response(R"({"choices":[{"message":{"content":"hi"}}]})");
  CHECK(c.text == "hi");
  CHECK(c.usage.input_tokens < 0);

  auto transport = std::make_shared<MockTransport>();
  transport->script({200, R"({"choices":[{"message":{"content":"two words"}}]})", std::nullopt});
  Client counting(builtin_endpoint("mock"), transport, no_sleep());
  const auto done = counting.complete("one two three four five six seven eight nine ten", {});
  CHECK(done.usage.approximate_tokens);
  CHECK(done.usage.input_tokens == 13);
  CHECK(done.usage.output_tokens == 3);
}

TEST_CASE("gemini request shape") {
  ::setenv(kKeyVar, kSecret, 1);
  ProviderEndpoint e = builtin_endpoint("gemini");
  e.api_key_env = kKeyVar;
  Client client(e, std::make_shared<MockTransport>(), no_sleep());
  const auto req = client.build_request("hi", {});
  CHECK(req.url.find(":generateContent") != std::string::npos);
  const auto body = nlohmann::json::parse(req.body);
  CHECK(body["generationConfig"]["topP"] == 0.5);
  const auto parsed = client.parse_response(
      R"({"candidates":[{"content":{"parts":[{"text":"a"},{"text":"b"}]}}],"usageMetadata":{"promptTokenCount":4,"candidatesTokenCount":2}})");
  CHECK(parsed.text == "ab");
  CHECK(parsed.usage.output_tokens == 2);
}

TEST_CASE("a missing key is a usage error") {
  ::unsetenv("REVSUM_TEST_MISSING_KEY");
  ProviderEndpoint e = keyed_endpoint();
  e.api_key_env = "REVSUM_TEST_MISSING_KEY";
  Client client(e, std::make_shared<MockTransport>(), no_sleep());
  try {
    client.complete("hi", {});
    FAIL("expected usage error");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::usage);
  }
}

TEST_CASE("cache: hit, params miss, sample index, corruption") {
  testing::TempDir dir;
  ResponseCache cache(dir / "cache");
  auto transport = std::make_shared<MockTransport>();
  Client client(builtin_endpoint("mock"), transport, no_sleep());
  GenerationParams params;

  const auto first = cached_complete(cache, client, "prompt one", params);
  CHECK(transport->calls() == 1);
  const auto second = cached_complete(cache, client, "prompt one", params);
  CHECK(transport->calls() == 1);
  CHECK(second.from_cache);
  CHECK(second.text == first.text);
  CHECK(second.usage.input_tokens == first.usage.input_tokens);

  GenerationParams warmer = params;
  warmer.temperature = 0.7;
  cached_complete(cache, client, "prompt one", warmer);
  CHECK(transport->calls() == 2);
  cached_complete(cache, client, "prompt one", params, 1);
  CHECK(transport->calls() == 3);

  const auto key = ResponseCache::key(client.endpoint(), "prompt one", params);
  testing::spit(dir / "cache" / (key + ".json"), "{ truncated");
  const auto again = cached_complete(cache, client, "prompt one", params);
  CHECK(transport->calls() == 4);
  CHECK(again.text == first.text);
  CHECK(cache.get(key).has_value());
}

TEST_CASE("cache: network requests equal distinct keys") {
  testing::TempDir dir;
  ResponseCache cache(dir.path());
  auto transport = std::make_shared<MockTransport>();
  Client client(builtin_endpoint("mock"), transport, no_sleep());
  std::mt19937 rng(8);
  std::set<std::string> keys;
  for (int i = 0; i < 60; ++i) {
    const auto prompt = "p" + std::to_string(rng() % 12);
    GenerationParams params;
    params.temperature = (rng() % 2) ? 0.5 : 0.2;
    keys.insert(ResponseCache::key(client.endpoint(), prompt, params));
    cached_complete(cache, client, prompt, params);
  }
  CHECK(transport->calls() == keys.size());
}

TEST_CASE("cost estimation") {
  CHECK(estimate_cost({1'000'000, 0}, {2.5, 10}) == 2.5);
  CHECK(estimate_cost({20'000, 2'000}, {2.5, 10}) == 0.07);
  CHECK(estimate_cost({0, 0}, {2.5, 10}) == 0.0);
  CHECK(estimate_tokens("") == 0);
  CHECK(estimate_tokens("one two three") == 4);
}

TEST_CASE("the API key never reaches logs or cache files") {
  ::setenv(kKeyVar, kSecret, 1);
  LogCapture logs;
  testing::TempDir dir;
  ResponseCache cache(dir / "cache");
  auto transport = std::make_shared<MockTransport>();
  transport->script({429, "{}", 0.0});
  transport->script({500, "oops", std::nullopt});
  Client client(keyed_endpoint(), transport, no_sleep());

  const auto req = client.build_request("hello", {});
  bool header_has_key = false;
  for (const auto& [name, value] : req.headers) header_has_key |= value.find(kSecret) != std::string::npos;
  CHECK(header_has_key);

  cached_complete(cache, client, "hello", {});
  cached_complete(cache, client, "hello", {});

  auto broken = std::make_shared<MockTransport>();
  broken->script({401, std::string("invalid key ") + kSecret, std::nullopt});
  Client failing(keyed_endpoint(), broken, no_sleep());
  try {
    failing.complete("again", {});
  } catch (const Error& e) {
    log::warn("{}", e.what());
  }

  const std::string captured = logs.text();
  CHECK_FALSE(captured.empty());
  CHECK(captured.find(kSecret) == std::string::npos);
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir.path())) {
    if (!entry.is_regular_file()) continue;
    ++files;
    CHECK(testing::slurp(entry.path()).find(kSecret) == std::string::npos);
  }
  CHECK(files >= 1);
}
