// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <regex>
#include <set>

#include <fmt/format.h>

#include "revsum/error.hpp"
#include "revsum/llm.hpp"
#include "revsum/text.hpp"

namespace revsum::llm {
namespace {

using json = nlohmann::json;

const std::set<std::string, std::less<>>& filler_words() {
  static const std::set<std::string, std::less<>> words = {
      "about", "after", "also", "apps", "because", "been", "could", "even", "from", "have", "into", "just", "more",
      "only", "really", "review", "reviews", "some", "than", "that", "their", "them", "then", "there", "they",
      "this", "very", "were", "what", "when", "which", "with", "would", "your", "users", "summary", "will"};
  return words;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string> keywords(std::string_view text, std::size_t limit) {
  std::map<std::string, int> counts;
  const std::string normalized = normalize(text);
  for (auto word : split_whitespace(normalized)) {
    if (word.size() < 4 || filler_words().contains(word)) continue;
    ++counts[std::string(word)];
  }
  std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < limit; ++i) out.push_back(ranked[i].first);
  return out;
}

std::string join_entities(const std::vector<std::string>& items) {
  if (items.empty()) return "the overall experience";
  if (items.size() == 1) return items[0];
  std::string out;
  for (std::size_t i = 0; i + 1 < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out + " and " + items.back();
}

std::string review_text(std::string_view prompt) {
  static const std::regex line(R"(^\[\d+\] \(\d★\) (.*)$)");
  std::string out;
  std::string p(prompt);
  std::size_t start = 0;
  while (start < p.size()) {
    auto end = p.find('\n', start);
    if (end == std::string::npos) end = p.size();
    std::string l = p.substr(start, end - start);
    if (l.rfind("Review: ", 0) == 0 || l.rfind("Article: ", 0) == 0) l = l.substr(l.find(' ') + 1);
    std::smatch m;
    if (std::regex_match(l, m, line)) out += m[1].str() + "\n";
    start = end + 1;
  }
  return out;
}

std::size_t find_number(std::string_view prompt, const std::regex& re, std::size_t fallback) {
  std::string p(prompt);
  std::smatch m;
  if (std::regex_search(p, m, re)) return std::stoul(m[1].str());
  return fallback;
}

std::string chain_reply(std::string_view prompt) {
  const std::size_t iterations = find_number(prompt, std::regex(R"(Repeat the following 2 steps (\d+) times)"), 5);
  const auto words = keywords(review_text(prompt), iterations * 2);
  json chain = json::array();
  std::vector<std::string> covered;
  for (std::size_t i = 0; i < iterations; ++i) {
    std::vector<std::string> fresh;
    for (std::size_t k = i * 2; k < words.size() && k < i * 2 + 2; ++k) fresh.push_back(words[k]);
    covered.insert(covered.end(), fresh.begin(), fresh.end());
    std::string summary = fmt::format("Reviewers of the app mention {}.", join_entities(covered));
    if (i == 0) summary += " Overall the reviews include a range of opinions about the experience.";
    std::string missing;
    for (std::size_t k = 0; k < fresh.size(); ++k) missing += (k ? "; " : "") + fresh[k];
    chain.push_back({{"missing_entities", missing}, {"denser_summary", summary}});
  }
  return "```json\n" + chain.dump(2) + "\n```";
}

}  // namespace

std::string mock_reply(std::string_view prompt) {
  if (prompt.find("denser_summary") != std::string_view::npos) return chain_reply(prompt);
  if (prompt.find(kRatingCue) != std::string_view::npos) {
    return fmt::format("Analysis: the sentences are well-formed and cohesive.\nRating: {}", 3 + fnv1a(prompt) % 3);
  }
  if (prompt.find(kEntityListCue) != std::string_view::npos) {
    auto pos = prompt.rfind("Summary:");
    auto text = pos == std::string_view::npos ? prompt : prompt.substr(pos + 8);
    return json(keywords(text, 4)).dump();
  }
  return fmt::format("Users of the app mention {}.", join_entities(keywords(review_text(prompt), 8)));
}

HttpResponse MockTransport::post(const HttpRequest& request) {
  ++calls_;
  {
    std::lock_guard lock(mutex_);
    if (!scripted_.empty()) {
      HttpResponse r = std::move(scripted_.front());
      scripted_.pop_front();
      return r;
    }
  }
  json req = json::parse(request.body, nullptr, false);
  if (req.is_discarded()) return {400, R"({"error":"malformed request"})", std::nullopt};
  std::string prompt;
  try {
    prompt = req.at("messages").back().at("content").get<std::string>();
  } catch (const json::exception&) {
    return {400, R"({"error":"request lacks messages"})", std::nullopt};
  }
  std::string text;
  {
    std::lock_guard lock(mutex_);
    text = canned_ ? *canned_ : mock_reply(prompt);
  }
  json body = {{"id", "mock"},
               {"object", "chat.completion"},
               {"model", req.value("model", std::string("mock"))},
               {"choices", json::array({{{"index", 0},
                                         {"message", {{"role", "assistant"}, {"content", text}}},
                                         {"finish_reason", "stop"}}})},
               {"usage", {{"prompt_tokens", estimate_tokens(prompt)}, {"completion_tokens", estimate_tokens(text)}}}};
  return {200, body.dump(), std::nullopt};
}

void MockTransport::script(HttpResponse response) {
  std::lock_guard lock(mutex_);
  scripted_.push_back(std::move(response));
}

void MockTransport::set_canned_reply(std::string text) {
  std::lock_guard lock(mutex_);
  canned_ = std::move(text);
}

}  // namespace revsum::llm
