// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include "revsum/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <regex>

#include <fmt/format.h>

#include "revsum/error.hpp"

namespace revsum {
namespace {

using json = nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string canonical_key(std::string_view key) {
  std::string out;
  for (char c : trim(key)) {
    if (c == ' ' || c == '-' || c == '_') {
      out += '_';
    } else {
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

const json* field(const json& obj, std::initializer_list<std::string_view> names) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    auto key = canonical_key(it.key());
    for (auto name : names) {
      if (key == name) return &it.value();
    }
  }
  return nullptr;
}

std::vector<std::string> entity_list(const json& value) {
  std::vector<std::string> out;
  auto push = [&](std::string_view s) {
    s = trim(s);
    if (!s.empty()) out.emplace_back(s);
  };
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    std::size_t start = 0;
    while (start <= s.size()) {
      auto semi = s.find(';', start);
      if (semi == std::string::npos) semi = s.size();
      push(std::string_view(s).substr(start, semi - start));
      start = semi + 1;
    }
  } else if (value.is_array()) {
    for (const auto& v : value) {
      if (v.is_string()) push(v.get<std::string>());
    }
  }
  return out;
}

std::string collapse_newlines(std::string_view s) {
  std::string out;
  for (char c : trim(s)) {
    if (c == '\n' || c == '\r' || c == '\t') {
      if (!out.empty() && out.back() != ' ') out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace

TemplateLibrary TemplateLibrary::load(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw Error(Errc::parse, manifest_path.string() + ": " + e.what());
  }
  TemplateLibrary lib;
  for (const auto& entry : manifest.at("templates")) {
    PromptTemplate t;
    t.id = entry.at("id").get<std::string>();
    t.body = read_file(dir / entry.at("file").get<std::string>());
    if (auto defaults = entry.find("defaults"); defaults != entry.end()) {
      t.word_budget = defaults->value("word_budget", t.word_budget);
      t.iterations = defaults->value("iterations", t.iterations);
    }
    t.output = entry.value("output", std::string("chain")) == "text" ? OutputKind::text : OutputKind::chain;
    lib.add(std::move(t));
  }
  return lib;
}

void TemplateLibrary::add(PromptTemplate tmpl) {
  auto it = std::find_if(templates_.begin(), templates_.end(), [&](const auto& t) { return t.id == tmpl.id; });
  if (it != templates_.end()) {
    *it = std::move(tmpl);
  } else {
    templates_.push_back(std::move(tmpl));
  }
}

bool TemplateLibrary::contains(std::string_view id) const {
  return std::any_of(templates_.begin(), templates_.end(), [&](const auto& t) { return t.id == id; });
}

const PromptTemplate& TemplateLibrary::get(std::string_view id) const {
  for (const auto& t : templates_) {
    if (t.id == id) return t;
  }
  throw Error(Errc::usage, fmt::format("unknown prompt template '{}'", id));
}

std::vector<std::string> TemplateLibrary::ids() const {
  std::vector<std::string> out;
  for (const auto& t : templates_) out.push_back(t.id);
  return out;
}

std::string render_review_block(std::span<const PromptReview> reviews) {
  std::string block;
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    if (i > 0) block += '\n';
    block += fmt::format("[{}] ({}★) {}", i + 1, reviews[i].rating, collapse_newlines(reviews[i].body));
  }
  return block;
}

std::string render(const PromptTemplate& tmpl, std::string_view app, std::span<const PromptReview> reviews,
                   const RenderParams& params) {
  if (reviews.empty()) throw Error(Errc::invalid_argument, "cannot render a prompt without reviews");
  const std::size_t budget = params.word_budget.value_or(tmpl.word_budget);
  const std::size_t iterations = params.iterations.value_or(tmpl.iterations);

  std::string out;
  const std::string& body = tmpl.body;
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto open = body.find("{{", pos);
    if (open == std::string::npos) {
      out.append(body, pos);
      break;
    }
    out.append(body, pos, open - pos);
    auto close = body.find("}}", open + 2);
    if (close == std::string::npos) throw Error(Errc::parse, fmt::format("template '{}': unterminated placeholder", tmpl.id));
    auto name = std::string_view(body).substr(open + 2, close - open - 2);
    if (name == "app") {
      out += app;
    } else if (name == "reviews") {
      out += render_review_block(reviews);
    } else if (name == "word_budget") {
      out += std::to_string(budget);
    } else if (name == "iterations") {
      out += std::to_string(iterations);
    } else {
      throw Error(Errc::parse, fmt::format("template '{}': unknown placeholder {{{{{}}}}}", tmpl.id, name));
    }
    pos = close + 2;
  }
  while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
  if (tmpl.output == OutputKind::chain) {
    out += "\n\n";
    out += kChainFormatClause;
  }
  out += '\n';
  return out;
}

std::string strip_code_fence(std::string_view text) {
  auto open = text.find("```");
  if (open == std::string_view::npos) return std::string(trim(text));
  auto line_end = text.find('\n', open);
  if (line_end == std::string_view::npos) return std::string(trim(text));
  auto close = text.find("```", line_end);
  auto inner = close == std::string_view::npos ? text.substr(line_end + 1) : text.substr(line_end + 1, close - line_end - 1);
  return std::string(trim(inner));
}

std::optional<json> find_json_array(std::string_view text) {
  for (std::size_t start = text.find('['); start != std::string_view::npos; start = text.find('[', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    std::size_t end = std::string_view::npos;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '[' || c == '{') {
        ++depth;
      } else if (c == ']' || c == '}') {
        if (--depth == 0) {
          end = i;
          break;
        }
      }
    }
    if (end == std::string_view::npos) continue;
    auto parsed = json::parse(text.substr(start, end - start + 1), nullptr, false);
    if (!parsed.is_discarded() && parsed.is_array()) return parsed;
  }
  return std::nullopt;
}

SummaryChain parse_cod_response(std::string_view text, std::size_t expected_iterations) {
  auto array = find_json_array(strip_code_fence(text));
  if (!array) array = find_json_array(text);
  if (!array) throw Error(Errc::parse, "reply holds no parseable JSON array");
  if (array->empty()) throw Error(Errc::parse, "reply holds an empty JSON array");

  SummaryChain chain;
  for (const auto& element : *array) {
    if (chain.iterations.size() == expected_iterations) {
      chain.truncated = true;
      break;
    }
    if (!element.is_object()) throw Error(Errc::parse, "chain element is not an object");
    const json* summary = field(element, {"denser_summary", "summary"});
    if (summary == nullptr || !summary->is_string()) throw Error(Errc::parse, "chain element lacks a summary field");
    ChainIteration it;
    it.summary = std::string(trim(summary->get<std::string>()));
    if (it.summary.empty()) throw Error(Errc::parse, "chain element has an empty summary");
    if (const json* entities = field(element, {"missing_entities", "entities"})) it.missing_entities = entity_list(*entities);
    chain.iterations.push_back(std::move(it));
  }
  chain.short_chain = chain.iterations.size() < expected_iterations;
  return chain;
}

std::string parse_vanilla_response(std::string_view text) {
  std::string inner = strip_code_fence(text);
  static const std::regex preamble(R"(^(?:here(?:'s| is)[^\n]*:\s*\n|summary\s*:\s*))", std::regex::icase);
  inner = std::regex_replace(inner, preamble, "", std::regex_constants::format_first_only);
  auto trimmed = std::string(trim(inner));
  if (trimmed.empty()) throw Error(Errc::parse, "empty summary reply");
  return trimmed;
}

nlohmann::ordered_json to_json(const SummaryChain& chain) {
  nlohmann::ordered_json j;
  j["app_id"] = chain.app_id;
  j["prompt_id"] = chain.prompt_id;
  j["short_chain"] = chain.short_chain;
  j["truncated"] = chain.truncated;
  auto& its = j["iterations"] = nlohmann::ordered_json::array();
  for (const auto& it : chain.iterations) {
    nlohmann::ordered_json e;
    e["missing_entities"] = it.missing_entities;
    e["summary"] = it.summary;
    its.push_back(std::move(e));
  }
  return j;
}

SummaryChain chain_from_json(const json& j) {
  SummaryChain chain;
  try {
    chain.app_id = j.at("app_id").get<std::string>();
    chain.prompt_id = j.at("prompt_id").get<std::string>();
    chain.short_chain = j.value("short_chain", false);
    chain.truncated = j.value("truncated", false);
    for (const auto& e : j.at("iterations")) {
      chain.iterations.push_back({e.value("missing_entities", std::vector<std::string>{}), e.at("summary").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("malformed summary chain: ") + e.what());
  }
  return chain;
}

}  // namespace revsum
