// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef REVSUM_PROMPTS_HPP
#define REVSUM_PROMPTS_HPP

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace revsum {

enum class OutputKind {
  chain,  // JSON list of {missing_entities, denser_summary}
  text,   // one plain summary
};

struct PromptTemplate {
  std::string id;
  std::string body;  // placeholders: {{app}}, {{reviews}}, {{word_budget}}, {{iterations}}
  std::size_t word_budget = 120;
  std::size_t iterations = 5;
  OutputKind output = OutputKind::chain;
};

/// Templates plus their manifest (id, file, placeholders, defaults, output kind).
class TemplateLibrary {
 public:
  static TemplateLibrary load(const std::filesystem::path& dir);

  void add(PromptTemplate tmpl);
  const PromptTemplate& get(std::string_view id) const;
  bool contains(std::string_view id) const;
  std::vector<std::string> ids() const;

 private:
  std::vector<PromptTemplate> templates_;
};

struct PromptReview {
  int rating = 0;
  std::string body;
};

struct RenderParams {
  std::optional<std::size_t> word_budget;
  std::optional<std::size_t> iterations;
};

/// Appended to chain templates so the reply can be parsed.
inline constexpr std::string_view kChainFormatClause =
    "Answer in JSON. The JSON should be a list of dictionaries whose keys are 'missing_entities' and "
    "'denser_summary'.";

/// Reviews become numbered lines "[i] (r★) <body>". Throws Error(invalid_argument)
/// on an empty review list and Error(parse) when a placeholder is left unresolved.
std::string render(const PromptTemplate& tmpl, std::string_view app, std::span<const PromptReview> reviews,
                   const RenderParams& params = {});

std::string render_review_block(std::span<const PromptReview> reviews);

struct ChainIteration {
  std::vector<std::string> missing_entities;
  std::string summary;
};

struct SummaryChain {
  std::string app_id;
  std::string prompt_id;
  std::vector<ChainIteration> iterations;
  bool short_chain = false;  // fewer iterations than requested
  bool truncated = false;    // the reply held more iterations than requested
};

/// Parses the first JSON array in a model reply (code fences and surrounding
/// prose are tolerated). Keys match case-insensitively with spaces, hyphens and
/// underscores treated alike. Never returns more than `expected_iterations`.
SummaryChain parse_cod_response(std::string_view text, std::size_t expected_iterations);

/// Strips code fences and a leading "Summary:"-style preamble.
std::string parse_vanilla_response(std::string_view text);

/// Contents of the first ``` fenced block, or the input when there is none.
std::string strip_code_fence(std::string_view text);

/// Position and text of the first balanced, parseable JSON array.
std::optional<nlohmann::json> find_json_array(std::string_view text);

nlohmann::ordered_json to_json(const SummaryChain& chain);
SummaryChain chain_from_json(const nlohmann::json& j);

}  // namespace revsum

#endif  // REVSUM_PROMPTS_HPP
