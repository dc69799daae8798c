// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef REVSUM_EVALUATION_HPP
#define REVSUM_EVALUATION_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "revsum/llm.hpp"
#include "revsum/stats.hpp"

namespace revsum::eval {

struct EntityAnnotation {
  std::string summary_id;  // "<app>/<condition>", e.g. "uber/cod_r_3"
  std::vector<std::string> entities;
  std::string annotator;
};

/// Builds an annotation with entities trimmed and deduplicated
/// case-insensitively; the first spelling wins. Blank entities are dropped.
EntityAnnotation make_annotation(std::string summary_id, const std::vector<std::string>& entities,
                                 std::string annotator);

/// JSONL, one {summary_id, annotator, entities:[...]} per line.
std::vector<EntityAnnotation> read_annotations(std::istream& in);
void write_annotations(std::ostream& out, const std::vector<EntityAnnotation>& annotations);

struct GoldEntitySet {
  std::string app_id;
  std::vector<std::string> entities;
  std::map<std::string, std::vector<std::string>> aliases;  // entity -> alias list

  /// Throws when an alias key is not one of the entities.
  void validate() const;
  /// JSON {app_id, entities:[{name, aliases:[...]}]}.
  static GoldEntitySet read(std::istream& in);
};

struct DensityReport {
  std::string summary_id;
  std::int64_t entity_count = 0;
  std::int64_t token_count = 0;
  double density = 0.0;
};

/// entity_count / whitespace tokens of the raw summary.
DensityReport density(std::int64_t entity_count, std::string_view summary_text, std::string summary_id = {});

/// Fraction of gold entities matched case-insensitively by name or alias.
double recall(const EntityAnnotation& annotation, const GoldEntitySet& gold);

/// Case-insensitive union of the entities of every annotation of one summary.
std::size_t union_entity_count(const std::vector<EntityAnnotation>& annotations, std::string_view summary_id);

// Readability. The LLM scale (1..5) and the human 4-level scale are kept apart.

std::string readability_prompt(std::string_view summary);

/// First integer in 1..5 appearing in the reply.
std::optional<int> parse_rating(std::string_view reply);

enum class Likert4 { unreadable = 1, somewhat_readable, readable, easy_to_read };
inline constexpr std::array<std::string_view, 4> kLikert4Labels = {"Unreadable", "Somewhat Readable", "Readable",
                                                                    "Easy to Read"};
std::string_view likert_label(Likert4 level);

struct ReadabilityScore {
  std::string summary_id;
  std::vector<int> ratings;  // one per successful query
  double mean = 0.0;
  std::size_t unparsed = 0;  // replies without a usable rating
};

/// Queries the model `repeats` times (each repeat cached separately) and
/// averages the parsed ratings.
ReadabilityScore rate_readability(const llm::ResponseCache& cache, const llm::Client& client,
                                  const llm::GenerationParams& params, std::string summary_id,
                                  std::string_view summary, int repeats = 1);

// LLM entity extraction. Not a substitute for the human annotations.

std::string entity_extraction_prompt(std::string_view summary);

struct ExtractionResult {
  EntityAnnotation annotation;  // annotator "llm"
  bool empty_reply = false;
};

ExtractionResult extract_entities_llm(const llm::ResponseCache& cache, const llm::Client& client,
                                      const llm::GenerationParams& params, std::string summary_id,
                                      std::string_view summary);

// Per-app entity count grids (apps x conditions).

/// Column order used by reports.
const std::vector<std::string>& standard_conditions();

struct EntityCountGrid {
  std::vector<std::string> apps;
  std::vector<std::string> conditions;
  std::vector<std::vector<double>> counts;  // apps x conditions

  /// CSV header "app,<condition>,...", one row per app; every cell required.
  static EntityCountGrid read_csv(std::istream& in);
  void write_csv(std::ostream& out) const;
  std::vector<double> column(std::string_view condition) const;
  void validate() const;
};

/// Mean of each condition over the apps, in grid column order.
std::vector<double> aggregate_entity_table(const EntityCountGrid& grid);

/// Grid of union entity counts for summary ids "<app>/<condition>". Cells with
/// no annotation are counted as 0 and reported in `missing`.
EntityCountGrid grid_from_annotations(const std::vector<EntityAnnotation>& annotations,
                                      const std::vector<std::string>& apps,
                                      const std::vector<std::string>& conditions,
                                      std::vector<std::string>* missing = nullptr);

struct ConditionComparison {
  std::string a;
  std::string b;
  stats::PairedTResult result;
};

/// CoD_r iterations 3..5 against the matching CoD iteration, vanilla and
/// TF.IDF, restricted to conditions present in the grid.
std::vector<std::pair<std::string, std::string>> standard_comparisons(const EntityCountGrid& grid);
std::vector<ConditionComparison> compare_conditions(const EntityCountGrid& grid,
                                                    const std::vector<std::pair<std::string, std::string>>& pairs);

/// Fixed-width dump of a grid with an "Avg." row.
std::string format_grid(const EntityCountGrid& grid, int precision = 0);

}  // namespace revsum::eval

#endif  // REVSUM_EVALUATION_HPP
