// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include "revsum/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "revsum/error.hpp"
#include "revsum/log.hpp"
#include "revsum/prompts.hpp"
#include "revsum/text.hpp"
#include "utf8.hpp"

namespace revsum::eval {
namespace {

using json = nlohmann::json;

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Lowercased with runs of whitespace collapsed, for entity comparison.
std::string fold(std::string_view s) {
  std::string out;
  std::size_t pos = 0;
  bool space = false;
  while (pos < s.size()) {
    char32_t cp = utf8::next(s, pos);
    if (cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r') {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    utf8::append(out, utf8::to_lower(cp));
  }
  return out;
}

double parse_cell(const std::string& cell, std::size_t line, std::string_view what) {
  try {
    std::size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::parse, fmt::format("{} line {}: '{}' is not a number", what, line, cell));
  }
}

}  // namespace

EntityAnnotation make_annotation(std::string summary_id, const std::vector<std::string>& entities,
                                 std::string annotator) {
  EntityAnnotation a{std::move(summary_id), {}, std::move(annotator)};
  std::set<std::string> seen;
  for (const auto& e : entities) {
    auto t = trim(e);
    if (t.empty()) continue;
    if (seen.insert(fold(t)).second) a.entities.push_back(std::move(t));
  }
  return a;
}

std::vector<EntityAnnotation> read_annotations(std::istream& in) {
  std::vector<EntityAnnotation> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error(Errc::parse, fmt::format("annotation line {}: not a JSON object", n));
    try {
      out.push_back(make_annotation(j.at("summary_id").get<std::string>(),
                                    j.at("entities").get<std::vector<std::string>>(),
                                    j.value("annotator", std::string("unknown"))));
    } catch (const json::exception& e) {
      throw Error(Errc::parse, fmt::format("annotation line {}: {}", n, e.what()));
    }
  }
  return out;
}

void write_annotations(std::ostream& out, const std::vector<EntityAnnotation>& annotations) {
  for (const auto& a : annotations) {
    nlohmann::ordered_json j;
    j["summary_id"] = a.summary_id;
    j["annotator"] = a.annotator;
    j["entities"] = a.entities;
    out << j.dump() << '\n';
  }
}

void GoldEntitySet::validate() const {
  std::set<std::string> names(entities.begin(), entities.end());
  for (const auto& [entity, list] : aliases) {
    if (!names.contains(entity)) {
      throw Error(Errc::invalid_argument, fmt::format("gold set for {}: aliases given for unknown entity '{}'", app_id, entity));
    }
  }
}

GoldEntitySet GoldEntitySet::read(std::istream& in) {
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::parse, "gold file is not valid JSON");
  GoldEntitySet g;
  try {
    g.app_id = j.at("app_id").get<std::string>();
    for (const auto& e : j.at("entities")) {
      if (e.is_string()) {
        g.entities.push_back(e.get<std::string>());
        continue;
      }
      auto name = e.at("name").get<std::string>();
      g.entities.push_back(name);
      if (e.contains("aliases")) {
        auto list = e.at("aliases").get<std::vector<std::string>>();
        if (!list.empty()) g.aliases[name] = std::move(list);
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::parse, fmt::format("gold file: {}", e.what()));
  }
  g.validate();
  return g;
}

DensityReport density(std::int64_t entity_count, std::string_view summary_text, std::string summary_id) {
  if (entity_count < 0) throw Error(Errc::invalid_argument, "entity count must be non-negative");
  const auto tokens = static_cast<std::int64_t>(count_whitespace_tokens(summary_text));
  if (tokens == 0) throw Error(Errc::invalid_argument, fmt::format("summary '{}' is empty", summary_id));
  return {std::move(summary_id), entity_count, tokens, static_cast<double>(entity_count) / static_cast<double>(tokens)};
}

double recall(const EntityAnnotation& annotation, const GoldEntitySet& gold) {
  if (gold.entities.empty()) throw Error(Errc::invalid_argument, fmt::format("gold set for '{}' is empty", gold.app_id));
  std::set<std::string> found;
  for (const auto& e : annotation.entities) found.insert(fold(e));
  std::size_t matched = 0;
  for (const auto& entity : gold.entities) {
    bool hit = found.contains(fold(entity));
    if (!hit) {
      if (auto it = gold.aliases.find(entity); it != gold.aliases.end()) {
        hit = std::any_of(it->second.begin(), it->second.end(), [&](const auto& a) { return found.contains(fold(a)); });
      }
    }
    if (hit) ++matched;
  }
  return static_cast<double>(matched) / static_cast<double>(gold.entities.size());
}

std::size_t union_entity_count(const std::vector<EntityAnnotation>& annotations, std::string_view summary_id) {
  std::set<std::string> all;
  for (const auto& a : annotations) {
    if (a.summary_id != summary_id) continue;
    for (const auto& e : a.entities) all.insert(fold(e));
  }
  return all.size();
}

std::string readability_prompt(std::string_view summary) {
  return fmt::format(
      "You will be given a summary of mobile app reviews. Your task is to rate the readability of the summary.\n"
      "\n"
      "Evaluation steps:\n"
      "1. Read the summary carefully.\n"
      "2. Identify any awkward or unclear sentences.\n"
      "3. Look for errors in subject-verb agreement.\n"
      "4. Check that sentences are well-formed and are not run-ons or fragments.\n"
      "5. Evaluate the word choice and the semantic cohesion of the text.\n"
      "\n"
      "After your analysis, output a {} from 1 to 5, where 1 means very hard to read and 5 means very easy to read.\n"
      "\n"
      "Summary: {}\n",
      llm::kRatingCue, summary);
}

std::optional<int> parse_rating(std::string_view reply) {
  static const std::regex number(R"(\d+)");
  std::string s(reply);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), number); it != std::sregex_iterator(); ++it) {
    const auto& m = it->str();
    if (m.size() == 1 && m[0] >= '1' && m[0] <= '5') return m[0] - '0';
  }
  return std::nullopt;
}

std::string_view likert_label(Likert4 level) {
  return kLikert4Labels.at(static_cast<std::size_t>(level) - 1);
}

ReadabilityScore rate_readability(const llm::ResponseCache& cache, const llm::Client& client,
                                  const llm::GenerationParams& params, std::string summary_id,
                                  std::string_view summary, int repeats) {
  if (repeats < 1) throw Error(Errc::invalid_argument, "readability repeats must be at least 1");
  ReadabilityScore score;
  score.summary_id = std::move(summary_id);
  const auto prompt = readability_prompt(summary);
  for (int r = 0; r < repeats; ++r) {
    auto c = llm::cached_complete(cache, client, prompt, params, r);
    if (auto rating = parse_rating(c.text)) {
      score.ratings.push_back(*rating);
    } else {
      ++score.unparsed;
      log::warn("readability reply for {} has no rating in 1..5", score.summary_id);
    }
  }
  if (!score.ratings.empty()) {
    score.mean = std::accumulate(score.ratings.begin(), score.ratings.end(), 0.0) /
                 static_cast<double>(score.ratings.size());
  }
  return score;
}

std::string entity_extraction_prompt(std::string_view summary) {
  return fmt::format(
      "An entity is any functional or non-functional feature of the app that users mention in their reviews and "
      "perceive to either harm or enhance their overall experience.\n"
      "List every entity mentioned in the summary below. Answer with a {} and nothing else.\n"
      "\n"
      "Summary: {}\n",
      llm::kEntityListCue, summary);
}

ExtractionResult extract_entities_llm(const llm::ResponseCache& cache, const llm::Client& client,
                                      const llm::GenerationParams& params, std::string summary_id,
                                      std::string_view summary) {
  auto c = llm::cached_complete(cache, client, entity_extraction_prompt(summary), params);
  ExtractionResult r;
  r.annotation.summary_id = summary_id;
  r.annotation.annotator = "llm";
  if (trim(c.text).empty()) {
    r.empty_reply = true;
    log::warn("entity extraction for {} returned an empty reply", summary_id);
    return r;
  }
  auto arr = find_json_array(c.text);
  if (!arr) throw Error(Errc::parse, fmt::format("entity extraction for {}: reply holds no JSON array", summary_id));
  std::vector<std::string> items;
  for (const auto& e : *arr) {
    if (e.is_string()) items.push_back(e.get<std::string>());
  }
  r.annotation = make_annotation(std::move(summary_id), items, "llm");
  r.empty_reply = r.annotation.entities.empty();
  return r;
}

const std::vector<std::string>& standard_conditions() {
  static const std::vector<std::string> conditions = {"cod_1",   "cod_2",   "cod_3",   "cod_4",   "cod_5",
                                                      "cod_r_1", "cod_r_2", "cod_r_3", "cod_r_4", "cod_r_5",
                                                      "vanilla", "tfidf"};
  return conditions;
}

void EntityCountGrid::validate() const {
  if (apps.empty()) throw Error(Errc::invalid_argument, "entity count grid has no apps");
  if (conditions.empty()) throw Error(Errc::invalid_argument, "entity count grid has no conditions");
  if (counts.size() != apps.size()) throw Error(Errc::invalid_argument, "entity count grid rows do not match apps");
  for (const auto& row : counts) {
    if (row.size() != conditions.size()) throw Error(Errc::invalid_argument, "entity count grid is not rectangular");
  }
}

EntityCountGrid EntityCountGrid::read_csv(std::istream& in) {
  auto rows = csv::read_all(in);
  if (rows.size() < 2) throw Error(Errc::parse, "entity count CSV needs a header and at least one app");
  if (rows[0].size() < 2) throw Error(Errc::parse, "entity count CSV has no condition columns");
  EntityCountGrid g;
  g.conditions.assign(rows[0].begin() + 1, rows[0].end());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != rows[0].size()) {
      throw Error(Errc::parse, fmt::format("entity count CSV line {}: expected {} fields, got {}", i + 1, rows[0].size(), r.size()));
    }
    g.apps.push_back(r[0]);
    std::vector<double> row;
    for (std::size_t k = 1; k < r.size(); ++k) row.push_back(parse_cell(r[k], i + 1, "entity count CSV"));
    g.counts.push_back(std::move(row));
  }
  g.validate();
  return g;
}

void EntityCountGrid::write_csv(std::ostream& out) const {
  out << "app";
  for (const auto& c : conditions) out << ',' << csv::escape(c);
  out << '\n';
  for (std::size_t i = 0; i < apps.size(); ++i) {
    out << csv::escape(apps[i]);
    for (double v : counts[i]) out << ',' << fmt::format("{}", v);
    out << '\n';
  }
}

std::vector<double> EntityCountGrid::column(std::string_view condition) const {
  auto it = std::find(conditions.begin(), conditions.end(), condition);
  if (it == conditions.end()) throw Error(Errc::invalid_argument, fmt::format("no condition '{}' in the grid", condition));
  const auto k = static_cast<std::size_t>(it - conditions.begin());
  std::vector<double> out;
  for (const auto& row : counts) out.push_back(row[k]);
  return out;
}

std::vector<double> aggregate_entity_table(const EntityCountGrid& grid) {
  grid.validate();
  std::vector<double> sums(grid.conditions.size(), 0.0);
  for (const auto& row : grid.counts) {
    for (std::size_t k = 0; k < row.size(); ++k) sums[k] += row[k];
  }
  for (auto& s : sums) s /= static_cast<double>(grid.apps.size());
  return sums;
}

EntityCountGrid grid_from_annotations(const std::vector<EntityAnnotation>& annotations,
                                      const std::vector<std::string>& apps,
                                      const std::vector<std::string>& conditions,
                                      std::vector<std::string>* missing) {
  std::set<std::string> annotated;
  for (const auto& a : annotations) annotated.insert(a.summary_id);
  EntityCountGrid g{apps, conditions, {}};
  for (const auto& app : apps) {
    std::vector<double> row;
    for (const auto& c : conditions) {
      const auto id = app + "/" + c;
      if (!annotated.contains(id) && missing) missing->push_back(id);
      row.push_back(static_cast<double>(union_entity_count(annotations, id)));
    }
    g.counts.push_back(std::move(row));
  }
  return g;
}

std::vector<std::pair<std::string, std::string>> standard_comparisons(const EntityCountGrid& grid) {
  auto has = [&](const std::string& c) {
    return std::find(grid.conditions.begin(), grid.conditions.end(), c) != grid.conditions.end();
  };
  std::vector<std::pair<std::string, std::string>> out;
  for (int i = 3; i <= 5; ++i) {
    const auto a = fmt::format("cod_r_{}", i);
    if (!has(a)) continue;
    for (const auto& b : {fmt::format("cod_{}", i), std::string("vanilla"), std::string("tfidf")}) {
      if (has(b)) out.emplace_back(a, b);
    }
  }
  return out;
}

std::vector<ConditionComparison> compare_conditions(const EntityCountGrid& grid,
                                                    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::vector<ConditionComparison> out;
  for (const auto& [a, b] : pairs) {
    const auto ca = grid.column(a);
    const auto cb = grid.column(b);
    out.push_back({a, b, stats::paired_t(ca, cb)});
  }
  return out;
}

std::string format_grid(const EntityCountGrid& grid, int precision) {
  std::size_t name_width = 4;
  for (const auto& a : grid.apps) name_width = std::max(name_width, a.size());
  std::vector<std::size_t> widths;
  for (const auto& c : grid.conditions) widths.push_back(std::max<std::size_t>(c.size(), 6));

  std::string out = fmt::format("{:<{}}", "app", name_width);
  for (std::size_t k = 0; k < grid.conditions.size(); ++k) out += fmt::format("  {:>{}}", grid.conditions[k], widths[k]);
  out += '\n';
  for (std::size_t i = 0; i < grid.apps.size(); ++i) {
    out += fmt::format("{:<{}}", grid.apps[i], name_width);
    for (std::size_t k = 0; k < grid.counts[i].size(); ++k) {
      out += fmt::format("  {:>{}.{}f}", grid.counts[i][k], widths[k], precision);
    }
    out += '\n';
  }
  const auto avg = aggregate_entity_table(grid);
  out += fmt::format("{:<{}}", "Avg.", name_width);
  for (std::size_t k = 0; k < avg.size(); ++k) out += fmt::format("  {:>{}.3f}", avg[k], widths[k]);
  out += '\n';
  return out;
}

}  // namespace revsum::eval
