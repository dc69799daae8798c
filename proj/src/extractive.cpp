// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include "revsum/extractive.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "revsum/error.hpp"
#include "revsum/text.hpp"

namespace revsum {
namespace {

constexpr std::array<std::string_view, 16> kAbbreviations = {
    "e.g.", "i.e.", "vs.", "etc.", "mr.", "mrs.", "ms.", "dr.", "st.", "jr.", "sr.", "approx.", "no.", "min.", "max.",
    "u.s."};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool ends_with_abbreviation(std::string_view text_up_to_dot) {
  std::size_t start = text_up_to_dot.find_last_of(" \t\r\n(\"");
  std::string_view last = start == std::string_view::npos ? text_up_to_dot : text_up_to_dot.substr(start + 1);
  std::string lowered(last);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char c) { return std::tolower(c); });
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lowered) != kAbbreviations.end();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

std::size_t SentenceUnit::word_count() const { return count_whitespace_tokens(text); }

void EmbeddingTable::add(std::string token, std::vector<double> vector) {
  if (dim_ == 0) dim_ = vector.size();
  if (vector.size() != dim_ || dim_ == 0) {
    throw Error(Errc::invalid_argument,
                fmt::format("embedding for '{}' has dimension {}, expected {}", token, vector.size(), dim_));
  }
  vectors_.insert_or_assign(std::move(token), std::move(vector));
}

const std::vector<double>* EmbeddingTable::find(std::string_view token) const {
  auto it = vectors_.find(std::string(token));
  return it == vectors_.end() ? nullptr : &it->second;
}

EmbeddingTable EmbeddingTable::read(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    std::vector<double> vec;
    vec.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      double v = 0.0;
      auto f = fields[i];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw Error(Errc::parse, fmt::format("embedding line {}: bad number '{}'", lineno, f));
      }
      vec.push_back(v);
    }
    if (vec.empty()) throw Error(Errc::parse, fmt::format("embedding line {} has no vector", lineno));
    if (table.dim_ != 0 && vec.size() != table.dim_) {
      throw Error(Errc::parse, fmt::format("embedding line {} has dimension {}, expected {}", lineno, vec.size(),
                                           table.dim_));
    }
    table.add(std::string(fields[0]), std::move(vec));
  }
  if (table.dim_ == 0) throw Error(Errc::parse, "embedding file is empty");
  return table;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot read embedding file " + path.string());
  return read(in);
}

void ExtractiveConfig::validate() const {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw Error(Errc::invalid_argument, "lambda must lie in (0, 1]");
  if (word_budget == 0) throw Error(Errc::invalid_argument, "word budget must be positive");
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  auto emit = [&](std::string_view piece) {
    piece = trim(piece);
    if (count_whitespace_tokens(piece) >= kMinSentenceWords) out.emplace_back(piece);
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < text.size() && (text[end] == '.' || text[end] == '!' || text[end] == '?')) ++end;
    while (end < text.size() && (text[end] == '"' || text[end] == '\'' || text[end] == ')')) ++end;
    const bool at_boundary = end == text.size() || is_space(text[end]);
    const bool abbreviation = c == '.' && end == i + 1 && ends_with_abbreviation(text.substr(start, i + 1 - start));
    if (at_boundary && !abbreviation) {
      emit(text.substr(start, end - start));
      start = end;
    }
    i = end;
  }
  if (start < text.size()) emit(text.substr(start));
  return out;
}

std::vector<SentenceUnit> split_sentences(const Review& review) {
  std::vector<SentenceUnit> units;
  auto texts = split_sentences(review.body);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    SentenceUnit u;
    u.review_id = review.id;
    u.index = i;
    u.text = std::move(texts[i]);
    units.push_back(std::move(u));
  }
  return units;
}

std::vector<double> embed_sentence(const EmbeddingTable& table, std::span<const std::string> tokens,
                                   bool* out_of_vocabulary) {
  std::vector<double> mean(table.dim(), 0.0);
  std::size_t hits = 0;
  for (const auto& token : tokens) {
    const auto* vec = table.find(token);
    if (vec == nullptr) continue;
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += (*vec)[k];
    ++hits;
  }
  if (hits > 0) {
    for (auto& x : mean) x /= static_cast<double>(hits);
  }
  if (out_of_vocabulary != nullptr) *out_of_vocabulary = hits == 0;
  return mean;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw Error(Errc::invalid_argument, fmt::format("cosine of vectors with dimensions {} and {}", u.size(), v.size()));
  }
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::string ExtractiveSummary::text() const {
  std::string out;
  for (const auto& s : sentences) {
    if (!out.empty()) out += ' ';
    out += s.text;
  }
  return out;
}

ExtractiveSummary summarize_extractive(std::vector<SentenceUnit> sentences, const ExtractiveConfig& config) {
  config.validate();
  ExtractiveSummary summary;
  if (sentences.empty()) return summary;

  std::stable_sort(sentences.begin(), sentences.end(), [](const SentenceUnit& a, const SentenceUnit& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.review_id != b.review_id) return a.review_id < b.review_id;
    return a.index < b.index;
  });

  for (auto& candidate : sentences) {
    const std::size_t words = candidate.word_count();
    if (!summary.sentences.empty()) {
      if (summary.word_count + words > config.word_budget) continue;
      bool redundant = false;
      for (const auto& chosen : summary.sentences) {
        if (cosine(candidate.embedding, chosen.embedding) >= config.lambda) {
          redundant = true;
          break;
        }
      }
      if (redundant) continue;
    }
    summary.word_count += words;
    summary.sentences.push_back(std::move(candidate));
  }
  return summary;
}

}  // namespace revsum
