// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef REVSUM_EXTRACTIVE_HPP
#define REVSUM_EXTRACTIVE_HPP

#include <cstddef>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "revsum/corpus.hpp"

namespace revsum {

struct SentenceUnit {
  std::string review_id;
  std::size_t index = 0;  // position within the review
  std::string text;
  std::vector<std::string> tokens;
  double score = 0.0;
  std::vector<double> embedding;
  bool out_of_vocabulary = false;  // no token had a vector; embedding is zero

  std::size_t word_count() const;
};

/// Word vectors in the plain-text interchange format, one "token v1 ... vd"
/// line per token. The dimension comes from the first line.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  static EmbeddingTable load(const std::filesystem::path& path);
  static EmbeddingTable read(std::istream& in);

  void add(std::string token, std::vector<double> vector);
  const std::vector<double>* find(std::string_view token) const;
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

struct ExtractiveConfig {
  double lambda = 0.1;           // reject a sentence once cosine to any selected one reaches this
  std::size_t word_budget = 120;

  void validate() const;
};

inline constexpr std::size_t kMinSentenceWords = 3;

/// Splits on '.', '!' or '?' followed by whitespace or end of text, keeping
/// the terminator. Common abbreviations ("e.g.", "vs.") do not end a sentence.
/// Fragments shorter than three words are dropped.
std::vector<std::string> split_sentences(std::string_view text);
std::vector<SentenceUnit> split_sentences(const Review& review);

/// Unweighted mean of the in-vocabulary token vectors. All-OOV input gives a
/// zero vector and sets `*out_of_vocabulary`.
std::vector<double> embed_sentence(const EmbeddingTable& table, std::span<const std::string> tokens,
                                   bool* out_of_vocabulary = nullptr);

/// Cosine similarity; 0 when either vector has zero norm. Throws on a dimension mismatch.
double cosine(std::span<const double> u, std::span<const double> v);

struct ExtractiveSummary {
  std::vector<SentenceUnit> sentences;  // selection order
  std::size_t word_count = 0;

  std::string text() const;
};

/// Greedy selection by descending score (ties: review id, then sentence index).
/// A sentence is taken when its cosine to every selected sentence is below
/// lambda and it fits in the remaining word budget; others are skipped. The
/// top-scored sentence is always taken, even when it alone exceeds the budget.
ExtractiveSummary summarize_extractive(std::vector<SentenceUnit> sentences, const ExtractiveConfig& config);

}  // namespace revsum

#endif  // REVSUM_EXTRACTIVE_HPP
