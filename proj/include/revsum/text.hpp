// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef REVSUM_TEXT_HPP
#define REVSUM_TEXT_HPP

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace revsum {

struct Review;

/// Lowercases `text` and removes URLs, HTML tags and entities, digits,
/// punctuation and any character that is not a Latin letter (emoji and other
/// symbols included). Runs of whitespace collapse to one space; the result has
/// no leading or trailing space. normalize(normalize(x)) == normalize(x).
std::string normalize(std::string_view text);

/// Splits on ASCII whitespace.
std::vector<std::string_view> split_whitespace(std::string_view text);

std::size_t count_whitespace_tokens(std::string_view text);

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(std::unordered_set<std::string> words) : words_(std::move(words)) {}

  /// One word per line; blank lines and lines starting with '#' are ignored.
  static StopwordList load(const std::filesystem::path& path);

  bool contains(std::string_view word) const { return words_.contains(std::string(word)); }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

/// Dictionary lookup ("surface<TAB>lemma") with a suffix-stripping fallback.
/// Total: a word no rule applies to is returned unchanged.
class Lemmatizer {
 public:
  Lemmatizer() = default;
  explicit Lemmatizer(std::unordered_map<std::string, std::string> table) : table_(std::move(table)) {}

  static Lemmatizer load(const std::filesystem::path& path);

  std::string lemma(std::string_view word) const;
  std::size_t dictionary_size() const { return table_.size(); }

 private:
  std::unordered_map<std::string, std::string> table_;
};

struct TokenBag {
  std::string review_id;
  std::map<std::string, int> tokens;  // term -> multiplicity
  std::size_t raw_word_count = 0;

  std::size_t distinct() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

/// normalize -> drop stopwords -> lemmatize -> drop stopwords again.
std::vector<std::string> tokenize_terms(std::string_view text, const StopwordList& stopwords,
                                        const Lemmatizer& lemmatizer);

TokenBag tokenize_bag(const Review& review, const StopwordList& stopwords, const Lemmatizer& lemmatizer,
                      bool include_title = false);

}  // namespace revsum

#endif  // REVSUM_TEXT_HPP
