// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include "revsum/text.hpp"

#include <fstream>
#include <regex>

#include "revsum/corpus.hpp"
#include "revsum/error.hpp"
#include "utf8.hpp"

namespace revsum {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

const std::regex& noise_pattern() {
  // URLs, HTML tags, HTML entities.
  static const std::regex re(R"((?:https?://|www\.)[^\s<>"]*|<[^>]*>|&#?[A-Za-z0-9]+;)",
                             std::regex::icase | std::regex::optimize);
  return re;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// "stopp" -> "stop"; keeps ll/ss/zz which are usually part of the stem.
std::string undouble(std::string stem) {
  auto n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
  }
  return stem;
}

}  // namespace

std::string normalize(std::string_view text) {
  std::string cleaned = std::regex_replace(std::string(text), noise_pattern(), " ");

  std::string out;
  out.reserve(cleaned.size());
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < cleaned.size()) {
    char32_t cp = utf8::next(cleaned, pos);
    if (utf8::is_latin_letter(cp)) {
      if (pending_space && !out.empty()) out += ' ';
      pending_space = false;
      utf8::append(out, utf8::to_lower(cp));
    } else {
      pending_space = true;
    }
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

std::size_t count_whitespace_tokens(std::string_view text) { return split_whitespace(text).size(); }

StopwordList StopwordList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot read stopword file " + path.string());
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto word = trim(line);
    if (word.empty() || word[0] == '#') continue;
    words.insert(std::move(word));
  }
  return StopwordList(std::move(words));
}

Lemmatizer Lemmatizer::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot read lemma file " + path.string());
  std::unordered_map<std::string, std::string> table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(Errc::parse, path.string() + ":" + std::to_string(lineno) + ": expected surface<TAB>lemma");
    }
    table.emplace(trim(line.substr(0, tab)), trim(line.substr(tab + 1)));
  }
  return Lemmatizer(std::move(table));
}

std::string Lemmatizer::lemma(std::string_view word) const {
  std::string w(word);
  if (auto it = table_.find(w); it != table_.end()) return it->second;

  const auto n = w.size();
  if (ends_with(w, "ies") && n > 4) return w.substr(0, n - 3) + "y";
  if (ends_with(w, "sses") || ends_with(w, "ches") || ends_with(w, "shes") || ends_with(w, "xes") ||
      ends_with(w, "zes")) {
    return w.substr(0, n - 2);
  }
  if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is")) return w;
  if (ends_with(w, "s") && n > 3) return w.substr(0, n - 1);
  if (ends_with(w, "ing") && n > 5) return undouble(w.substr(0, n - 3));
  if (ends_with(w, "ied") && n > 4) return w.substr(0, n - 3) + "y";
  if (ends_with(w, "ed") && n > 4) return undouble(w.substr(0, n - 2));
  return w;
}

std::vector<std::string> tokenize_terms(std::string_view text, const StopwordList& stopwords,
                                        const Lemmatizer& lemmatizer) {
  std::vector<std::string> terms;
  const std::string normalized = normalize(text);
  for (auto word : split_whitespace(normalized)) {
    if (stopwords.contains(word)) continue;
    std::string lemma = lemmatizer.lemma(word);
    if (lemma.empty() || stopwords.contains(lemma)) continue;
    terms.push_back(std::move(lemma));
  }
  return terms;
}

TokenBag tokenize_bag(const Review& review, const StopwordList& stopwords, const Lemmatizer& lemmatizer,
                      bool include_title) {
  std::string text = review.body;
  if (include_title && review.title && !review.title->empty()) text = *review.title + "\n" + review.body;

  TokenBag bag;
  bag.review_id = review.id;
  for (auto& term : tokenize_terms(text, stopwords, lemmatizer)) ++bag.tokens[term];
  bag.raw_word_count = count_whitespace_tokens(review.body);
  return bag;
}

}  // namespace revsum
