// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <unordered_set>

#include "revsum/corpus.hpp"
#include "revsum/error.hpp"
#include "revsum/log.hpp"
#include "utf8.hpp"

namespace revsum {
namespace {

// Lowercased letter runs of `text`, each padded with a space on both sides,
// then cut into code-point trigrams.
std::vector<std::string> trigrams(std::string_view text) {
  std::vector<std::string> out;
  std::vector<char32_t> word;
  auto flush = [&] {
    if (word.empty()) return;
    std::vector<char32_t> padded;
    padded.reserve(word.size() + 2);
    padded.push_back(U' ');
    padded.insert(padded.end(), word.begin(), word.end());
    padded.push_back(U' ');
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      std::string gram;
      for (std::size_t k = 0; k < 3; ++k) utf8::append(gram, padded[i + k]);
      out.push_back(std::move(gram));
    }
    word.clear();
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = utf8::next(text, pos);
    if (utf8::is_latin_letter(cp)) {
      word.push_back(utf8::to_lower(cp));
    } else if (cp == '\'' && !word.empty()) {
      continue;  // "don't" -> "dont"
    } else {
      flush();
    }
  }
  flush();
  return out;
}

}  // namespace

void TrigramDetector::add_profile(std::string language, std::string_view training_text) {
  Profile profile;
  profile.language = std::move(language);
  for (auto& gram : trigrams(training_text)) {
    ++profile.counts[gram];
    ++profile.total;
  }
  profiles_.push_back(std::move(profile));
  recompute_vocabulary();
}

void TrigramDetector::recompute_vocabulary() {
  std::unordered_set<std::string> all;
  for (const auto& p : profiles_) {
    for (const auto& [gram, n] : p.counts) all.insert(gram);
  }
  vocabulary_ = all.size() + 1;  // +1 for unseen trigrams
}

TrigramDetector TrigramDetector::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(Errc::io, "language profile directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  TrigramDetector detector;
  for (const auto& path : files) {
    std::ifstream in(path, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    detector.add_profile(path.stem().string(), text);
  }
  if (detector.profiles_.empty()) throw Error(Errc::io, "no language profiles in " + dir.string());
  return detector;
}

std::vector<std::string> TrigramDetector::languages() const {
  std::vector<std::string> out;
  for (const auto& p : profiles_) out.push_back(p.language);
  return out;
}

Detection TrigramDetector::detect(std::string_view text) const {
  auto grams = trigrams(text);
  if (grams.empty() || profiles_.empty()) return {"und", 0.0};

  // Interpolated with a uniform background so a larger training text does
  // not penalize its language the way add-one smoothing does.
  constexpr double kWeight = 0.9;
  const double background = (1.0 - kWeight) / static_cast<double>(vocabulary_);
  std::vector<double> scores;
  scores.reserve(profiles_.size());
  for (const auto& p : profiles_) {
    const double total = static_cast<double>(std::max(p.total, 1L));
    double s = 0.0;
    for (const auto& g : grams) {
      auto it = p.counts.find(g);
      const double count = it == p.counts.end() ? 0.0 : it->second;
      s += std::log(kWeight * count / total + background);
    }
    scores.push_back(s);
  }
  auto best = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - scores[best]);
  return {profiles_[best].language, 1.0 / z};
}

FilterResult filter_english(const ReviewCorpus& corpus, const LanguageDetector& detector, LanguageMode mode) {
  FilterResult result;
  result.corpus.app_id = corpus.app_id;
  for (const auto& review : corpus.reviews) {
    std::string language;
    if (mode == LanguageMode::trust_field && review.language) {
      language = *review.language;
    } else {
      language = detector.detect(review.body).language;
    }
    if (language == "en") {
      result.corpus.reviews.push_back(review);
    } else {
      ++result.removed;
    }
  }
  if (result.corpus.reviews.empty() && !corpus.reviews.empty()) {
    log::warn("{}: no English reviews remain after language filtering", corpus.app_id);
  }
  return result;
}

}  // namespace revsum
