// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef REVSUM_CORPUS_HPP
#define REVSUM_CORPUS_HPP

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace revsum {

struct Review {
  std::string id;
  std::string app_id;
  int rating = 0;  // 1..5 stars
  std::optional<std::string> title;
  std::string body;
  std::chrono::year_month_day posted_at{};
  std::optional<std::int64_t> likes;
  std::optional<std::string> language;

  bool operator==(const Review&) const = default;
};

struct ReviewCorpus {
  std::string app_id;
  std::vector<Review> reviews;  // ingestion order

  std::size_t size() const { return reviews.size(); }
  bool operator==(const ReviewCorpus&) const = default;
};

enum class InputFormat { csv, jsonl };

struct IngestReport {
  std::size_t records = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;    // malformed or invariant-violating records
  std::size_t duplicates = 0;  // later records repeating an accepted id
  std::vector<std::string> sample_reasons;  // first few rejection reasons
};

struct IngestResult {
  ReviewCorpus corpus;
  IngestReport report;
};

/// Infers the format from the extension (.csv, .jsonl, .json).
std::optional<InputFormat> infer_format(const std::filesystem::path& path);

/// Reads an exported review file. Malformed records are skipped and counted.
/// When `expected_app` is non-empty, records with an empty app_id inherit it
/// and records naming another app are rejected.
/// Throws Error(io) on an unreadable file and Error(parse) when no record is valid.
IngestResult ingest(const std::filesystem::path& path, std::optional<InputFormat> format = std::nullopt,
                    std::string_view expected_app = {});

IngestResult ingest_stream(std::istream& in, InputFormat format, std::string_view expected_app = {});

/// Writes the corpus as JSONL with the ingest keys. ingest() reads it back unchanged.
void write_jsonl(std::ostream& out, const ReviewCorpus& corpus);

std::string format_date(std::chrono::year_month_day date);
/// Accepts "YYYY-MM-DD" optionally followed by a time part ("T..." or " ...").
std::optional<std::chrono::year_month_day> parse_date(std::string_view text);

// Language filtering.

struct Detection {
  std::string language;  // ISO 639-1, "und" when undetermined
  double confidence = 0.0;
};

class LanguageDetector {
 public:
  virtual ~LanguageDetector() = default;
  virtual Detection detect(std::string_view text) const = 0;
};

/// Naive-Bayes scorer over character trigram profiles, one per language.
class TrigramDetector final : public LanguageDetector {
 public:
  void add_profile(std::string language, std::string_view training_text);
  /// Loads every "<code>.txt" file in `dir` as a training text.
  static TrigramDetector from_directory(const std::filesystem::path& dir);

  Detection detect(std::string_view text) const override;
  std::vector<std::string> languages() const;

 private:
  struct Profile {
    std::string language;
    std::unordered_map<std::string, int> counts;
    long total = 0;
  };
  std::vector<Profile> profiles_;
  std::size_t vocabulary_ = 0;

  void recompute_vocabulary();
};

enum class LanguageMode {
  detect,       // always run the detector on the body
  trust_field,  // use Review::language when present, detect otherwise
};

struct FilterResult {
  ReviewCorpus corpus;
  std::size_t removed = 0;
};

FilterResult filter_english(const ReviewCorpus& corpus, const LanguageDetector& detector,
                            LanguageMode mode = LanguageMode::detect);

}  // namespace revsum

#endif  // REVSUM_CORPUS_HPP
