// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef REVSUM_RANKING_HPP
#define REVSUM_RANKING_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "revsum/corpus.hpp"
#include "revsum/text.hpp"

namespace revsum {

/// Document frequencies over a review collection. Immutable once fitted, so
/// concurrent scoring is safe.
///
///   weight(t, d) = f(t, d) * ln(N / df(t))
///
/// with N the number of reviews and f(t, d) the multiplicity of t in bag d.
class TfIdfModel {
 public:
  /// Throws Error(invalid_argument) on an empty collection.
  static TfIdfModel fit(std::span<const TokenBag> bags);

  std::size_t doc_count() const { return doc_count_; }
  /// 0 for terms never seen.
  std::size_t doc_freq(std::string_view term) const;
  const std::map<std::string, std::size_t, std::less<>>& doc_freqs() const { return doc_freq_; }

  /// f * ln(N / df). A term the model has not seen is treated as df = 1 and
  /// logged, since that only happens when scoring against a foreign model.
  double term_weight(std::string_view term, int frequency) const;
  double term_weight(std::string_view term, const TokenBag& bag) const;

  /// Mean of term_weight over the distinct terms of the bag; 0 for an empty bag.
  double score(const TokenBag& bag) const;

  /// "N=<count>" then one "term<TAB>df" line per term, sorted by term.
  void dump(std::ostream& out) const;
  static TfIdfModel load(std::istream& in);

 private:
  std::size_t doc_count_ = 0;
  std::map<std::string, std::size_t, std::less<>> doc_freq_;
};

struct ScoredReview {
  std::string review_id;
  double score = 0.0;
};

/// Scores equal to nine decimal places rank as tied, so summation order
/// cannot decide between mathematically equal scores.
inline std::int64_t score_tie_key(double score) { return std::llround(score * 1e9); }

/// Orders reviews by descending score; ties go to the more recent posted_at,
/// then to the smaller id. `bags` must cover every review of the corpus.
std::vector<ScoredReview> rank(const ReviewCorpus& corpus, const TfIdfModel& model, std::span<const TokenBag> bags);

}  // namespace revsum

#endif  // REVSUM_RANKING_HPP
