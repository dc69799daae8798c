// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef REVSUM_SAMPLING_HPP
#define REVSUM_SAMPLING_HPP

#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "revsum/corpus.hpp"
#include "revsum/ranking.hpp"

namespace revsum {

inline constexpr std::size_t kDefaultSampleSize = 350;

using RatingCounts = std::map<int, std::size_t>;

struct SamplingPlan {
  std::size_t total_k = kDefaultSampleSize;
  std::map<int, std::size_t> quotas;  // rating -> reviews to draw
  bool population_short = false;      // K exceeded the whole population

  std::size_t total() const;
};

/// Largest-remainder (Hamilton) apportionment of `total_k` over the rating
/// strata. Remainders are compared exactly in integer arithmetic; ties go to
/// the larger stratum, then the lower rating. A stratum whose quota would
/// exceed its population is capped and the excess is re-apportioned over the
/// remaining strata.
SamplingPlan allocate(const RatingCounts& population, std::size_t total_k);

struct StratifiedSample {
  std::string app_id;
  std::map<int, std::vector<ScoredReview>> selected;  // rating -> top of the stratum ranking
  std::vector<int> undersized;                        // strata smaller than their quota

  std::size_t total() const;
};

/// Splits a ranking into per-rating lists, preserving order.
std::map<int, std::vector<ScoredReview>> partition_by_rating(const ReviewCorpus& corpus,
                                                             std::span<const ScoredReview> ranked);

RatingCounts rating_counts(const ReviewCorpus& corpus);

/// Takes the quota-prefix of every stratum's ranking.
StratifiedSample select(const std::string& app_id, const std::map<int, std::vector<ScoredReview>>& ranked,
                        const SamplingPlan& plan);

struct ManifestRow {
  std::string app_id;
  int rating = 0;
  std::string review_id;
  double score = 0.0;
  std::size_t rank_in_stratum = 0;  // 1-based
};

/// CSV: app_id,rating,review_id,score,rank_in_stratum
void write_manifest(std::ostream& out, const StratifiedSample& sample);
std::vector<ManifestRow> read_manifest(std::istream& in);

}  // namespace revsum

#endif  // REVSUM_SAMPLING_HPP
