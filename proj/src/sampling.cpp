// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include "revsum/sampling.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "csv.hpp"
#include "revsum/error.hpp"

namespace revsum {

std::size_t SamplingPlan::total() const {
  std::size_t sum = 0;
  for (const auto& [rating, q] : quotas) sum += q;
  return sum;
}

std::size_t StratifiedSample::total() const {
  std::size_t sum = 0;
  for (const auto& [rating, ids] : selected) sum += ids.size();
  return sum;
}

namespace {

__extension__ using u128 = unsigned __int128;

struct Stratum {
  int rating;
  std::uint64_t pop;
};

// Hamilton apportionment of `seats` over `strata`; seats < sum of populations.
std::map<int, std::size_t> hamilton(const std::vector<Stratum>& strata, std::uint64_t seats) {
  const std::uint64_t total = std::accumulate(strata.begin(), strata.end(), std::uint64_t{0},
                                              [](std::uint64_t acc, const Stratum& s) { return acc + s.pop; });
  struct Part {
    int rating;
    std::uint64_t pop;
    std::uint64_t whole;
    std::uint64_t remainder;  // numerator over `total`
  };
  std::vector<Part> parts;
  std::uint64_t assigned = 0;
  for (const auto& s : strata) {
    const u128 num = static_cast<u128>(seats) * s.pop;
    Part p{s.rating, s.pop, static_cast<std::uint64_t>(num / total), static_cast<std::uint64_t>(num % total)};
    assigned += p.whole;
    parts.push_back(p);
  }
  std::sort(parts.begin(), parts.end(), [](const Part& a, const Part& b) {
    if (a.remainder != b.remainder) return a.remainder > b.remainder;
    if (a.pop != b.pop) return a.pop > b.pop;
    return a.rating < b.rating;
  });
  std::map<int, std::size_t> quotas;
  std::uint64_t leftover = seats - assigned;
  for (auto& p : parts) {
    quotas[p.rating] = p.whole + (leftover > 0 ? 1 : 0);
    if (leftover > 0) --leftover;
  }
  return quotas;
}

}  // namespace

SamplingPlan allocate(const RatingCounts& population, std::size_t total_k) {
  if (total_k < 1) throw Error(Errc::invalid_argument, "sample size K must be at least 1");
  std::vector<Stratum> active;
  for (const auto& [rating, count] : population) {
    if (count > 0) active.push_back({rating, count});
  }
  if (active.empty()) throw Error(Errc::invalid_argument, "cannot allocate over an empty population");

  SamplingPlan plan;
  plan.total_k = total_k;
  for (const auto& [rating, count] : population) plan.quotas[rating] = 0;

  std::uint64_t remaining = total_k;
  while (!active.empty()) {
    std::uint64_t pop_total = 0;
    for (const auto& s : active) pop_total += s.pop;
    if (remaining >= pop_total) {
      for (const auto& s : active) plan.quotas[s.rating] = s.pop;
      plan.population_short = remaining > pop_total;
      break;
    }
    auto quotas = hamilton(active, remaining);
    std::vector<Stratum> still_active;
    bool capped = false;
    for (const auto& s : active) {
      if (quotas[s.rating] > s.pop) {
        plan.quotas[s.rating] = s.pop;
        remaining -= s.pop;
        capped = true;
      } else {
        still_active.push_back(s);
      }
    }
    if (!capped) {
      for (const auto& [rating, q] : quotas) plan.quotas[rating] = q;
      break;
    }
    active = std::move(still_active);
  }
  return plan;
}

RatingCounts rating_counts(const ReviewCorpus& corpus) {
  RatingCounts counts;
  for (const auto& r : corpus.reviews) ++counts[r.rating];
  return counts;
}

std::map<int, std::vector<ScoredReview>> partition_by_rating(const ReviewCorpus& corpus,
                                                             std::span<const ScoredReview> ranked) {
  std::unordered_map<std::string_view, int> rating_of;
  for (const auto& r : corpus.reviews) rating_of.emplace(r.id, r.rating);
  std::map<int, std::vector<ScoredReview>> strata;
  for (const auto& s : ranked) {
    auto it = rating_of.find(s.review_id);
    if (it == rating_of.end()) throw Error(Errc::invalid_argument, "ranked review not in corpus: " + s.review_id);
    strata[it->second].push_back(s);
  }
  return strata;
}

StratifiedSample select(const std::string& app_id, const std::map<int, std::vector<ScoredReview>>& ranked,
                        const SamplingPlan& plan) {
  StratifiedSample sample;
  sample.app_id = app_id;
  for (const auto& [rating, quota] : plan.quotas) {
    auto it = ranked.find(rating);
    const std::size_t available = it == ranked.end() ? 0 : it->second.size();
    if (available < quota) sample.undersized.push_back(rating);
    const std::size_t take = std::min(quota, available);
    auto& out = sample.selected[rating];
    if (take > 0) out.assign(it->second.begin(), it->second.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return sample;
}

void write_manifest(std::ostream& out, const StratifiedSample& sample) {
  out << "app_id,rating,review_id,score,rank_in_stratum\n";
  for (const auto& [rating, reviews] : sample.selected) {
    for (std::size_t i = 0; i < reviews.size(); ++i) {
      out << csv::escape(sample.app_id) << ',' << rating << ',' << csv::escape(reviews[i].review_id) << ','
          << fmt::format("{:.10f}", reviews[i].score) << ',' << (i + 1) << '\n';
    }
  }
}

std::vector<ManifestRow> read_manifest(std::istream& in) {
  auto rows = csv::read_all(in);
  if (rows.empty() || rows[0].size() != 5 || rows[0][0] != "app_id") {
    throw Error(Errc::parse, "sample manifest must start with header app_id,rating,review_id,score,rank_in_stratum");
  }
  std::vector<ManifestRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != 5) throw Error(Errc::parse, fmt::format("manifest row {} has {} fields", i + 1, r.size()));
    try {
      out.push_back({r[0], std::stoi(r[1]), r[2], std::stod(r[3]), std::stoul(r[4])});
    } catch (const std::exception&) {
      throw Error(Errc::parse, fmt::format("manifest row {} is malformed", i + 1));
    }
  }
  return out;
}

}  // namespace revsum
