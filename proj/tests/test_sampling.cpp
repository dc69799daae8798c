// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "revsum/error.hpp"
#include "revsum/sampling.hpp"

using namespace revsum;

namespace {

std::map<int, std::vector<ScoredReview>> strata(const RatingCounts& population) {
  std::map<int, std::vector<ScoredReview>> ranked;
  for (const auto& [rating, count] : population) {
    for (std::size_t i = 0; i < count; ++i) {
      ranked[rating].push_back({std::to_string(rating) + "-" + std::to_string(i), 1.0 / static_cast<double>(i + 1)});
    }
  }
  return ranked;
}

std::size_t total(const RatingCounts& p) {
  std::size_t n = 0;
  for (const auto& [r, c] : p) n += c;
  return n;
}

}  // namespace

TEST_CASE("allocation examples") {
  CHECK(allocate({{1, 50}, {5, 50}}, 10).quotas == std::map<int, std::size_t>{{1, 5}, {5, 5}});
  CHECK(allocate({{1, 200}, {2, 100}, {3, 100}}, 20).quotas == std::map<int, std::size_t>{{1, 10}, {2, 5}, {3, 5}});
}

TEST_CASE("remainder ties go to the larger stratum, then the lower rating") {
  // Shares 1/3 each: one seat left over.
  CHECK(allocate({{1, 10}, {2, 10}, {3, 10}}, 1).quotas == std::map<int, std::size_t>{{1, 1}, {2, 0}, {3, 0}});
  // 7/2 and 3/2 share remainder 1/2; the 7-review stratum wins.
  CHECK(allocate({{4, 3}, {5, 7}}, 5).quotas == std::map<int, std::size_t>{{4, 1}, {5, 4}});
}

TEST_CASE("K must be positive") { CHECK_THROWS_AS(allocate({{1, 3}}, 0), Error); }

TEST_CASE("K beyond the population takes everything and flags it") {
  const auto plan = allocate({{1, 3}, {5, 4}}, 10);
  CHECK(plan.population_short);
  CHECK(plan.quotas == std::map<int, std::size_t>{{1, 3}, {5, 4}});
  CHECK(plan.total() == 7);
}

TEST_CASE("allocation matches the exhaustive largest-remainder oracle") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto pop = oracle::random_population(rng);
    const std::size_t k = 1 + rng() % (total(pop) + 20);
    const auto plan = allocate(pop, k);
    CHECK(plan.quotas == oracle::hamilton(pop, k));
    const std::size_t want = std::min(k, total(pop));
    const auto got = plan.total();
    CHECK(got + (pop.size() - 1) >= want);
    CHECK(got <= want + (pop.size() - 1));
    CHECK(got == want);
    for (const auto& [r, q] : plan.quotas) CHECK(q <= pop.at(r));
  }
}

TEST_CASE("quotas are scale invariant") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto pop = oracle::random_population(rng);
    // Only meaningful while K fits the smaller population.
    const std::size_t k = 1 + rng() % total(pop);
    RatingCounts scaled;
    const std::size_t c = 2 + rng() % 5;
    for (const auto& [r, n] : pop) scaled[r] = n * c;
    CHECK(allocate(scaled, k).quotas == allocate(pop, k).quotas);
  }
}

TEST_CASE("selection takes a prefix of every stratum") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto pop = oracle::random_population(rng);
    const auto ranked = strata(pop);
    const std::size_t k = 1 + rng() % total(pop);
    const auto plan = allocate(pop, k);
    const auto sample = select("app", ranked, plan);
    CHECK(sample.total() == plan.total());
    for (const auto& [rating, chosen] : sample.selected) {
      const auto& full = ranked.at(rating);
      REQUIRE(chosen.size() <= full.size());
      for (std::size_t i = 0; i < chosen.size(); ++i) CHECK(chosen[i].review_id == full[i].review_id);
    }
  }
}

TEST_CASE("select: quota two and an undersized stratum") {
  std::map<int, std::vector<ScoredReview>> ranked{{3, {{"a", 0.9}, {"b", 0.5}, {"c", 0.1}}}, {5, {{"z", 0.4}}}};
  SamplingPlan plan;
  plan.quotas = {{3, 2}, {5, 3}};
  const auto sample = select("app", ranked, plan);
  REQUIRE(sample.selected.at(3).size() == 2);
  CHECK(sample.selected.at(3)[0].review_id == "a");
  CHECK(sample.selected.at(3)[1].review_id == "b");
  CHECK(sample.selected.at(5).size() == 1);
  CHECK(sample.undersized == std::vector<int>{5});
}

TEST_CASE("manifest round-trip") {
  std::map<int, std::vector<ScoredReview>> ranked{{1, {{"x,1", 0.25}, {"y", 0.125}}}, {4, {{"z", 1.5}}}};
  SamplingPlan plan;
  plan.quotas = {{1, 2}, {4, 1}};
  const auto sample = select("my app", ranked, plan);
  std::stringstream ss;
  write_manifest(ss, sample);
  const auto rows = read_manifest(ss);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].review_id == "x,1");
  CHECK(rows[0].app_id == "my app");
  CHECK(rows[1].rank_in_stratum == 2);
  CHECK(rows[2].rating == 4);
  CHECK(rows[2].score == 1.5);
}
