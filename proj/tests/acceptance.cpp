// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

// Prints one PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <fmt/core.h>

#include "oracles.hpp"
#include "revsum/evaluation.hpp"
#include "revsum/extractive.hpp"
#include "revsum/llm.hpp"
#include "revsum/log.hpp"
#include "revsum/pipeline.hpp"
#include "revsum/prompts.hpp"
#include "revsum/ranking.hpp"
#include "revsum/sampling.hpp"
#include "revsum/stats.hpp"
#include "support.hpp"

using namespace revsum;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

// Collects failed checks for one criterion.
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, std::string what) {
    if (!ok) failures.push_back(std::move(what));
  }
};

int g_failed = 0;

void criterion(int number, std::string_view title, const std::function<std::string(Check&)>& body) {
  Check check;
  std::string detail;
  try {
    detail = body(check);
  } catch (const std::exception& e) {
    check.failures.push_back(std::string("exception: ") + e.what());
  }
  const bool ok = check.failures.empty();
  if (!ok) ++g_failed;
  fmt::print("{} criterion {:>2}: {}{}\n", ok ? "PASS" : "FAIL", number, title, detail.empty() ? "" : " (" + detail + ")");
  for (const auto& f : check.failures) fmt::print("       - {}\n", f);
  std::fflush(stdout);
}

std::map<std::string, std::string> read_csv_pairs(const fs::path& p) {
  std::istringstream in(testing::slurp(p));
  std::map<std::string, std::string> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    out[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return out;
}

RunConfig bare_config(const testing::TempDir& dir) {
  RunConfig c;
  c.base_dir = dir.path();
  c.output_dir = dir / "out";
  c.cache_dir = dir / "cache";
  return c;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = testing::slurp(e.path());
  }
  return files;
}

}  // namespace

int main() {
  log::set_min_level(log::Level::error);

  criterion(1, "chi-square on the readability study table", [](Check& c) {
    testing::TempDir dir;
    auto config = bare_config(dir);
    config.contingency = testing::data_dir() / "fixtures" / "readability_study.csv";
    const auto t0 = Clock::now();
    Pipeline p(config);
    p.evaluate();
    const double elapsed = seconds_since(t0);
    const auto row = testing::slurp(p.run_dir() / "reports" / "chi_square.csv");
    std::istringstream in(row.substr(row.find('\n') + 1));
    double stat = 0, df = 0, pv = 0;
    char comma = 0;
    in >> stat >> comma >> df >> comma >> pv;
    c.expect(std::abs(stat - 5.80) <= 0.01, fmt::format("statistic {}", stat));
    c.expect(df == 6, fmt::format("df {}", df));
    c.expect(pv > 0.44 && pv < 0.45, fmt::format("p {}", pv));
    c.expect(elapsed < 1.0, fmt::format("took {:.3f} s", elapsed));
    return fmt::format("statistic {:.4f}, df {}, p {:.4f}, {:.3f} s", stat, df, pv, elapsed);
  });

  criterion(2, "entity count table averages and the CoD_r-5 minus CoD-5 difference", [](Check& c) {
    testing::TempDir dir;
    auto config = bare_config(dir);
    config.entity_counts = testing::data_dir() / "fixtures" / "entity_counts.csv";
    Pipeline p(config);
    p.evaluate();
    const auto avg = read_csv_pairs(p.run_dir() / "reports" / "entity_counts_avg.csv");
    const std::map<std::string, double> expect{
        {"cod_1", 4.00},   {"cod_2", 5.75},   {"cod_3", 7.50},    {"cod_4", 8.37},    {"cod_5", 9.12},
        {"cod_r_1", 5.37}, {"cod_r_2", 8.25}, {"cod_r_3", 9.87},  {"cod_r_4", 11.00}, {"cod_r_5", 11.75},
        {"vanilla", 9.50}, {"tfidf", 6.25}};
    for (const auto& [cond, want] : expect) {
      const auto it = avg.find(cond);
      if (it == avg.end()) {
        c.expect(false, "missing " + cond);
        continue;
      }
      const double got = std::stod(it->second);
      c.expect(std::abs(got - want) <= 0.005 + 1e-9, fmt::format("{} = {} (want {})", cond, got, want));
    }
    const auto ttests = testing::slurp(p.run_dir() / "reports" / "entity_count_ttests.csv");
    std::istringstream in(ttests);
    std::string line, header;
    std::getline(in, header);
    bool found = false;
    while (std::getline(in, line)) {
      if (line.rfind("cod_r_5,cod_5,", 0) != 0) continue;
      found = true;
      // Columns: a,b,n,mean_difference,...
      std::vector<std::string> f;
      std::stringstream ls(line);
      for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
      std::vector<std::string> h;
      std::stringstream hs(header);
      for (std::string x; std::getline(hs, x, ',');) h.push_back(x);
      for (std::size_t k = 0; k < h.size() && k < f.size(); ++k) {
        if (h[k] == "mean_difference") c.expect(std::abs(std::stod(f[k]) - 2.625) < 1e-9, "mean difference " + f[k]);
      }
    }
    c.expect(found, "no cod_r_5 vs cod_5 row");
    return "12 condition means, mean difference 2.625";
  });

  criterion(3, "TF.IDF fit, term weight and score against a brute-force recount", [](Check& c) {
    std::mt19937_64 rng(20240611);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      oracle::BruteTfIdf brute{oracle::random_docs(rng, 10, 8)};
      std::vector<TokenBag> bags;
      for (std::size_t i = 0; i < brute.docs.size(); ++i) bags.push_back(oracle::to_bag(std::to_string(i), brute.docs[i]));
      const auto model = TfIdfModel::fit(bags);
      c.expect(model.doc_count() == brute.docs.size(), "doc count");
      for (const auto& [term, df] : model.doc_freqs()) c.expect(df == brute.df(term), "df of " + term);
      for (std::size_t i = 0; i < bags.size(); ++i) {
        for (const auto& [term, f] : bags[i].tokens) worst = std::max(worst, std::abs(model.term_weight(term, bags[i]) - brute.weight(term, i)));
        worst = std::max(worst, std::abs(model.score(bags[i]) - brute.score(i)));
      }
    }
    c.expect(worst <= 1e-12, fmt::format("max error {:.3e}", worst));
    return fmt::format("200 corpora, max error {:.1e}", worst);
  });

  criterion(4, "largest-remainder allocation, scale invariance and prefix selection", [](Check& c) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 1000; ++trial) {
      const auto pop = oracle::random_population(rng);
      std::size_t n = 0;
      for (const auto& [r, k] : pop) n += k;
      const std::size_t k = 1 + rng() % (n + 20);
      const auto plan = allocate(pop, k);
      const auto want = static_cast<long>(std::min(k, n));
      const auto got = static_cast<long>(plan.total());
      c.expect(std::abs(got - want) <= static_cast<long>(pop.size()) - 1, fmt::format("sum {} for K {}", got, k));
      c.expect(plan.quotas == oracle::hamilton(pop, k), "oracle mismatch");
      RatingCounts scaled;
      for (const auto& [r, m] : pop) scaled[r] = m * 3;
      // Scaling cannot help once K exceeds the population; every review is taken then.
      if (k <= n) c.expect(allocate(scaled, k).quotas == plan.quotas, "scale invariance");

      std::map<int, std::vector<ScoredReview>> ranked;
      for (const auto& [r, m] : pop) {
        for (std::size_t i = 0; i < m; ++i) ranked[r].push_back({fmt::format("{}-{}", r, i), 1.0 / static_cast<double>(i + 1)});
      }
      const auto sample = select("app", ranked, plan);
      for (const auto& [r, chosen] : sample.selected) {
        for (std::size_t i = 0; i < chosen.size(); ++i) {
          c.expect(chosen[i].review_id == ranked[r][i].review_id, "prefix property");
        }
      }
    }
    return "1000 populations";
  });

  criterion(5, "extractive selection invariants and greedy replay", [](Check& c) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lam(0.05, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
      const auto units = oracle::random_sentences(rng, 4);
      const double lambda = lam(rng);
      const std::size_t budget = 10 + rng() % 60;
      const auto summary = summarize_extractive(units, {lambda, budget});
      const auto expect = oracle::greedy_replay(units, lambda, budget);
      bool same = summary.sentences.size() == expect.size();
      for (std::size_t i = 0; same && i < expect.size(); ++i) {
        same = summary.sentences[i].review_id == units[expect[i]].review_id &&
               summary.sentences[i].index == units[expect[i]].index;
      }
      c.expect(same, fmt::format("trial {} differs from replay", trial));
      c.expect(summary.sentences.size() <= 1 || summary.word_count <= budget, "word budget");
      for (std::size_t i = 0; i < summary.sentences.size(); ++i) {
        for (std::size_t j = i + 1; j < summary.sentences.size(); ++j) {
          c.expect(cosine(summary.sentences[i].embedding, summary.sentences[j].embedding) < lambda, "pairwise cosine");
        }
      }
    }
    return "500 sentence sets";
  });

  criterion(6, "offline pipeline on the mini corpus is deterministic", [](Check& c) {
    testing::TempDir dir;
    auto run = [&](std::string_view tag) {
      auto config = load_config(testing::data_dir() / "mini" / "config.toml");
      config.set("run.output_dir", (dir / (std::string(tag) + "-out")).string());
      config.set("run.cache_dir", (dir / (std::string(tag) + "-cache")).string());
      config.offline = true;
      Pipeline p(config);
      p.ingest();
      p.sample();
      p.summarize("cod_r");
      p.evaluate();
      c.expect(p.network_requests() == 0, "network requests issued");
      return p.run_dir();
    };
    const auto t0 = Clock::now();
    const auto a = run("a");
    const auto b = run("b");
    const double elapsed = seconds_since(t0);
    std::size_t reviews = 0;
    std::set<int> ratings;
    for (const auto& e : fs::directory_iterator(a / "corpus")) {
      if (e.path().extension() != ".jsonl") continue;
      std::istringstream in(testing::slurp(e.path()));
      for (const auto& r : ingest_stream(in, InputFormat::jsonl).corpus.reviews) {
        ++reviews;
        ratings.insert(r.rating);
      }
    }
    c.expect(reviews >= 60, fmt::format("{} reviews", reviews));
    c.expect(ratings.size() == 5, "not all ratings present");
    const auto sa = snapshot(a), sb = snapshot(b);
    c.expect(sa == sb, "outputs differ between runs");
    c.expect(elapsed < 30.0, fmt::format("took {:.1f} s", elapsed));
    return fmt::format("{} reviews, {} files identical, {:.2f} s for two runs", reviews, sa.size(), elapsed);
  });

  criterion(7, "rendered CoD and CoD_r prompts keep the published wording", [](Check& c) {
    const auto lib = TemplateLibrary::load(testing::data_dir() / "templates");
    const std::vector<PromptReview> reviews{{5, "Great."}};
    const auto cod = render(lib.get("cod"), "Calm", reviews);
    const auto codr = render(lib.get("cod_r"), "Calm", reviews);
    for (const auto* text : {&cod, &codr}) {
      c.expect(text->find("Repeat the following 2 steps 5 times.") != std::string::npos, "iteration sentence");
      c.expect(text->find("Write a new, denser summary of identical length which covers every entity and detail "
                          "from the previous summary plus the missing entities.") != std::string::npos,
               "step 2");
    }
    c.expect(codr.find("any functional or non-functional feature of the app") != std::string::npos, "entity definition");
    c.expect(codr.find("Avoid including personal and location specific information, like name, place, URLs, and "
                       "emails, in summaries.") != std::string::npos,
             "PII clause");
    c.expect(cod.find("relevant to the main story") != std::string::npos, "CoD entity criteria");
    return "";
  });

  criterion(8, "chi-square and t p-values at published quantiles", [](Check& c) {
    const double chi = stats::chi_square_sf(12.592, 6);
    const double t = stats::student_t_two_tailed(2.365, 7);
    c.expect(std::abs(chi - 0.05) < 1e-3, fmt::format("chi2 sf {}", chi));
    c.expect(std::abs(t - 0.05) < 1e-3, fmt::format("t two-tailed {}", t));
    c.expect(std::abs(stats::chi_square_critical(0.05, 6) - 12.592) < 1e-3, "chi2 critical");
    c.expect(std::abs(stats::student_t_critical(0.05, 7) - 2.365) < 1e-3, "t critical");
    const double boost_chi =
        boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(6), 12.592));
    c.expect(std::abs(chi - boost_chi) < 1e-12, "boost chi2 disagreement");
    return fmt::format("P(chi2_6 > 12.592) = {:.6f}, P(|t_7| > 2.365) = {:.6f}", chi, t);
  });

  criterion(9, "cost accounting with the published price fixture", [](Check& c) {
    const llm::Price price{2.5, 10.0};
    c.expect(llm::estimate_cost({1'000'000, 0}, price) == 2.5, "1M input tokens");
    c.expect(llm::estimate_cost({20'000, 2'000}, price) == 0.07, "20k/2k");
    c.expect(llm::estimate_cost({0, 0}, price) == 0.0, "zero usage");
    // Per-summary aggregation as in the usage report: mean of per-call costs.
    const std::vector<llm::UsageRecord> calls{{30'000, 2'500}, {28'000, 2'700}, {32'000, 2'300}};
    double total = 0;
    for (const auto& u : calls) total += llm::estimate_cost(u, price);
    const double per_summary = total / static_cast<double>(calls.size());
    c.expect(std::abs(per_summary - (90'000 * 2.5 + 7'500 * 10.0) / 1e6 / 3) < 1e-15, "aggregation");
    return fmt::format("$0.07 exact, per-summary mean ${:.3f} on the fixture", per_summary);
  });

  criterion(10, "non-reproducible items are declared", [](Check& c) {
    const auto readme = testing::slurp(fs::path(REVSUM_SOURCE_DIR) / "README.md");
    for (std::string_view item : {"readability study", "density p-values", "live-LLM recall"}) {
      c.expect(readme.find(item) != std::string::npos, fmt::format("README does not mention '{}'", item));
    }
    return "human readability outcomes, entity density p-values, live-LLM recall";
  });

  return g_failed == 0 ? 0 : 1;
}
