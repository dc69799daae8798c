// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include "revsum/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <unordered_map>

#include <fmt/format.h>

#include "revsum/error.hpp"
#include "revsum/log.hpp"

namespace revsum {

TfIdfModel TfIdfModel::fit(std::span<const TokenBag> bags) {
  if (bags.empty()) throw Error(Errc::invalid_argument, "cannot fit a TF.IDF model on zero documents");
  TfIdfModel model;
  model.doc_count_ = bags.size();
  for (const auto& bag : bags) {
    for (const auto& [term, count] : bag.tokens) {
      if (count > 0) ++model.doc_freq_[term];
    }
  }
  return model;
}

std::size_t TfIdfModel::doc_freq(std::string_view term) const {
  auto it = doc_freq_.find(term);
  return it == doc_freq_.end() ? 0 : it->second;
}

double TfIdfModel::term_weight(std::string_view term, int frequency) const {
  if (frequency <= 0) return 0.0;
  std::size_t df = doc_freq(term);
  if (df == 0) {
    log::warn("term '{}' unseen by the TF.IDF model; scoring it as df=1", term);
    df = 1;
  }
  if (df >= doc_count_) return 0.0;
  return frequency * std::log(static_cast<double>(doc_count_) / static_cast<double>(df));
}

double TfIdfModel::term_weight(std::string_view term, const TokenBag& bag) const {
  auto it = bag.tokens.find(std::string(term));
  return it == bag.tokens.end() ? 0.0 : term_weight(term, it->second);
}

double TfIdfModel::score(const TokenBag& bag) const {
  if (bag.tokens.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [term, count] : bag.tokens) sum += term_weight(term, count);
  return sum / static_cast<double>(bag.tokens.size());
}

void TfIdfModel::dump(std::ostream& out) const {
  out << "N=" << doc_count_ << '\n';
  for (const auto& [term, df] : doc_freq_) out << term << '\t' << df << '\n';
}

TfIdfModel TfIdfModel::load(std::istream& in) {
  TfIdfModel model;
  std::string line;
  if (!std::getline(in, line) || line.rfind("N=", 0) != 0) {
    throw Error(Errc::parse, "TF.IDF dump must start with 'N=<count>'");
  }
  model.doc_count_ = std::stoul(line.substr(2));
  if (model.doc_count_ == 0) throw Error(Errc::parse, "TF.IDF dump has N=0");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(Errc::parse, "malformed TF.IDF dump line: " + line);
    auto df = std::stoul(line.substr(tab + 1));
    if (df < 1 || df > model.doc_count_) throw Error(Errc::parse, "document frequency out of range: " + line);
    model.doc_freq_.emplace(line.substr(0, tab), df);
  }
  return model;
}

std::vector<ScoredReview> rank(const ReviewCorpus& corpus, const TfIdfModel& model, std::span<const TokenBag> bags) {
  std::unordered_map<std::string_view, const TokenBag*> by_id;
  for (const auto& bag : bags) by_id.emplace(bag.review_id, &bag);

  struct Entry {
    ScoredReview scored;
    std::chrono::sys_days posted;
  };
  std::vector<Entry> entries;
  entries.reserve(corpus.reviews.size());
  for (const auto& review : corpus.reviews) {
    auto it = by_id.find(review.id);
    if (it == by_id.end()) {
      throw Error(Errc::invalid_argument, fmt::format("no token bag for review '{}'", review.id));
    }
    entries.push_back({{review.id, model.score(*it->second)}, std::chrono::sys_days(review.posted_at)});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    const auto ka = score_tie_key(a.scored.score), kb = score_tie_key(b.scored.score);
    if (ka != kb) return ka > kb;
    if (a.posted != b.posted) return a.posted > b.posted;
    return a.scored.review_id < b.scored.review_id;
  });

  std::vector<ScoredReview> out;
  out.reserve(entries.size());
  for (auto& e : entries) out.push_back(std::move(e.scored));
  return out;
}

}  // namespace revsum
