// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include "revsum/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iterator>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "revsum/error.hpp"
#include "revsum/evaluation.hpp"
#include "revsum/log.hpp"
#include "revsum/prompts.hpp"
#include "revsum/ranking.hpp"
#include "revsum/sampling.hpp"
#include "revsum/stats.hpp"
#include "revsum/text.hpp"

namespace revsum {
namespace fs = std::filesystem;

namespace {

using ojson = nlohmann::ordered_json;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, fmt::format("cannot read {}", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Written beside the target and renamed into place.
void write_text(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, fmt::format("cannot write {}", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Errc::io, fmt::format("write to {} failed", tmp.string()));
  }
  fs::rename(tmp, path);
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

// Runs fn(i) for i in [0, n) on up to `workers` threads. Exceptions are
// collected and the one from the lowest index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto threads = std::min(workers, n);
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<std::string> flatten(std::vector<std::vector<std::string>> per_app) {
  std::vector<std::string> out;
  for (auto& v : per_app) std::move(v.begin(), v.end(), std::back_inserter(out));
  return out;
}

fs::path corpus_path(const fs::path& run, const std::string& app) { return run / "corpus" / (app + ".jsonl"); }
fs::path model_path(const fs::path& run, const std::string& app) { return run / "model" / (app + ".tfidf.txt"); }
fs::path manifest_path(const fs::path& run, const std::string& app) { return run / "samples" / (app + ".csv"); }
fs::path chain_path(const fs::path& run, const std::string& app, std::string_view prompt) {
  return run / "chains" / fmt::format("{}.{}.json", app, prompt);
}
fs::path text_summary_path(const fs::path& run, const std::string& app, std::string_view prompt) {
  return run / "summaries" / fmt::format("{}.{}.json", app, prompt);
}

void require_stage(const fs::path& p, std::string_view app, std::string_view stage) {
  if (!fs::exists(p)) {
    throw Error(Errc::usage, fmt::format("app '{}': {} is missing; run `{}` first", app, p.filename().string(), stage));
  }
}

ReviewCorpus load_corpus(const fs::path& run, const std::string& app) {
  const auto p = corpus_path(run, app);
  require_stage(p, app, "ingest");
  return ingest(p, InputFormat::jsonl, app).corpus;
}

std::vector<ManifestRow> load_manifest(const fs::path& run, const std::string& app) {
  const auto p = manifest_path(run, app);
  require_stage(p, app, "sample");
  std::ifstream in(p);
  return read_manifest(in);
}

std::vector<const Review*> sampled_reviews(const ReviewCorpus& corpus, const std::vector<ManifestRow>& rows) {
  std::unordered_map<std::string_view, const Review*> by_id;
  for (const auto& r : corpus.reviews) by_id.emplace(r.id, &r);
  std::vector<const Review*> out;
  for (const auto& row : rows) {
    auto it = by_id.find(row.review_id);
    if (it == by_id.end()) {
      throw Error(Errc::parse, fmt::format("sample for '{}' names review '{}' absent from the corpus", corpus.app_id, row.review_id));
    }
    out.push_back(it->second);
  }
  return out;
}

std::vector<std::string> apps_or_throw(const RunConfig& c, std::string_view command) {
  std::vector<std::string> ids;
  for (const auto& a : c.selected_apps()) ids.push_back(a.app_id);
  if (ids.empty()) throw Error(Errc::usage, fmt::format("`{}` needs at least one app in [apps]", command));
  return ids;
}

std::string fixed(double v, int digits) { return fmt::format("{:.{}f}", v, digits); }

struct SummaryRecord {
  std::string app;
  std::string condition;
  std::string text;

  std::string id() const { return app + "/" + condition; }
};

// Every summary present in the run directory for the apps, in standard condition order.
std::vector<SummaryRecord> collect_summaries(const fs::path& run, const std::vector<std::string>& apps) {
  const auto& order = eval::standard_conditions();
  auto rank_of = [&](const std::string& c) { return std::find(order.begin(), order.end(), c) - order.begin(); };
  std::vector<SummaryRecord> out;
  for (const auto& app : apps) {
    std::vector<SummaryRecord> found;
    for (std::string prompt : {"cod", "cod_r"}) {
      const auto p = chain_path(run, app, prompt);
      if (!fs::exists(p)) continue;
      auto chain = chain_from_json(nlohmann::json::parse(read_text(p)));
      for (std::size_t i = 0; i < chain.iterations.size(); ++i) {
        found.push_back({app, fmt::format("{}_{}", prompt, i + 1), chain.iterations[i].summary});
      }
    }
    if (const auto p = text_summary_path(run, app, "vanilla"); fs::exists(p)) {
      found.push_back({app, "vanilla", nlohmann::json::parse(read_text(p)).at("summary").get<std::string>()});
    }
    if (const auto p = run / "summaries" / (app + ".tfidf.txt"); fs::exists(p)) {
      auto text = read_text(p);
      while (!text.empty() && text.back() == '\n') text.pop_back();
      if (!text.empty()) found.push_back({app, "tfidf", text});
    }
    std::stable_sort(found.begin(), found.end(),
                     [&](const SummaryRecord& a, const SummaryRecord& b) { return rank_of(a.condition) < rank_of(b.condition); });
    std::move(found.begin(), found.end(), std::back_inserter(out));
  }
  return out;
}

std::string chi_square_section(const stats::ContingencyTable& table, const stats::StatResult& r) {
  std::string out = "Chi-square test of independence\n";
  out += fmt::format("{:<10}", "");
  for (const auto& c : table.column_labels) out += fmt::format("  {:>18}", c);
  out += '\n';
  for (std::size_t i = 0; i < table.counts.size(); ++i) {
    out += fmt::format("{:<10}", i < table.row_labels.size() ? table.row_labels[i] : std::to_string(i + 1));
    for (auto v : table.counts[i]) out += fmt::format("  {:>18}", v);
    out += '\n';
  }
  out += fmt::format("statistic = {:.4f}, df = {}, p = {:.6f}, critical value at 0.05 = {:.3f}\n", r.statistic, r.df,
                     r.p_value, stats::chi_square_critical(0.05, r.df));
  return out;
}

std::string comparisons_csv(const std::vector<eval::ConditionComparison>& rows) {
  std::string out = "a,b,n,mean_difference,t,df,p_value\n";
  for (const auto& c : rows) {
    out += fmt::format("{},{},{},{},{},{},{}\n", c.a, c.b, c.result.n, fixed(c.result.mean_difference, 6),
                       fixed(c.result.statistic, 6), c.result.df, fixed(c.result.p_value, 6));
  }
  return out;
}

std::string comparisons_section(std::string_view title, const std::vector<eval::ConditionComparison>& rows) {
  std::string out = fmt::format("{}\n", title);
  for (const auto& c : rows) {
    out += fmt::format("  {:<8} vs {:<8} mean difference {:>7.3f}  t = {:>7.3f}  df = {}  p = {:.4f}\n", c.a, c.b,
                       c.result.mean_difference, c.result.statistic, c.result.df, c.result.p_value);
  }
  return out;
}

// Conditions every app has, in standard order.
std::vector<std::string> shared_conditions(const std::vector<SummaryRecord>& summaries,
                                           const std::vector<std::string>& apps) {
  std::vector<std::string> out;
  for (const auto& c : eval::standard_conditions()) {
    bool all = !apps.empty();
    for (const auto& app : apps) {
      all = all && std::any_of(summaries.begin(), summaries.end(),
                               [&](const SummaryRecord& s) { return s.app == app && s.condition == c; });
    }
    if (all) out.push_back(c);
  }
  return out;
}

}  // namespace

Pipeline::Pipeline(RunConfig config, std::shared_ptr<llm::Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
  run_dir_ = run_directory(config_);
}

const llm::Client& Pipeline::client() {
  if (client_) return *client_;
  auto ep = config_.endpoint();
  if (!transport_) {
    if (ep.dialect == llm::Dialect::mock) {
      transport_ = std::make_shared<llm::MockTransport>();
    } else {
      if (config_.offline) throw Error(Errc::usage, "offline runs use the mock provider only");
      transport_ = std::make_shared<llm::HttpTransport>();
    }
  }
  llm::RetryPolicy retry;
  retry.max_retries = config_.max_retries;
  client_ = std::make_shared<llm::Client>(ep, transport_, retry);
  return *client_;
}

std::size_t Pipeline::network_requests() const {
  if (!client_ || !std::dynamic_pointer_cast<llm::HttpTransport>(transport_)) return 0;
  return client_->requests_sent();
}

CommandResult Pipeline::run(std::string_view command) {
  if (command == "ingest") return ingest();
  if (command == "sample") return sample();
  if (command == "summarize") return summarize();
  if (command == "extract") return extract();
  if (command == "evaluate") return evaluate();
  if (command == "study-sheets") return study_sheets();
  if (command == "report") return report();
  throw Error(Errc::usage, fmt::format("unknown command '{}'", command));
}

CommandResult Pipeline::ingest() {
  const auto apps = config_.selected_apps();
  if (apps.empty()) throw Error(Errc::usage, "`ingest` needs at least one app in [apps]");
  const auto detector = TrigramDetector::from_directory(config_.language_profiles_path());

  parallel_for(apps.size(), config_.workers, [&](std::size_t i) {
    const auto& app = apps[i];
    auto result = revsum::ingest(app.path, std::nullopt, app.app_id);
    auto filtered = filter_english(result.corpus, detector, config_.language_mode);
    if (filtered.corpus.reviews.empty()) {
      throw Error(Errc::parse, fmt::format("app '{}': no English reviews remain after language filtering", app.app_id));
    }
    std::ostringstream out;
    write_jsonl(out, filtered.corpus);
    write_text(corpus_path(run_dir_, app.app_id), out.str());

    ojson report;
    report["app_id"] = app.app_id;
    report["source"] = app.path.filename().string();
    report["records"] = result.report.records;
    report["accepted"] = result.report.accepted;
    report["rejected"] = result.report.rejected;
    report["duplicates"] = result.report.duplicates;
    report["non_english_removed"] = filtered.removed;
    report["kept"] = filtered.corpus.reviews.size();
    report["sample_reasons"] = result.report.sample_reasons;
    write_json(run_dir_ / "corpus" / (app.app_id + ".report.json"), report);
    log::info("{}: {} records, {} kept ({} rejected, {} duplicates, {} not English)", app.app_id,
              result.report.records, filtered.corpus.reviews.size(), result.report.rejected,
              result.report.duplicates, filtered.removed);
  });
  return {run_dir_, {}};
}

CommandResult Pipeline::sample() {
  const auto apps = apps_or_throw(config_, "sample");
  const auto stopwords = StopwordList::load(config_.stopwords_path());
  const auto lemmatizer = Lemmatizer::load(config_.lemmas_path());
  std::vector<std::vector<std::string>> flags(apps.size());

  parallel_for(apps.size(), config_.workers, [&](std::size_t i) {
    const auto& app = apps[i];
    const auto corpus = load_corpus(run_dir_, app);
    std::vector<TokenBag> bags;
    bags.reserve(corpus.reviews.size());
    for (const auto& r : corpus.reviews) bags.push_back(tokenize_bag(r, stopwords, lemmatizer, config_.include_title));
    const auto model = TfIdfModel::fit(bags);
    std::ostringstream dump;
    model.dump(dump);
    write_text(model_path(run_dir_, app), dump.str());

    const auto ranked = rank(corpus, model, bags);
    const auto plan = allocate(rating_counts(corpus), config_.sample_k);
    const auto chosen = select(app, partition_by_rating(corpus, ranked), plan);
    std::ostringstream manifest;
    write_manifest(manifest, chosen);
    write_text(manifest_path(run_dir_, app), manifest.str());

    if (plan.population_short) {
      flags[i].push_back(fmt::format("{}: K={} exceeds the population of {}; the sample holds every review", app,
                                     config_.sample_k, corpus.size()));
    }
    for (int rating : chosen.undersized) {
      flags[i].push_back(fmt::format("{}: the {}-star stratum is smaller than its quota", app, rating));
    }
    log::info("{}: sampled {} of {} reviews", app, chosen.total(), corpus.size());
  });
  auto all = flatten(std::move(flags));
  for (const auto& f : all) log::warn("{}", f);
  return {run_dir_, all};
}

CommandResult Pipeline::summarize(std::optional<std::string> prompt) {
  const auto apps = apps_or_throw(config_, "summarize");
  const std::string prompt_id = prompt.value_or(config_.prompt);
  const auto library = TemplateLibrary::load(config_.templates_path());
  if (!library.contains(prompt_id)) throw Error(Errc::usage, fmt::format("unknown prompt '{}'", prompt_id));
  const auto& tmpl = library.get(prompt_id);
  const RenderParams render_params{config_.word_budget, config_.iterations};
  const std::size_t iterations = config_.iterations.value_or(tmpl.iterations);
  const llm::ResponseCache cache(config_.cache_dir);
  const auto& llm = client();
  const auto price = config_.prices.find(config_.params.model);

  std::vector<std::vector<std::string>> flags(apps.size());
  std::vector<std::string> usage_lines(apps.size());

  parallel_for(apps.size(), config_.workers, [&](std::size_t i) {
    const auto& app = apps[i];
    const auto corpus = load_corpus(run_dir_, app);
    const auto reviews = sampled_reviews(corpus, load_manifest(run_dir_, app));
    std::vector<PromptReview> items;
    for (const auto* r : reviews) items.push_back({r->rating, r->body});
    const auto text = render(tmpl, app, items, render_params);
    write_text(run_dir_ / "prompts" / fmt::format("{}.{}.txt", app, prompt_id), text);

    auto completion = llm::cached_complete(cache, llm, text, config_.params);
    if (price != config_.prices.end()) completion.usage.cost = llm::estimate_cost(completion.usage, price->second);

    if (tmpl.output == OutputKind::chain) {
      auto chain = parse_cod_response(completion.text, iterations);
      chain.app_id = app;
      chain.prompt_id = prompt_id;
      if (chain.short_chain) {
        flags[i].push_back(fmt::format("{}: {} returned {} of {} iterations", app, prompt_id, chain.iterations.size(), iterations));
      }
      write_json(chain_path(run_dir_, app, prompt_id), to_json(chain));
    } else {
      ojson j;
      j["app_id"] = app;
      j["prompt_id"] = prompt_id;
      j["summary"] = parse_vanilla_response(completion.text);
      write_json(text_summary_path(run_dir_, app, prompt_id), j);
    }

    ojson usage;
    usage["app_id"] = app;
    usage["prompt_id"] = prompt_id;
    usage["endpoint"] = llm.endpoint().name;
    usage["model"] = config_.params.model;
    usage["from_cache"] = completion.from_cache;
    usage["usage"] = llm::to_json(completion.usage);
    usage_lines[i] = usage.dump();
    log::info("{}: {} summary done ({}{} tokens in, {} out)", app, prompt_id, completion.usage.approximate_tokens ? "~" : "",
              completion.usage.input_tokens, completion.usage.output_tokens);
  });

  std::string log_text;
  for (const auto& l : usage_lines) log_text += l + "\n";
  write_text(run_dir_ / "logs" / fmt::format("usage.{}.jsonl", prompt_id), log_text);
  auto all = flatten(std::move(flags));
  for (const auto& f : all) log::warn("{}", f);
  return {run_dir_, all};
}

CommandResult Pipeline::extract() {
  const auto apps = apps_or_throw(config_, "extract");
  if (!config_.embeddings) throw Error(Errc::usage, "`extract` needs extractive.embeddings");
  const auto table = EmbeddingTable::load(*config_.embeddings);
  const auto stopwords = StopwordList::load(config_.stopwords_path());
  const auto lemmatizer = Lemmatizer::load(config_.lemmas_path());
  std::vector<std::vector<std::string>> flags(apps.size());

  parallel_for(apps.size(), config_.workers, [&](std::size_t i) {
    const auto& app = apps[i];
    const auto corpus = load_corpus(run_dir_, app);
    const auto reviews = sampled_reviews(corpus, load_manifest(run_dir_, app));
    const auto mp = model_path(run_dir_, app);
    require_stage(mp, app, "sample");
    std::ifstream model_in(mp);
    const auto model = TfIdfModel::load(model_in);

    std::vector<SentenceUnit> units;
    for (const auto* r : reviews) {
      for (auto& u : split_sentences(*r)) {
        u.tokens = tokenize_terms(u.text, stopwords, lemmatizer);
        TokenBag bag;
        bag.review_id = u.review_id;
        for (const auto& t : u.tokens) ++bag.tokens[t];
        u.score = model.score(bag);
        u.embedding = embed_sentence(table, u.tokens, &u.out_of_vocabulary);
        units.push_back(std::move(u));
      }
    }
    const auto summary = summarize_extractive(std::move(units), config_.extractive);
    if (summary.sentences.empty()) throw Error(Errc::parse, fmt::format("app '{}': the sample has no usable sentences", app));

    ojson j;
    j["app_id"] = app;
    j["lambda"] = config_.extractive.lambda;
    j["word_budget"] = config_.extractive.word_budget;
    j["word_count"] = summary.word_count;
    ojson sentences = ojson::array();
    std::size_t oov = 0;
    for (const auto& s : summary.sentences) {
      if (s.out_of_vocabulary) ++oov;
      ojson e;
      e["review_id"] = s.review_id;
      e["index"] = s.index;
      e["score"] = s.score;
      e["out_of_vocabulary"] = s.out_of_vocabulary;
      e["text"] = s.text;
      sentences.push_back(std::move(e));
    }
    j["sentences"] = std::move(sentences);
    write_json(run_dir_ / "summaries" / (app + ".tfidf.json"), j);
    write_text(run_dir_ / "summaries" / (app + ".tfidf.txt"), summary.text() + "\n");
    if (oov > 0) flags[i].push_back(fmt::format("{}: {} selected sentence(s) had no word vectors", app, oov));
    log::info("{}: extractive summary of {} sentences, {} words", app, summary.sentences.size(), summary.word_count);
  });
  auto all = flatten(std::move(flags));
  for (const auto& f : all) log::warn("{}", f);
  return {run_dir_, all};
}

CommandResult Pipeline::evaluate() {
  std::vector<std::string> apps;
  for (const auto& a : config_.selected_apps()) apps.push_back(a.app_id);
  const auto reports = run_dir_ / "reports";
  std::vector<std::string> flags;
  std::string summary_text;
  bool did_something = false;

  // Human readability study.
  if (config_.contingency) {
    std::ifstream in(*config_.contingency);
    const auto table = stats::ContingencyTable::read_csv(in);
    const auto r = stats::chi_square(table);
    write_text(reports / "chi_square.csv",
               fmt::format("statistic,df,p_value,critical_0.05\n{},{},{},{}\n", fixed(r.statistic, 6), r.df,
                           fixed(r.p_value, 6), fixed(stats::chi_square_critical(0.05, r.df), 6)));
    summary_text += chi_square_section(table, r) + "\n";
    did_something = true;
  }

  // Published or externally prepared entity count grid.
  if (config_.entity_counts) {
    std::ifstream in(*config_.entity_counts);
    const auto grid = eval::EntityCountGrid::read_csv(in);
    const auto avg = eval::aggregate_entity_table(grid);
    std::string csv = "condition,mean\n";
    for (std::size_t k = 0; k < avg.size(); ++k) csv += fmt::format("{},{}\n", grid.conditions[k], fixed(avg[k], 6));
    write_text(reports / "entity_counts_avg.csv", csv);
    const auto cmp = eval::compare_conditions(grid, eval::standard_comparisons(grid));
    write_text(reports / "entity_count_ttests.csv", comparisons_csv(cmp));
    summary_text += "Entity counts per app\n" + eval::format_grid(grid) + "\n";
    if (!cmp.empty()) summary_text += comparisons_section("Paired t-tests on entity counts", cmp) + "\n";
    did_something = true;
  }

  // Summaries produced by this run.
  const auto summaries = collect_summaries(run_dir_, apps);
  if (!summaries.empty()) {
    did_something = true;
    std::vector<eval::EntityAnnotation> human;
    if (config_.annotations) {
      std::ifstream in(*config_.annotations);
      human = eval::read_annotations(in);
      if (human.empty()) log::warn("the annotation file holds no annotations");
    }
    std::set<std::string> annotated;
    for (const auto& a : human) annotated.insert(a.summary_id);

    std::optional<llm::ResponseCache> cache;
    llm::GenerationParams judge = config_.params;
    if (config_.judge_model) judge.model = *config_.judge_model;
    const bool need_llm = config_.readability ||
                          (config_.llm_entities && std::any_of(summaries.begin(), summaries.end(), [&](const auto& s) {
                             return !annotated.contains(s.id());
                           }));
    if (need_llm) {
      cache.emplace(config_.cache_dir);
      client();
    }

    struct Row {
      std::optional<eval::EntityAnnotation> entities;
      std::string source;
      std::optional<eval::ReadabilityScore> readability;
      bool empty_llm_reply = false;
    };
    std::vector<Row> rows(summaries.size());
    parallel_for(summaries.size(), config_.workers, [&](std::size_t i) {
      const auto& s = summaries[i];
      auto& row = rows[i];
      if (annotated.contains(s.id())) {
        std::vector<std::string> all;
        for (const auto& a : human) {
          if (a.summary_id == s.id()) all.insert(all.end(), a.entities.begin(), a.entities.end());
        }
        row.entities = eval::make_annotation(s.id(), all, "human");
        row.source = "human";
      } else if (config_.llm_entities) {
        auto r = eval::extract_entities_llm(*cache, *client_, judge, s.id(), s.text);
        row.entities = std::move(r.annotation);
        row.empty_llm_reply = r.empty_reply;
        row.source = "llm";
      }
      if (config_.readability) {
        row.readability = eval::rate_readability(*cache, *client_, judge, s.id(), s.text, config_.readability_repeats);
      }
    });

    if (annotated.empty()) {
      log::warn("no human annotations cover this run's summaries; {}",
                config_.llm_entities ? "entity counts come from the LLM assistant" : "density is skipped");
    }

    std::string density_csv = "summary_id,source,entity_count,token_count,density\n";
    std::map<std::pair<std::string, std::string>, double> density_cells;
    for (std::size_t i = 0; i < summaries.size(); ++i) {
      const auto& s = summaries[i];
      const auto& row = rows[i];
      if (row.empty_llm_reply) flags.push_back(fmt::format("{}: the entity extraction reply was empty", s.id()));
      if (!row.entities) continue;
      const auto d = eval::density(static_cast<std::int64_t>(row.entities->entities.size()), s.text, s.id());
      density_cells[{s.app, s.condition}] = d.density;
      density_csv += fmt::format("{},{},{},{},{}\n", s.id(), row.source, d.entity_count, d.token_count, fixed(d.density, 6));
    }
    write_text(reports / "density.csv", density_csv);

    const auto conditions = shared_conditions(summaries, apps);
    if (!density_cells.empty() && !conditions.empty()) {
      eval::EntityCountGrid grid{apps, conditions, {}};
      bool complete = true;
      for (const auto& app : apps) {
        std::vector<double> r;
        for (const auto& c : conditions) {
          auto it = density_cells.find({app, c});
          complete = complete && it != density_cells.end();
          r.push_back(it == density_cells.end() ? 0.0 : it->second);
        }
        grid.counts.push_back(std::move(r));
      }
      if (complete) summary_text += "Entity density per app\n" + eval::format_grid(grid, 3) + "\n";
    }

    // Recall against gold sets.
    if (!config_.gold.empty()) {
      std::string recall_csv = "summary_id,source,gold_entities,recall\n";
      for (const auto& gp : config_.gold) {
        std::ifstream in(gp);
        const auto gold = eval::GoldEntitySet::read(in);
        for (std::size_t i = 0; i < summaries.size(); ++i) {
          if (summaries[i].app != gold.app_id || !rows[i].entities) continue;
          recall_csv += fmt::format("{},{},{},{}\n", summaries[i].id(), rows[i].source, gold.entities.size(),
                                    fixed(eval::recall(*rows[i].entities, gold), 6));
        }
      }
      write_text(reports / "recall.csv", recall_csv);
    }

    if (config_.readability) {
      std::string csv = "summary_id,mean,ratings,unparsed\n";
      std::map<std::string, std::pair<double, int>> by_condition;
      for (std::size_t i = 0; i < summaries.size(); ++i) {
        const auto& r = *rows[i].readability;
        std::string ratings;
        for (int v : r.ratings) ratings += (ratings.empty() ? "" : ";") + std::to_string(v);
        csv += fmt::format("{},{},{},{}\n", r.summary_id, fixed(r.mean, 4), ratings, r.unparsed);
        if (!r.ratings.empty()) {
          auto& [sum, n] = by_condition[summaries[i].condition];
          sum += r.mean;
          ++n;
        }
        if (r.ratings.empty()) flags.push_back(fmt::format("{}: no readability rating could be parsed", r.summary_id));
      }
      write_text(reports / "readability.csv", csv);
      summary_text += "LLM readability (1-5), mean over apps\n";
      for (const auto& c : eval::standard_conditions()) {
        if (auto it = by_condition.find(c); it != by_condition.end()) {
          summary_text += fmt::format("  {:<8} {:.3f}\n", c, it->second.first / it->second.second);
        }
      }
      summary_text += "\n";
    }

    // Entity-count t-tests on this run's own counts, when the grid is complete.
    if (!conditions.empty() && apps.size() >= 2) {
      auto grid = eval::grid_from_annotations(
          [&] {
            std::vector<eval::EntityAnnotation> all;
            for (const auto& r : rows) {
              if (r.entities) all.push_back(*r.entities);
            }
            return all;
          }(),
          apps, conditions);
      const auto pairs = eval::standard_comparisons(grid);
      std::vector<eval::ConditionComparison> cmp;
      for (const auto& [a, b] : pairs) {
        try {
          cmp.push_back(eval::compare_conditions(grid, {{a, b}}).front());
        } catch (const Error& e) {
          log::warn("t-test {} vs {} skipped: {}", a, b, e.what());
        }
      }
      if (!cmp.empty()) {
        write_text(reports / "run_entity_ttests.csv", comparisons_csv(cmp));
        summary_text += comparisons_section("Paired t-tests on this run's entity counts", cmp) + "\n";
      }
    }
  } else if (!apps.empty()) {
    log::warn("no summaries found under {}", run_dir_.string());
  }

  if (!did_something) {
    throw Error(Errc::usage, "nothing to evaluate: configure evaluate.contingency or evaluate.entity_counts, or run `summarize` first");
  }
  write_text(reports / "summary.txt", summary_text);
  for (const auto& f : flags) log::warn("{}", f);
  return {run_dir_, flags};
}

CommandResult Pipeline::study_sheets() {
  const auto apps = apps_or_throw(config_, "study-sheets");
  const auto library = TemplateLibrary::load(config_.templates_path());
  std::string prompt_id = config_.prompt;
  if (!library.contains(prompt_id) || library.get(prompt_id).output != OutputKind::chain) prompt_id = "cod_r";

  std::vector<std::array<int, 3>> orders;
  std::array<int, 3> perm = {3, 4, 5};
  do {
    orders.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));

  auto order_name = [](const std::array<int, 3>& o) { return fmt::format("{}{}{}", o[0], o[1], o[2]); };
  auto ordinal = [](int n) { return fmt::format("{}{}", n, n == 1 ? "st" : n == 2 ? "nd" : n == 3 ? "rd" : "th"); };

  for (const auto& app : apps) {
    const auto p = chain_path(run_dir_, app, prompt_id);
    require_stage(p, app, "summarize");
    const auto chain = chain_from_json(nlohmann::json::parse(read_text(p)));
    if (chain.iterations.size() < 5) {
      throw Error(Errc::usage, fmt::format("app '{}': the {} chain has {} iterations; sheets need the 3rd to 5th",
                                           app, prompt_id, chain.iterations.size()));
    }
    for (const auto& o : orders) {
      std::string sheet = fmt::format("Readability study: {}\nSheet: {}/order-{}\n\n", app, app, order_name(o));
      sheet += "Read each summary and mark how readable you find it.\n\n";
      const char* labels[] = {"A", "B", "C"};
      for (std::size_t k = 0; k < 3; ++k) {
        sheet += fmt::format("Summary {}\n{}\n\n", labels[k], chain.iterations[static_cast<std::size_t>(o[k] - 1)].summary);
        sheet += fmt::format("Readability of summary {}:", labels[k]);
        for (auto label : eval::kLikert4Labels) sheet += fmt::format("  [ ] {}", label);
        sheet += "\n\n";
      }
      std::string key = "Key:";
      for (std::size_t k = 0; k < 3; ++k) key += fmt::format(" {}={}", labels[k], ordinal(o[k]));
      write_text(run_dir_ / "sheets" / app / fmt::format("order-{}.txt", order_name(o)), sheet);
      write_text(run_dir_ / "sheets" / app / fmt::format("order-{}.key", order_name(o)), key + "\n");
    }
  }

  const std::size_t participants = config_.participants ? config_.participants : apps.size() * orders.size();
  std::string csv = "participant,app_id,sheet,order\n";
  for (std::size_t p = 0; p < participants; ++p) {
    const auto& app = apps[p % apps.size()];
    const auto& o = orders[(p / apps.size()) % orders.size()];
    csv += fmt::format("{},{},{}/order-{}.txt,{}-{}-{}\n", p + 1, app, app, order_name(o), o[0], o[1], o[2]);
  }
  write_text(run_dir_ / "sheets" / "assignment.csv", csv);

  std::vector<std::string> flags;
  if (participants < apps.size() * orders.size()) {
    flags.push_back(fmt::format("{} participants cannot cover all {} orders of {} apps", participants, orders.size(), apps.size()));
  } else if (participants % (apps.size() * orders.size()) != 0) {
    flags.push_back(fmt::format("{} participants do not split evenly over {} apps and {} orders", participants,
                                apps.size(), orders.size()));
  }
  for (const auto& f : flags) log::warn("{}", f);
  log::info("wrote {} sheets for {} participants", apps.size() * orders.size(), participants);
  return {run_dir_, flags};
}

CommandResult Pipeline::report() {
  const auto logs = run_dir_ / "logs";
  std::vector<fs::path> files;
  if (fs::is_directory(logs)) {
    for (const auto& e : fs::directory_iterator(logs)) {
      const auto name = e.path().filename().string();
      if (name.rfind("usage.", 0) == 0 && e.path().extension() == ".jsonl") files.push_back(e.path());
    }
  }
  if (files.empty()) throw Error(Errc::usage, "no usage logs in this run; run `summarize` first");
  std::sort(files.begin(), files.end());

  struct Totals {
    std::size_t summaries = 0;
    double cost = 0.0;
    double latency = 0.0;
    std::int64_t in = 0;
    std::int64_t out = 0;
  };
  std::map<std::string, Totals> per_prompt;
  std::vector<std::string> flags;
  std::set<std::string> unpriced;
  std::string csv = "app_id,prompt_id,model,input_tokens,output_tokens,approximate_tokens,latency_seconds,cost,from_cache\n";
  for (const auto& f : files) {
    std::istringstream in(read_text(f));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      llm::UsageRecord u;
      const auto& uj = j.at("usage");
      u.input_tokens = uj.at("input_tokens").get<std::int64_t>();
      u.output_tokens = uj.at("output_tokens").get<std::int64_t>();
      u.latency_seconds = uj.at("latency_seconds").get<double>();
      u.cost = uj.at("cost").get<double>();
      u.approximate_tokens = uj.at("approximate_tokens").get<bool>();
      const auto model = j.at("model").get<std::string>();
      if (auto p = config_.prices.find(model); p != config_.prices.end()) {
        u.cost = llm::estimate_cost(u, p->second);
      } else {
        unpriced.insert(model);
      }
      const auto prompt = j.at("prompt_id").get<std::string>();
      csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", j.at("app_id").get<std::string>(), prompt, model,
                         u.input_tokens, u.output_tokens, u.approximate_tokens, fixed(u.latency_seconds, 3),
                         fixed(u.cost, 6), j.at("from_cache").get<bool>());
      auto& t = per_prompt[prompt];
      ++t.summaries;
      t.cost += u.cost;
      t.latency += u.latency_seconds;
      t.in += u.input_tokens;
      t.out += u.output_tokens;
    }
  }
  for (const auto& m : unpriced) flags.push_back(fmt::format("no price configured for model '{}'; its cost is reported as 0", m));
  write_text(run_dir_ / "reports" / "usage.csv", csv);

  std::string text = "Usage per prompt\n";
  for (const auto& [prompt, t] : per_prompt) {
    const double n = static_cast<double>(t.summaries);
    text += fmt::format("  {:<8} summaries {:>3}  tokens in {:>8}  out {:>7}  mean latency {:.2f} s  total ${:.3f}  "
                        "per summary ${:.3f}\n",
                        prompt, t.summaries, t.in, t.out, t.latency / n, t.cost, t.cost / n);
  }
  write_text(run_dir_ / "reports" / "usage.txt", text);
  for (const auto& f : flags) log::warn("{}", f);
  return {run_dir_, flags};
}

}  // namespace revsum
