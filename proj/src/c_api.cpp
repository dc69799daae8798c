// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include "revsum/revsum.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <mutex>
#include <new>
#include <string>
#include <vector>

#include "revsum/corpus.hpp"
#include "revsum/error.hpp"
#include "revsum/llm.hpp"
#include "revsum/log.hpp"
#include "revsum/pipeline.hpp"
#include "revsum/prompts.hpp"
#include "revsum/stats.hpp"
#include "revsum/text.hpp"

struct revsum_config {
  revsum::RunConfig config;
};

struct revsum_result {
  revsum::CommandResult result;
  std::string run_dir;
  std::size_t network_requests = 0;
};

struct revsum_corpus {
  revsum::ReviewCorpus corpus;
};

namespace {

thread_local std::string g_last_error;

revsum_status to_status(revsum::Errc code) {
  switch (code) {
    case revsum::Errc::invalid_argument: return REVSUM_ERR_INVALID_ARGUMENT;
    case revsum::Errc::io: return REVSUM_ERR_IO;
    case revsum::Errc::parse: return REVSUM_ERR_PARSE;
    case revsum::Errc::usage: return REVSUM_ERR_USAGE;
    case revsum::Errc::transport: return REVSUM_ERR_TRANSPORT;
    case revsum::Errc::rate_limited: return REVSUM_ERR_RATE_LIMITED;
    case revsum::Errc::context_overflow: return REVSUM_ERR_CONTEXT_OVERFLOW;
    case revsum::Errc::numeric: return REVSUM_ERR_NUMERIC;
  }
  return REVSUM_ERR_INTERNAL;
}

template <typename Fn>
revsum_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return REVSUM_OK;
  } catch (const revsum::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return REVSUM_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown failure";
  }
  return REVSUM_ERR_INTERNAL;
}

revsum_status null_argument(const char* name) {
  g_last_error = std::string(name) + " must not be NULL";
  return REVSUM_ERR_INVALID_ARGUMENT;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::mutex g_log_mutex;
revsum_log_fn g_log_fn = nullptr;
void* g_log_user = nullptr;

revsum_status run(const revsum_config* config, const char* command, const char* prompt, revsum_result** out) {
  if (config == nullptr) return null_argument("config");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    revsum::Pipeline pipeline(config->config);
    auto r = std::make_unique<revsum_result>();
    if (std::string_view(command) == "summarize" && prompt != nullptr) {
      r->result = pipeline.summarize(std::string(prompt));
    } else {
      r->result = pipeline.run(command);
    }
    r->run_dir = r->result.run_dir.string();
    r->network_requests = pipeline.network_requests();
    *out = r.release();
  });
}

}  // namespace

extern "C" {

const char* revsum_version(void) { return REVSUM_VERSION; }

const char* revsum_status_name(revsum_status status) {
  switch (status) {
    case REVSUM_OK: return "ok";
    case REVSUM_ERR_INVALID_ARGUMENT: return "invalid argument";
    case REVSUM_ERR_IO: return "i/o error";
    case REVSUM_ERR_PARSE: return "parse error";
    case REVSUM_ERR_USAGE: return "usage error";
    case REVSUM_ERR_TRANSPORT: return "transport error";
    case REVSUM_ERR_RATE_LIMITED: return "rate limited";
    case REVSUM_ERR_CONTEXT_OVERFLOW: return "context overflow";
    case REVSUM_ERR_NUMERIC: return "numeric error";
    case REVSUM_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* revsum_last_error(void) { return g_last_error.c_str(); }

int revsum_exit_code(revsum_status status, int partial) {
  if (status == REVSUM_OK) return partial ? REVSUM_EXIT_PARTIAL : REVSUM_EXIT_OK;
  if (status == REVSUM_ERR_USAGE || status == REVSUM_ERR_INVALID_ARGUMENT) return REVSUM_EXIT_USAGE;
  return REVSUM_EXIT_FAILURE;
}

void revsum_set_log_callback(revsum_log_fn fn, void* user) {
  std::lock_guard lock(g_log_mutex);
  g_log_fn = fn;
  g_log_user = user;
  if (fn == nullptr) {
    revsum::log::set_sink({});
    return;
  }
  revsum::log::set_sink([](revsum::log::Level level, std::string_view message) {
    revsum_log_fn f;
    void* u;
    {
      std::lock_guard inner(g_log_mutex);
      f = g_log_fn;
      u = g_log_user;
    }
    if (f != nullptr) f(static_cast<revsum_log_level>(level), std::string(message).c_str(), u);
  });
}

void revsum_set_log_level(revsum_log_level level) {
  revsum::log::set_min_level(static_cast<revsum::log::Level>(level));
}

void revsum_string_free(char* s) { std::free(s); }

revsum_status revsum_config_new(revsum_config** out) {
  if (out == nullptr) return null_argument("out");
  return guarded([&] {
    auto c = std::make_unique<revsum_config>();
    c->config.base_dir = std::filesystem::current_path();
    *out = c.release();
  });
}

void revsum_config_free(revsum_config* config) { delete config; }

revsum_status revsum_config_load_file(revsum_config* config, const char* path) {
  if (config == nullptr) return null_argument("config");
  if (path == nullptr) return null_argument("path");
  return guarded([&] { revsum::apply_config_file(config->config, path); });
}

revsum_status revsum_config_set(revsum_config* config, const char* key, const char* value) {
  if (config == nullptr) return null_argument("config");
  if (key == nullptr) return null_argument("key");
  if (value == nullptr) return null_argument("value");
  return guarded([&] { config->config.set(key, value); });
}

revsum_status revsum_config_add_input(revsum_config* config, const char* app_id, const char* path) {
  if (config == nullptr) return null_argument("config");
  if (app_id == nullptr || *app_id == '\0') return null_argument("app_id");
  if (path == nullptr) return null_argument("path");
  return guarded([&] { config->config.add_input(app_id, config->config.resolve(path)); });
}

revsum_status revsum_config_select_app(revsum_config* config, const char* app_id) {
  if (config == nullptr) return null_argument("config");
  if (app_id == nullptr) return null_argument("app_id");
  return guarded([&] { config->config.only_apps.emplace_back(app_id); });
}

revsum_status revsum_config_validate(const revsum_config* config) {
  if (config == nullptr) return null_argument("config");
  return guarded([&] { config->config.validate(); });
}

revsum_status revsum_config_run_dir(const revsum_config* config, char** out) {
  if (config == nullptr) return null_argument("config");
  if (out == nullptr) return null_argument("out");
  return guarded([&] { *out = copy_string(revsum::run_directory(config->config).string()); });
}

revsum_status revsum_run_command(const revsum_config* config, const char* command, revsum_result** out) {
  if (command == nullptr) return null_argument("command");
  return run(config, command, nullptr, out);
}

revsum_status revsum_cmd_ingest(const revsum_config* c, revsum_result** out) { return run(c, "ingest", nullptr, out); }
revsum_status revsum_cmd_sample(const revsum_config* c, revsum_result** out) { return run(c, "sample", nullptr, out); }
revsum_status revsum_cmd_summarize(const revsum_config* c, const char* prompt, revsum_result** out) {
  return run(c, "summarize", prompt, out);
}
revsum_status revsum_cmd_extract(const revsum_config* c, revsum_result** out) { return run(c, "extract", nullptr, out); }
revsum_status revsum_cmd_evaluate(const revsum_config* c, revsum_result** out) { return run(c, "evaluate", nullptr, out); }
revsum_status revsum_cmd_study_sheets(const revsum_config* c, revsum_result** out) {
  return run(c, "study-sheets", nullptr, out);
}
revsum_status revsum_cmd_report(const revsum_config* c, revsum_result** out) { return run(c, "report", nullptr, out); }

void revsum_result_free(revsum_result* result) { delete result; }
int revsum_result_partial(const revsum_result* r) { return r != nullptr && r->result.partial() ? 1 : 0; }
const char* revsum_result_run_dir(const revsum_result* r) { return r != nullptr ? r->run_dir.c_str() : ""; }
size_t revsum_result_flag_count(const revsum_result* r) { return r != nullptr ? r->result.flags.size() : 0; }
const char* revsum_result_flag(const revsum_result* r, size_t index) {
  if (r == nullptr || index >= r->result.flags.size()) return nullptr;
  return r->result.flags[index].c_str();
}
size_t revsum_result_network_requests(const revsum_result* r) { return r != nullptr ? r->network_requests : 0; }

revsum_status revsum_chi_square(const int64_t* counts, size_t rows, size_t cols, revsum_stat* out) {
  if (counts == nullptr) return null_argument("counts");
  if (out == nullptr) return null_argument("out");
  return guarded([&] {
    revsum::stats::ContingencyTable t;
    for (size_t i = 0; i < rows; ++i) t.counts.emplace_back(counts + i * cols, counts + (i + 1) * cols);
    const auto r = revsum::stats::chi_square(t);
    *out = {r.statistic, r.df, r.p_value};
  });
}

revsum_status revsum_paired_t(const double* a, const double* b, size_t n, revsum_stat* out, double* mean_difference) {
  if (a == nullptr || b == nullptr) return null_argument("a and b");
  if (out == nullptr) return null_argument("out");
  return guarded([&] {
    const auto r = revsum::stats::paired_t({a, n}, {b, n});
    *out = {r.statistic, r.df, r.p_value};
    if (mean_difference != nullptr) *mean_difference = r.mean_difference;
  });
}

revsum_status revsum_estimate_cost(int64_t input_tokens, int64_t output_tokens, double in_per_million,
                                   double out_per_million, double* cost) {
  if (cost == nullptr) return null_argument("cost");
  return guarded([&] {
    revsum::llm::UsageRecord u;
    u.input_tokens = input_tokens;
    u.output_tokens = output_tokens;
    *cost = revsum::llm::estimate_cost(u, {in_per_million, out_per_million});
  });
}

revsum_status revsum_normalize(const char* text, char** out) {
  if (text == nullptr) return null_argument("text");
  if (out == nullptr) return null_argument("out");
  return guarded([&] { *out = copy_string(revsum::normalize(text)); });
}

revsum_status revsum_corpus_load(const char* path, const char* app_id, revsum_corpus** out) {
  if (path == nullptr) return null_argument("path");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto c = std::make_unique<revsum_corpus>();
    c->corpus = revsum::ingest(path, std::nullopt, app_id != nullptr ? app_id : "").corpus;
    *out = c.release();
  });
}

void revsum_corpus_free(revsum_corpus* corpus) { delete corpus; }
size_t revsum_corpus_size(const revsum_corpus* c) { return c != nullptr ? c->corpus.reviews.size() : 0; }
const char* revsum_corpus_review_id(const revsum_corpus* c, size_t i) {
  return c != nullptr && i < c->corpus.reviews.size() ? c->corpus.reviews[i].id.c_str() : nullptr;
}
int revsum_corpus_review_rating(const revsum_corpus* c, size_t i) {
  return c != nullptr && i < c->corpus.reviews.size() ? c->corpus.reviews[i].rating : 0;
}
const char* revsum_corpus_review_body(const revsum_corpus* c, size_t i) {
  return c != nullptr && i < c->corpus.reviews.size() ? c->corpus.reviews[i].body.c_str() : nullptr;
}

revsum_status revsum_render_prompt(const char* template_dir, const char* prompt_id, const char* app,
                                   const int* ratings, const char* const* bodies, size_t n, char** out) {
  if (prompt_id == nullptr) return null_argument("prompt_id");
  if (app == nullptr) return null_argument("app");
  if (n > 0 && (ratings == nullptr || bodies == nullptr)) return null_argument("ratings and bodies");
  if (out == nullptr) return null_argument("out");
  return guarded([&] {
    const std::filesystem::path dir =
        template_dir != nullptr ? std::filesystem::path(template_dir) : revsum::default_data_dir() / "templates";
    const auto library = revsum::TemplateLibrary::load(dir);
    std::vector<revsum::PromptReview> reviews;
    for (size_t i = 0; i < n; ++i) reviews.push_back({ratings[i], bodies[i] != nullptr ? bodies[i] : ""});
    *out = copy_string(revsum::render(library.get(prompt_id), app, reviews));
  });
}

}  // extern "C"
