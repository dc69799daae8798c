// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "revsum/revsum.h"

namespace {

struct Options {
  std::string config;
  std::vector<std::string> apps;
  std::string prompt;
  std::string provider;
  std::optional<std::size_t> k;
  std::optional<double> lambda;
  std::optional<std::size_t> budget;
  std::string cache_dir;
  std::string output_dir;
  std::optional<std::size_t> workers;
  bool offline = false;
  bool verbose = false;
  bool quiet = false;
};

void log_to_stderr(revsum_log_level level, const char* message, void*) {
  static const char* names[] = {"debug", "info", "warning", "error"};
  std::fprintf(stderr, "revsum %s: %s\n", names[level], message);
}

int fail(revsum_status status) {
  std::fprintf(stderr, "revsum: %s: %s\n", revsum_status_name(status), revsum_last_error());
  return revsum_exit_code(status, 0);
}

revsum_status apply(revsum_config* cfg, const Options& o) {
  revsum_status s = REVSUM_OK;
  auto set = [&](const char* key, const std::string& value) {
    if (s == REVSUM_OK) s = revsum_config_set(cfg, key, value.c_str());
  };
  if (!o.config.empty()) s = revsum_config_load_file(cfg, o.config.c_str());
  for (const auto& a : o.apps) {
    if (s != REVSUM_OK) break;
    const auto eq = a.find('=');
    if (eq == std::string::npos) {
      s = revsum_config_select_app(cfg, a.c_str());
    } else {
      const auto name = a.substr(0, eq);
      s = revsum_config_add_input(cfg, name.c_str(), a.c_str() + eq + 1);
      if (s == REVSUM_OK) s = revsum_config_select_app(cfg, name.c_str());
    }
  }
  if (!o.prompt.empty()) set("prompts.prompt", o.prompt);
  if (!o.provider.empty()) set("llm.provider", o.provider);
  if (o.k) set("run.sample_k", std::to_string(*o.k));
  if (o.lambda) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", *o.lambda);
    set("extractive.lambda", buf);
  }
  if (o.budget) set("extractive.word_budget", std::to_string(*o.budget));
  if (!o.cache_dir.empty()) set("run.cache_dir", o.cache_dir);
  if (!o.output_dir.empty()) set("run.output_dir", o.output_dir);
  if (o.workers) set("run.workers", std::to_string(*o.workers));
  if (o.offline) set("run.offline", "true");
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Review sampling, summarization and evaluation"};
  app.set_version_flag("--version", std::string(revsum_version()));
  app.require_subcommand(1);

  Options o;
  app.add_option("-c,--config", o.config, "Run configuration file");
  app.add_option("--app", o.apps, "Restrict to an app, or add one as NAME=PATH (repeatable)");
  app.add_option("--prompt", o.prompt, "Prompt template id (cod, cod_r, vanilla)");
  app.add_option("--provider", o.provider, "LLM provider name");
  app.add_option("--k", o.k, "Sample size per app");
  app.add_option("--lambda", o.lambda, "Redundancy threshold for extractive summaries");
  app.add_option("--budget", o.budget, "Word budget for extractive summaries");
  app.add_option("--cache-dir", o.cache_dir, "Response cache directory");
  app.add_option("--output-dir", o.output_dir, "Directory holding run directories");
  app.add_option("--workers", o.workers, "Concurrent per-app workers");
  app.add_flag("--offline", o.offline, "Use the built-in mock provider; no network");
  app.add_flag("-v,--verbose", o.verbose, "Debug logging");
  app.add_flag("-q,--quiet", o.quiet, "Warnings and errors only");

  std::string command;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"ingest", "Normalize review exports into per-app corpora"},
      {"sample", "Rank reviews and draw rating-stratified samples"},
      {"summarize", "Run a summarization prompt over each sample"},
      {"extract", "Build extractive baseline summaries"},
      {"evaluate", "Entity density, recall, readability and statistical tests"},
      {"study-sheets", "Emit counterbalanced readability study sheets"},
      {"report", "Latency, token and cost report"},
  };
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)->callback([&command, name = name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : REVSUM_EXIT_USAGE;
  }

  revsum_set_log_callback(log_to_stderr, nullptr);
  revsum_set_log_level(o.verbose ? REVSUM_LOG_DEBUG : o.quiet ? REVSUM_LOG_WARN : REVSUM_LOG_INFO);

  revsum_config* cfg = nullptr;
  revsum_status s = revsum_config_new(&cfg);
  if (s != REVSUM_OK) return fail(s);
  s = apply(cfg, o);
  if (s != REVSUM_OK) {
    revsum_config_free(cfg);
    return fail(s);
  }

  revsum_result* result = nullptr;
  s = revsum_run_command(cfg, command.c_str(), &result);
  revsum_config_free(cfg);
  if (s != REVSUM_OK) return fail(s);

  std::printf("%s: %s\n", command.c_str(), revsum_result_run_dir(result));
  const std::size_t flags = revsum_result_flag_count(result);
  for (std::size_t i = 0; i < flags; ++i) std::printf("  flag: %s\n", revsum_result_flag(result, i));
  const int rc = revsum_exit_code(REVSUM_OK, revsum_result_partial(result));
  revsum_result_free(result);
  return rc;
}
