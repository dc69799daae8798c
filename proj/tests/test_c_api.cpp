// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "revsum/revsum.h"
#include "support.hpp"

namespace {

struct ConfigGuard {
  revsum_config* config = nullptr;
  ~ConfigGuard() { revsum_config_free(config); }
};

struct ResultGuard {
  revsum_result* result = nullptr;
  ~ResultGuard() { revsum_result_free(result); }
};

std::string take(char* s) {
  std::string out = s ? s : "";
  revsum_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("status names and exit codes") {
  CHECK(std::strlen(revsum_version()) > 0);
  CHECK(std::string(revsum_status_name(REVSUM_ERR_USAGE)).find("usage") != std::string::npos);
  CHECK(revsum_exit_code(REVSUM_OK, 0) == REVSUM_EXIT_OK);
  CHECK(revsum_exit_code(REVSUM_OK, 1) == REVSUM_EXIT_PARTIAL);
  CHECK(revsum_exit_code(REVSUM_ERR_USAGE, 0) == REVSUM_EXIT_USAGE);
  CHECK(revsum_exit_code(REVSUM_ERR_INVALID_ARGUMENT, 0) == REVSUM_EXIT_USAGE);
  CHECK(revsum_exit_code(REVSUM_ERR_TRANSPORT, 0) == REVSUM_EXIT_FAILURE);
}

TEST_CASE("null arguments are rejected") {
  CHECK(revsum_config_new(nullptr) == REVSUM_ERR_INVALID_ARGUMENT);
  CHECK(revsum_cmd_ingest(nullptr, nullptr) == REVSUM_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(revsum_last_error()) > 0);
  revsum_config_free(nullptr);
  revsum_result_free(nullptr);
}

TEST_CASE("statistics and utilities") {
  const int64_t counts[] = {2, 15, 19, 12, 0, 19, 16, 13, 2, 10, 21, 15};
  revsum_stat stat{};
  REQUIRE(revsum_chi_square(counts, 3, 4, &stat) == REVSUM_OK);
  CHECK(std::abs(stat.statistic - 5.8013) < 1e-3);
  CHECK(stat.df == 6);
  CHECK(stat.p_value > 0.44);

  const double a[] = {15, 11, 13, 12, 14, 11, 8, 10}, b[] = {15, 14, 8, 13, 2, 6, 8, 7};
  double diff = 0;
  REQUIRE(revsum_paired_t(a, b, 8, &stat, &diff) == REVSUM_OK);
  CHECK(diff == 2.625);
  const double same[] = {1, 2};
  const double shifted[] = {2, 3};
  CHECK(revsum_paired_t(shifted, same, 2, &stat, &diff) == REVSUM_ERR_NUMERIC);

  double cost = -1;
  REQUIRE(revsum_estimate_cost(20000, 2000, 2.5, 10, &cost) == REVSUM_OK);
  CHECK(cost == 0.07);
  CHECK(revsum_estimate_cost(1, 1, -1, 1, &cost) == REVSUM_ERR_INVALID_ARGUMENT);

  char* norm = nullptr;
  REQUIRE(revsum_normalize("Great app!! 10/10 :) http://x.co", &norm) == REVSUM_OK);
  CHECK(take(norm) == "great app");
}

TEST_CASE("corpus access") {
  revsum_corpus* corpus = nullptr;
  const auto path = (revsum::testing::data_dir() / "mini" / "rideshare.jsonl").string();
  REQUIRE(revsum_corpus_load(path.c_str(), "rideshare", &corpus) == REVSUM_OK);
  CHECK(revsum_corpus_size(corpus) >= 48);
  CHECK(revsum_corpus_review_rating(corpus, 0) >= 1);
  CHECK(std::strlen(revsum_corpus_review_body(corpus, 0)) > 0);
  CHECK(revsum_corpus_review_id(corpus, 100000) == nullptr);
  revsum_corpus_free(corpus);
  CHECK(revsum_corpus_load("/no/such/file.jsonl", nullptr, &corpus) == REVSUM_ERR_IO);
}

TEST_CASE("prompt rendering") {
  const int ratings[] = {5, 2};
  const char* bodies[] = {"Love the sleep stories.", "Too many upsells."};
  char* out = nullptr;
  REQUIRE(revsum_render_prompt(nullptr, "cod_r", "Calm", ratings, bodies, 2, &out) == REVSUM_OK);
  const auto text = take(out);
  CHECK(text.find("reviews of the Calm app") != std::string::npos);
  CHECK(revsum_render_prompt(nullptr, "cod_r", "Calm", ratings, bodies, 0, &out) == REVSUM_ERR_INVALID_ARGUMENT);
  CHECK(revsum_render_prompt(nullptr, "missing", "Calm", ratings, bodies, 2, &out) == REVSUM_ERR_USAGE);
}

TEST_CASE("configuration and commands") {
  revsum::testing::TempDir dir;
  ConfigGuard cfg;
  REQUIRE(revsum_config_new(&cfg.config) == REVSUM_OK);
  const auto config_path = (revsum::testing::data_dir() / "mini" / "config.toml").string();
  REQUIRE(revsum_config_load_file(cfg.config, config_path.c_str()) == REVSUM_OK);
  REQUIRE(revsum_config_set(cfg.config, "run.output_dir", (dir / "out").c_str()) == REVSUM_OK);
  REQUIRE(revsum_config_set(cfg.config, "run.cache_dir", (dir / "cache").c_str()) == REVSUM_OK);
  CHECK(revsum_config_set(cfg.config, "llm.api_key", "x") == REVSUM_ERR_USAGE);
  REQUIRE(revsum_config_select_app(cfg.config, "meditation") == REVSUM_OK);
  REQUIRE(revsum_config_validate(cfg.config) == REVSUM_OK);

  char* run_dir = nullptr;
  REQUIRE(revsum_config_run_dir(cfg.config, &run_dir) == REVSUM_OK);
  const auto expected_dir = take(run_dir);
  CHECK(expected_dir.find("run-") != std::string::npos);

  {
    ResultGuard r;
    CHECK(revsum_cmd_sample(cfg.config, &r.result) == REVSUM_ERR_USAGE);
  }
  for (const char* command : {"ingest", "sample", "summarize", "extract", "report"}) {
    ResultGuard r;
    REQUIRE_MESSAGE(revsum_run_command(cfg.config, command, &r.result) == REVSUM_OK, revsum_last_error());
    CHECK(std::string(revsum_result_run_dir(r.result)) == expected_dir);
    CHECK(revsum_result_network_requests(r.result) == 0);
  }
  CHECK(std::filesystem::exists(std::filesystem::path(expected_dir) / "chains" / "meditation.cod_r.json"));
  CHECK_FALSE(std::filesystem::exists(std::filesystem::path(expected_dir) / "chains" / "rideshare.cod_r.json"));

  {
    ResultGuard r;
    REQUIRE(revsum_cmd_summarize(cfg.config, "vanilla", &r.result) == REVSUM_OK);
    CHECK(revsum_result_flag_count(r.result) == 0);
    CHECK(revsum_result_flag(r.result, 0) == nullptr);
  }
  {
    ResultGuard r;
    REQUIRE(revsum_config_set(cfg.config, "run.sample_k", "100000") == REVSUM_OK);
    REQUIRE(revsum_cmd_ingest(cfg.config, &r.result) == REVSUM_OK);
    revsum_result_free(r.result);
    r.result = nullptr;
    REQUIRE(revsum_cmd_sample(cfg.config, &r.result) == REVSUM_OK);
    CHECK(revsum_result_partial(r.result) == 1);
    CHECK(revsum_result_flag_count(r.result) >= 1);
  }
}

namespace {

int g_logged = 0;
void count_logs(revsum_log_level, const char*, void* user) { ++*static_cast<int*>(user); }

}  // namespace

TEST_CASE("log callback") {
  revsum_set_log_callback(count_logs, &g_logged);
  revsum_set_log_level(REVSUM_LOG_DEBUG);
  revsum::testing::TempDir dir;
  ConfigGuard cfg;
  REQUIRE(revsum_config_new(&cfg.config) == REVSUM_OK);
  const auto path = (revsum::testing::data_dir() / "mini" / "rideshare.jsonl").string();
  REQUIRE(revsum_config_add_input(cfg.config, "rideshare", path.c_str()) == REVSUM_OK);
  REQUIRE(revsum_config_set(cfg.config, "run.output_dir", (dir / "out").c_str()) == REVSUM_OK);
  ResultGuard r;
  REQUIRE(revsum_cmd_ingest(cfg.config, &r.result) == REVSUM_OK);
  revsum_set_log_callback(nullptr, nullptr);
  revsum_set_log_level(REVSUM_LOG_INFO);
  CHECK(g_logged > 0);
}
