// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef REVSUM_PIPELINE_HPP
#define REVSUM_PIPELINE_HPP

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "revsum/corpus.hpp"
#include "revsum/extractive.hpp"
#include "revsum/llm.hpp"

namespace revsum {

/// The bundled data directory: $REVSUM_DATA_DIR, else the build-time default.
std::filesystem::path default_data_dir();

struct AppInput {
  std::string app_id;
  std::filesystem::path path;
};

/// Everything a run needs. Loaded from a sectioned "key = value" file; each
/// setting can also be applied individually as "section.key".
struct RunConfig {
  std::filesystem::path base_dir = ".";  // relative paths resolve against this

  // [run]
  std::filesystem::path output_dir = "revsum-out";
  std::filesystem::path cache_dir = ".revsum-cache";
  std::filesystem::path data_dir = default_data_dir();  // stopwords, lemmas, templates, language profiles
  std::size_t sample_k = 350;
  std::size_t workers = 4;
  bool include_title = false;
  bool offline = false;

  // [apps]
  std::vector<AppInput> apps;
  std::vector<std::string> only_apps;  // restricts commands to these ids when non-empty

  // [corpus]
  std::optional<std::filesystem::path> stopwords;
  std::optional<std::filesystem::path> lemmas;
  std::optional<std::filesystem::path> language_profiles;
  LanguageMode language_mode = LanguageMode::detect;

  // [prompts]
  std::string prompt = "cod_r";
  std::optional<std::size_t> iterations;
  std::optional<std::size_t> word_budget;
  std::optional<std::filesystem::path> template_dir;

  // [llm], [provider.<name>]
  std::string provider = "mock";
  llm::GenerationParams params;
  int max_retries = 3;
  std::map<std::string, std::map<std::string, std::string>> provider_overrides;

  // [extractive]
  ExtractiveConfig extractive;
  std::optional<std::filesystem::path> embeddings;

  // [evaluate]
  std::optional<std::filesystem::path> contingency;
  std::optional<std::filesystem::path> entity_counts;
  std::optional<std::filesystem::path> annotations;
  std::vector<std::filesystem::path> gold;
  bool readability = true;
  int readability_repeats = 1;
  bool llm_entities = true;  // fall back to LLM-extracted entities when no annotation covers a summary
  std::size_t participants = 0;  // 0: six per app
  std::optional<std::string> judge_model;  // model for readability and entity queries

  // [prices] model = "in,out" per million tokens
  std::map<std::string, llm::Price> prices;

  /// Applies one setting; `key` is "section.name" (e.g. "run.sample_k",
  /// "apps.uber", "provider.llama.base_url"). Throws Error(usage).
  void set(std::string_view key, std::string_view value);
  void add_input(std::string app_id, std::filesystem::path path);

  /// Throws Error(usage) when a referenced file is missing or a value is out of range.
  void validate() const;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  std::filesystem::path stopwords_path() const;
  std::filesystem::path lemmas_path() const;
  std::filesystem::path language_profiles_path() const;
  std::filesystem::path templates_path() const;

  llm::ProviderEndpoint endpoint() const;
  std::vector<AppInput> selected_apps() const;
};

/// Reads a config file; relative paths in it resolve against its directory.
RunConfig load_config(const std::filesystem::path& path);
/// Layers the settings of a config file over `config`.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Digest over the inputs that determine a run's outputs (app inputs and
/// their content, sampling and preprocessing settings, endpoint, model and
/// generation params, chain settings, extractive settings). The prompt id,
/// output/cache locations and evaluation inputs are excluded, so one run
/// directory holds every prompt's chains and the evaluation over them.
std::string run_digest(const RunConfig& config);
std::filesystem::path run_directory(const RunConfig& config);

struct CommandResult {
  std::filesystem::path run_dir;
  std::vector<std::string> flags;  // partial-result conditions, one line each

  bool partial() const { return !flags.empty(); }
};

/// Runs pipeline commands against one configuration. A transport may be
/// injected; otherwise the endpoint dialect picks one (never the network when
/// the config is offline).
class Pipeline {
 public:
  explicit Pipeline(RunConfig config, std::shared_ptr<llm::Transport> transport = nullptr);

  CommandResult ingest();
  CommandResult sample();
  CommandResult summarize(std::optional<std::string> prompt = std::nullopt);
  CommandResult extract();
  CommandResult evaluate();
  CommandResult study_sheets();
  CommandResult report();

  /// Dispatches by subcommand name.
  CommandResult run(std::string_view command);

  const RunConfig& config() const { return config_; }
  const std::filesystem::path& run_dir() const { return run_dir_; }
  std::size_t network_requests() const;

 private:
  RunConfig config_;
  std::filesystem::path run_dir_;
  std::shared_ptr<llm::Transport> transport_;
  std::shared_ptr<llm::Client> client_;

  const llm::Client& client();
};

inline constexpr std::string_view kCommands[] = {"ingest",   "sample",       "summarize", "extract",
                                                 "evaluate", "study-sheets", "report"};

}  // namespace revsum

#endif  // REVSUM_PIPELINE_HPP
