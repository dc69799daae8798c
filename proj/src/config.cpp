// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "revsum/digest.hpp"
#include "revsum/error.hpp"
#include "revsum/pipeline.hpp"

#ifndef REVSUM_DATA_DIR
#define REVSUM_DATA_DIR "data"
#endif

namespace revsum {
namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw Error(Errc::usage, fmt::format("{}: '{}' is not {}", key, value, expected));
}

std::size_t to_size(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

int to_int(std::string_view key, std::string_view v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    double d = std::stod(std::string(v), &used);
    if (used != v.size()) bad_value(key, v, "a number");
    return d;
  } catch (const std::logic_error&) {
    bad_value(key, v, "a number");
  }
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "a boolean");
}

// Either a bracketed list of quoted strings or a comma-separated list.
std::vector<std::string> to_list(std::string_view v) {
  std::string s = trim(v);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.size() >= 2 && item.front() == '"' && item.back() == '"') item = item.substr(1, item.size() - 2);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Value text with quotes removed and a trailing comment dropped.
std::string unquote(std::string_view raw, std::size_t line) {
  std::string v = trim(raw);
  if (!v.empty() && v.front() == '"') {
    std::string out;
    std::size_t i = 1;
    for (; i < v.size() && v[i] != '"'; ++i) {
      if (v[i] == '\\' && i + 1 < v.size()) {
        const char c = v[++i];
        out.push_back(c == 'n' ? '\n' : c == 't' ? '\t' : c);
      } else {
        out.push_back(v[i]);
      }
    }
    if (i == v.size()) throw Error(Errc::usage, fmt::format("config line {}: unterminated string", line));
    const auto rest = trim(std::string_view(v).substr(i + 1));
    if (!rest.empty() && rest.front() != '#') throw Error(Errc::usage, fmt::format("config line {}: text after string", line));
    return out;
  }
  if (!v.empty() && v.front() == '[') {
    auto close = v.find(']');
    if (close == std::string::npos) throw Error(Errc::usage, fmt::format("config line {}: unterminated list", line));
    return v.substr(0, close + 1);
  }
  if (auto hash = v.find(" #"); hash != std::string::npos) v = trim(v.substr(0, hash));
  return v;
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, fmt::format("cannot read {}", path.string()));
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(content);
}

// Sorted (name, digest) pairs of the regular files in a directory.
std::string dir_digest(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec)) {
    if (e.is_regular_file()) entries.emplace_back(e.path().filename().string(), file_digest(e.path()));
  }
  std::sort(entries.begin(), entries.end());
  std::string all;
  for (const auto& [name, digest] : entries) all += name + "=" + digest + "\n";
  return sha256_hex(all);
}

void require_file(const fs::path& p, std::string_view what) {
  if (!fs::is_regular_file(p)) throw Error(Errc::usage, fmt::format("{} not found: {}", what, p.string()));
}

void require_dir(const fs::path& p, std::string_view what) {
  if (!fs::is_directory(p)) throw Error(Errc::usage, fmt::format("{} not found: {}", what, p.string()));
}

void set_in(RunConfig& c, const std::string& section, const std::string& name, std::string_view value) {
  const std::string key = section + "." + name;
  const std::string v(value);
  auto path = [&] { return c.resolve(v); };

  if (name.find("api_key") != std::string::npos && name != "api_key_env") {
    throw Error(Errc::usage, fmt::format("{}: API keys are read from the environment; set api_key_env instead", key));
  }

  if (section == "run") {
    if (name == "output_dir") return void(c.output_dir = path());
    if (name == "cache_dir") return void(c.cache_dir = path());
    if (name == "data_dir") return void(c.data_dir = path());
    if (name == "sample_k") return void(c.sample_k = to_size(key, v));
    if (name == "workers") return void(c.workers = to_size(key, v));
    if (name == "include_title") return void(c.include_title = to_bool(key, v));
    if (name == "offline") return void(c.offline = to_bool(key, v));
    if (name == "app") {
      for (auto& id : to_list(v)) c.only_apps.push_back(id);
      return;
    }
  } else if (section == "apps") {
    if (name.empty()) throw Error(Errc::usage, "apps: empty app id");
    return c.add_input(name, path());
  } else if (section == "corpus") {
    if (name == "stopwords") return void(c.stopwords = path());
    if (name == "lemmas") return void(c.lemmas = path());
    if (name == "language_profiles") return void(c.language_profiles = path());
    if (name == "language_mode") {
      if (v == "detect") return void(c.language_mode = LanguageMode::detect);
      if (v == "trust_field") return void(c.language_mode = LanguageMode::trust_field);
      bad_value(key, v, "detect or trust_field");
    }
  } else if (section == "prompts") {
    if (name == "prompt") return void(c.prompt = v);
    if (name == "iterations") return void(c.iterations = to_size(key, v));
    if (name == "word_budget") return void(c.word_budget = to_size(key, v));
    if (name == "template_dir") return void(c.template_dir = path());
  } else if (section == "llm") {
    if (name == "provider") return void(c.provider = v);
    if (name == "model") return void(c.params.model = v);
    if (name == "temperature") return void(c.params.temperature = to_double(key, v));
    if (name == "top_p") return void(c.params.top_p = to_double(key, v));
    if (name == "frequency_penalty") return void(c.params.frequency_penalty = to_double(key, v));
    if (name == "presence_penalty") return void(c.params.presence_penalty = to_double(key, v));
    if (name == "max_output_tokens") return void(c.params.max_output_tokens = to_int(key, v));
    if (name == "max_retries") return void(c.max_retries = to_int(key, v));
  } else if (section.rfind("provider.", 0) == 0) {
    static const std::vector<std::string> known = {"base_url",      "api_key_env",   "dialect",
                                                   "context_limit", "max_in_flight", "timeout"};
    if (std::find(known.begin(), known.end(), name) != known.end()) {
      c.provider_overrides[section.substr(9)][name] = v;
      return;
    }
  } else if (section == "extractive") {
    if (name == "lambda") return void(c.extractive.lambda = to_double(key, v));
    if (name == "word_budget") return void(c.extractive.word_budget = to_size(key, v));
    if (name == "embeddings") return void(c.embeddings = path());
  } else if (section == "evaluate") {
    if (name == "contingency") return void(c.contingency = path());
    if (name == "entity_counts") return void(c.entity_counts = path());
    if (name == "annotations") return void(c.annotations = path());
    if (name == "gold") {
      for (const auto& g : to_list(v)) c.gold.push_back(c.resolve(g));
      return;
    }
    if (name == "readability") return void(c.readability = to_bool(key, v));
    if (name == "readability_repeats") return void(c.readability_repeats = to_int(key, v));
    if (name == "llm_entities") return void(c.llm_entities = to_bool(key, v));
    if (name == "participants") return void(c.participants = to_size(key, v));
    if (name == "judge_model") return void(c.judge_model = v);
  } else if (section == "prices") {
    auto parts = to_list(v);
    if (parts.size() != 2) bad_value(key, v, "\"<input price>,<output price>\"");
    c.prices[name] = {to_double(key, parts[0]), to_double(key, parts[1])};
    return;
  }
  throw Error(Errc::usage, fmt::format("unknown setting '{}'", key));
}

}  // namespace

fs::path default_data_dir() {
  if (const char* env = std::getenv("REVSUM_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return REVSUM_DATA_DIR;
}

fs::path RunConfig::resolve(const fs::path& p) const {
  if (p.empty() || p.is_absolute()) return p;
  return (base_dir / p).lexically_normal();
}

fs::path RunConfig::stopwords_path() const { return stopwords.value_or(data_dir / "stopwords_en.txt"); }
fs::path RunConfig::lemmas_path() const { return lemmas.value_or(data_dir / "lemmas.tsv"); }
fs::path RunConfig::language_profiles_path() const { return language_profiles.value_or(data_dir / "langprofiles"); }
fs::path RunConfig::templates_path() const { return template_dir.value_or(data_dir / "templates"); }

void RunConfig::set(std::string_view key, std::string_view value) {
  const std::string k = trim(key);
  std::string section;
  std::string name;
  if (k.rfind("provider.", 0) == 0) {
    const auto dot = k.rfind('.');
    if (dot <= 9) throw Error(Errc::usage, fmt::format("setting '{}' needs the form provider.<name>.<key>", k));
    section = k.substr(0, dot);
    name = k.substr(dot + 1);
  } else {
    const auto dot = k.find('.');
    if (dot == std::string::npos) throw Error(Errc::usage, fmt::format("setting '{}' needs the form section.key", k));
    section = k.substr(0, dot);
    name = k.substr(dot + 1);
  }
  set_in(*this, section, name, trim(value));
}

void RunConfig::add_input(std::string app_id, fs::path path) {
  for (auto& a : apps) {
    if (a.app_id == app_id) {
      a.path = std::move(path);
      return;
    }
  }
  apps.push_back({std::move(app_id), std::move(path)});
}

void RunConfig::validate() const {
  if (sample_k == 0) throw Error(Errc::usage, "run.sample_k must be positive");
  if (workers == 0) throw Error(Errc::usage, "run.workers must be positive");
  if (iterations && *iterations == 0) throw Error(Errc::usage, "prompts.iterations must be positive");
  if (word_budget && *word_budget == 0) throw Error(Errc::usage, "prompts.word_budget must be positive");
  if (readability_repeats < 1) throw Error(Errc::usage, "evaluate.readability_repeats must be at least 1");
  if (max_retries < 0) throw Error(Errc::usage, "llm.max_retries must be non-negative");
  try {
    params.validate();
    extractive.validate();
  } catch (const Error& e) {
    throw Error(Errc::usage, e.what());
  }
  for (const auto& a : apps) require_file(a.path, fmt::format("input for app '{}'", a.app_id));
  for (const auto& id : only_apps) {
    if (std::none_of(apps.begin(), apps.end(), [&](const AppInput& a) { return a.app_id == id; })) {
      throw Error(Errc::usage, fmt::format("app '{}' is not configured", id));
    }
  }
  require_file(stopwords_path(), "stopword list");
  require_file(lemmas_path(), "lemma table");
  require_dir(language_profiles_path(), "language profile directory");
  require_dir(templates_path(), "template directory");
  if (embeddings) require_file(*embeddings, "embedding file");
  if (contingency) require_file(*contingency, "contingency table");
  if (entity_counts) require_file(*entity_counts, "entity count table");
  if (annotations) require_file(*annotations, "annotation file");
  for (const auto& g : gold) require_file(g, "gold entity file");
  (void)endpoint();

  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec || !fs::is_directory(output_dir)) {
    throw Error(Errc::usage, fmt::format("output directory {} is not writable", output_dir.string()));
  }
}

llm::ProviderEndpoint RunConfig::endpoint() const {
  const std::string name = offline ? "mock" : provider;
  llm::ProviderEndpoint ep;
  auto it = provider_overrides.find(name);
  if (it == provider_overrides.end() || name == "mock") {
    ep = llm::builtin_endpoint(name);
  } else {
    try {
      ep = llm::builtin_endpoint(name);
    } catch (const Error&) {
      ep.name = name;  // user-defined provider
    }
  }
  if (it != provider_overrides.end() && name != "mock") {
    for (const auto& [k, v] : it->second) {
      const auto key = fmt::format("provider.{}.{}", name, k);
      if (k == "base_url") ep.base_url = v;
      if (k == "api_key_env") ep.api_key_env = v;
      if (k == "dialect") ep.dialect = llm::parse_dialect(v);
      if (k == "context_limit") ep.context_limit = to_size(key, v);
      if (k == "max_in_flight") ep.max_in_flight = to_size(key, v);
      if (k == "timeout") ep.timeout_seconds = to_double(key, v);
    }
  }
  if (ep.base_url.empty()) throw Error(Errc::usage, fmt::format("provider '{}' has no base_url", name));
  if (ep.max_in_flight == 0) throw Error(Errc::usage, fmt::format("provider '{}': max_in_flight must be positive", name));
  return ep;
}

std::vector<AppInput> RunConfig::selected_apps() const {
  if (only_apps.empty()) return apps;
  std::vector<AppInput> out;
  for (const auto& a : apps) {
    if (std::find(only_apps.begin(), only_apps.end(), a.app_id) != only_apps.end()) out.push_back(a);
  }
  return out;
}

RunConfig load_config(const fs::path& path) {
  RunConfig c;
  apply_config_file(c, path);
  return c;
}

void apply_config_file(RunConfig& c, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::usage, fmt::format("cannot read config file {}", path.string()));
  const auto saved_base = c.base_dir;
  c.base_dir = fs::absolute(path).parent_path();
  std::string line;
  std::string section;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw Error(Errc::usage, fmt::format("{}:{}: malformed section header", path.string(), n));
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw Error(Errc::usage, fmt::format("{}:{}: expected key = value", path.string(), n));
    if (section.empty()) throw Error(Errc::usage, fmt::format("{}:{}: setting outside a section", path.string(), n));
    auto name = trim(std::string_view(t).substr(0, eq));
    if (name.size() >= 2 && name.front() == '"' && name.back() == '"') name = name.substr(1, name.size() - 2);
    try {
      set_in(c, section, name, unquote(std::string_view(t).substr(eq + 1), n));
    } catch (const Error& e) {
      throw Error(Errc::usage, fmt::format("{}:{}: {}", path.string(), n, e.what()));
    }
  }
  c.base_dir = saved_base;
}

std::string run_digest(const RunConfig& c) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json apps = nlohmann::ordered_json::array();
  for (const auto& a : c.selected_apps()) apps.push_back({{"app_id", a.app_id}, {"input", file_digest(a.path)}});
  j["apps"] = apps;
  j["sample_k"] = c.sample_k;
  j["include_title"] = c.include_title;
  j["language_mode"] = c.language_mode == LanguageMode::detect ? "detect" : "trust_field";
  j["stopwords"] = file_digest(c.stopwords_path());
  j["lemmas"] = file_digest(c.lemmas_path());
  j["language_profiles"] = dir_digest(c.language_profiles_path());
  j["templates"] = dir_digest(c.templates_path());
  const auto ep = c.endpoint();
  j["endpoint"] = {{"name", ep.name}, {"base_url", ep.base_url}, {"dialect", llm::dialect_name(ep.dialect)}};
  j["params"] = {{"model", c.params.model},
                 {"temperature", c.params.temperature},
                 {"top_p", c.params.top_p},
                 {"frequency_penalty", c.params.frequency_penalty},
                 {"presence_penalty", c.params.presence_penalty},
                 {"max_output_tokens", c.params.max_output_tokens}};
  j["iterations"] = c.iterations ? nlohmann::ordered_json(*c.iterations) : nlohmann::ordered_json();
  j["word_budget"] = c.word_budget ? nlohmann::ordered_json(*c.word_budget) : nlohmann::ordered_json();
  j["lambda"] = c.extractive.lambda;
  j["extractive_budget"] = c.extractive.word_budget;
  j["embeddings"] = c.embeddings ? nlohmann::ordered_json(file_digest(*c.embeddings)) : nlohmann::ordered_json();
  return sha256_hex(j.dump());
}

fs::path run_directory(const RunConfig& c) { return c.output_dir / ("run-" + run_digest(c).substr(0, 16)); }

}  // namespace revsum
