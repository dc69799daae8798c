// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#include "revsum/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "revsum/error.hpp"
#include "revsum/log.hpp"

namespace revsum {
namespace {

using json = nlohmann::json;
constexpr std::size_t kMaxReasons = 8;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<std::int64_t> parse_int(std::string_view s) {
  s = strip(s);
  if (s.empty()) return std::nullopt;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Raw field values of one record before validation. Absent optional fields stay nullopt.
struct RawRecord {
  std::optional<std::string> id, app_id, rating, title, body, posted_at, likes, language;
};

class Collector {
 public:
  explicit Collector(std::string_view expected_app) : expected_app_(expected_app) {
    result_.corpus.app_id = std::string(expected_app);
  }

  void reject(std::size_t record_no, std::string_view reason) {
    ++result_.report.records;
    ++result_.report.rejected;
    if (result_.report.sample_reasons.size() < kMaxReasons) {
      result_.report.sample_reasons.push_back(fmt::format("record {}: {}", record_no, reason));
    }
  }

  void add(std::size_t record_no, const RawRecord& raw) {
    Review r;
    if (auto reason = build(raw, r)) {
      reject(record_no, *reason);
      return;
    }
    ++result_.report.records;
    if (!seen_.insert(r.id).second) {
      ++result_.report.duplicates;
      return;
    }
    if (result_.corpus.app_id.empty()) result_.corpus.app_id = r.app_id;
    ++result_.report.accepted;
    result_.corpus.reviews.push_back(std::move(r));
  }

  IngestResult finish() && {
    if (result_.corpus.reviews.empty()) {
      throw Error(Errc::parse, fmt::format("no valid review records ({} rejected)", result_.report.rejected));
    }
    if (result_.report.rejected > 0) {
      log::warn("{}: skipped {} malformed record(s)", result_.corpus.app_id, result_.report.rejected);
    }
    return std::move(result_);
  }

 private:
  std::optional<std::string> build(const RawRecord& raw, Review& r) {
    if (!raw.id || strip(*raw.id).empty()) return "missing id";
    r.id = std::string(strip(*raw.id));

    std::string app = raw.app_id ? std::string(strip(*raw.app_id)) : std::string();
    if (app.empty()) app = result_.corpus.app_id.empty() ? std::string(expected_app_) : result_.corpus.app_id;
    if (app.empty()) return "missing app_id";
    if (!result_.corpus.app_id.empty() && app != result_.corpus.app_id) {
      return fmt::format("app_id '{}' does not match corpus app '{}'", app, result_.corpus.app_id);
    }
    r.app_id = app;

    auto rating = raw.rating ? parse_int(*raw.rating) : std::nullopt;
    if (!rating || *rating < 1 || *rating > 5) return "rating outside 1..5";
    r.rating = static_cast<int>(*rating);

    if (!raw.body || strip(*raw.body).empty()) return "empty body";
    r.body = *raw.body;

    auto date = raw.posted_at ? parse_date(*raw.posted_at) : std::nullopt;
    if (!date) return "invalid posted_at";
    r.posted_at = *date;

    if (raw.title && !raw.title->empty()) r.title = *raw.title;
    if (raw.likes && !strip(*raw.likes).empty()) {
      auto likes = parse_int(*raw.likes);
      if (!likes || *likes < 0) return "likes must be a non-negative integer";
      r.likes = *likes;
    }
    if (raw.language) {
      std::string code = lower(strip(*raw.language)).substr(0, 2);
      if (code.size() == 2 && std::all_of(code.begin(), code.end(), [](char c) { return c >= 'a' && c <= 'z'; })) {
        r.language = code;
      }
    }
    return std::nullopt;
  }

  std::string_view expected_app_;
  IngestResult result_;
  std::unordered_set<std::string> seen_;
};

std::optional<std::string> json_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  if (it->is_number_float()) {
    double v = it->get<double>();
    if (v == static_cast<double>(static_cast<std::int64_t>(v))) return std::to_string(static_cast<std::int64_t>(v));
    return fmt::format("{}", v);
  }
  return it->dump();
}

void ingest_jsonl(std::istream& in, Collector& collector) {
  std::string line;
  std::size_t record_no = 0;
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    ++record_no;
    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
      collector.reject(record_no, "not a JSON object");
      continue;
    }
    RawRecord raw{json_field(obj, "id"),        json_field(obj, "app_id"), json_field(obj, "rating"),
                  json_field(obj, "title"),     json_field(obj, "body"),   json_field(obj, "posted_at"),
                  json_field(obj, "likes"),     json_field(obj, "language")};
    collector.add(record_no, raw);
  }
}

void ingest_csv(std::istream& in, Collector& collector) {
  csv::Reader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) throw Error(Errc::parse, "empty CSV file");
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[lower(strip(header[i]))] = i;
  for (const char* required : {"id", "rating", "body", "posted_at"}) {
    if (!column.contains(required)) throw Error(Errc::parse, fmt::format("CSV header lacks column '{}'", required));
  }

  std::vector<std::string> row;
  std::size_t record_no = 0;
  while (reader.next(row)) {
    if (row.size() == 1 && strip(row[0]).empty()) continue;
    ++record_no;
    if (row.size() != header.size()) {
      collector.reject(record_no, fmt::format("expected {} fields, found {}", header.size(), row.size()));
      continue;
    }
    auto get = [&](const char* name) -> std::optional<std::string> {
      auto it = column.find(name);
      if (it == column.end()) return std::nullopt;
      return row[it->second];
    };
    RawRecord raw{get("id"),   get("app_id"),    get("rating"), get("title"),
                  get("body"), get("posted_at"), get("likes"),  get("language")};
    collector.add(record_no, raw);
  }
}

}  // namespace

std::optional<InputFormat> infer_format(const std::filesystem::path& path) {
  auto ext = lower(path.extension().string());
  if (ext == ".csv") return InputFormat::csv;
  if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return InputFormat::jsonl;
  return std::nullopt;
}

IngestResult ingest_stream(std::istream& in, InputFormat format, std::string_view expected_app) {
  Collector collector(expected_app);
  if (format == InputFormat::csv) {
    ingest_csv(in, collector);
  } else {
    ingest_jsonl(in, collector);
  }
  return std::move(collector).finish();
}

IngestResult ingest(const std::filesystem::path& path, std::optional<InputFormat> format,
                    std::string_view expected_app) {
  if (!format) format = infer_format(path);
  if (!format) throw Error(Errc::usage, "cannot infer input format of " + path.string() + "; declare csv or jsonl");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  try {
    return ingest_stream(in, *format, expected_app);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_jsonl(std::ostream& out, const ReviewCorpus& corpus) {
  for (const auto& r : corpus.reviews) {
    nlohmann::ordered_json obj;
    obj["id"] = r.id;
    obj["app_id"] = r.app_id;
    obj["rating"] = r.rating;
    if (r.title) obj["title"] = *r.title;
    obj["body"] = r.body;
    obj["posted_at"] = format_date(r.posted_at);
    if (r.likes) obj["likes"] = *r.likes;
    if (r.language) obj["language"] = *r.language;
    out << obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

std::string format_date(std::chrono::year_month_day date) {
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(date.year()), static_cast<unsigned>(date.month()),
                     static_cast<unsigned>(date.day()));
}

std::optional<std::chrono::year_month_day> parse_date(std::string_view text) {
  text = strip(text);
  if (text.size() < 10) return std::nullopt;
  if (text.size() > 10 && text[10] != 'T' && text[10] != ' ') return std::nullopt;
  if (text[4] != '-' || text[7] != '-') return std::nullopt;
  auto y = parse_int(text.substr(0, 4));
  auto m = parse_int(text.substr(5, 2));
  auto d = parse_int(text.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  std::chrono::year_month_day date{std::chrono::year(static_cast<int>(*y)),
                                   std::chrono::month(static_cast<unsigned>(*m)),
                                   std::chrono::day(static_cast<unsigned>(*d))};
  if (!date.ok()) return std::nullopt;
  return date;
}

}  // namespace revsum
