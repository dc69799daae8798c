// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <fmt/format.h>

#include "revsum/error.hpp"
#include "revsum/llm.hpp"

namespace revsum::llm {

HttpResponse HttpTransport::post(const HttpRequest& request) {
  // Split "scheme://host[:port]/path".
  const auto scheme_end = request.url.find("://");
  if (scheme_end == std::string::npos) throw Error(Errc::usage, "endpoint URL lacks a scheme: " + request.url);
  const auto path_start = request.url.find('/', scheme_end + 3);
  const std::string origin = request.url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : request.url.substr(path_start);

  httplib::Client client(origin);
  const auto seconds = static_cast<time_t>(request.timeout_seconds);
  client.set_connection_timeout(seconds);
  client.set_read_timeout(seconds);
  client.set_write_timeout(seconds);

  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [name, value] : request.headers) {
    if (name == "Content-Type") {
      content_type = value;
    } else {
      headers.emplace(name, value);
    }
  }

  auto result = client.Post(path, headers, request.body, content_type);
  if (!result) throw Error(Errc::transport, fmt::format("request to {} failed: {}", origin, httplib::to_string(result.error())));

  HttpResponse resp;
  resp.status = result->status;
  resp.body = result->body;
  if (result->has_header("Retry-After")) {
    try {
      resp.retry_after_seconds = std::stod(result->get_header_value("Retry-After"));
    } catch (const std::exception&) {
      // HTTP-date form; fall back to exponential backoff.
    }
  }
  return resp;
}

}  // namespace revsum::llm
