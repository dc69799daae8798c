// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef REVSUM_ERROR_HPP
#define REVSUM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace revsum {

enum class Errc {
  invalid_argument,
  io,
  parse,
  usage,
  transport,
  rate_limited,
  context_overflow,
  numeric,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace revsum

#endif  // REVSUM_ERROR_HPP
