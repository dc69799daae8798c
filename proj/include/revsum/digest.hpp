// Copyright 2026 The revsum Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef REVSUM_DIGEST_HPP
#define REVSUM_DIGEST_HPP

#include <string>
#include <string_view>

namespace revsum {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace revsum

#endif  // REVSUM_DIGEST_HPP
