// Copyright 2026 The unlearn Authors
// SPDX-License-Identifier: Apache-2.0

#include "unlearn/digest.hpp"

#include <array>

#include <fmt/format.h>
#include <openssl/sha.h>

namespace unlearn {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> md{};
  SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), md.data());
  std::string out;
  out.reserve(2 * md.size());
  for (unsigned char c : md) out += fmt::format("{:02x}", c);
  return out;
}

}  // namespace unlearn
