// Copyright 2026 The Nexus Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nexus/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <cctype>

#include "nexus/error.hpp"

namespace nexus {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> raw;
  unsigned int raw_len = 0;
  if (EVP_Digest(data.data(), data.size(), raw.data(), &raw_len,
                 EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIoError, "SHA-256 digest failed");
  }
  static const char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * raw_len);
  for (unsigned int i = 0; i < raw_len; ++i) {
    out.push_back(kHex[raw[i] >> 4]);
    out.push_back(kHex[raw[i] & 0xf]);
  }
  return out;
}

std::string goal_key(std::string_view goal_text) {
  std::string collapsed;
  collapsed.reserve(goal_text.size());
  bool pending_space = false;
  for (char c : goal_text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!collapsed.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      collapsed.push_back(' ');
      pending_space = false;
    }
    collapsed.push_back(c);
  }
  return sha256_hex(collapsed);
}

}  // namespace nexus
