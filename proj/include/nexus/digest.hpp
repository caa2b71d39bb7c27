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

#ifndef NEXUS_DIGEST_HPP_
#define NEXUS_DIGEST_HPP_

#include <string>
#include <string_view>

namespace nexus {

// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view data);

// Canonical key for a proof goal: runs of whitespace collapse to a single
// space, leading and trailing whitespace is dropped, then the result is
// hashed. Two renderings of the same goal that differ only in spacing or
// line breaks therefore share a cache entry.
std::string goal_key(std::string_view goal_text);

}  // namespace nexus

#endif  // NEXUS_DIGEST_HPP_
