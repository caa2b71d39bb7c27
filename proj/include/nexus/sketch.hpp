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

#ifndef NEXUS_SKETCH_HPP_
#define NEXUS_SKETCH_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace nexus {

// Marker grammar for annotated sketch files. Block markers must occupy a
// whole line (surrounding whitespace allowed); value markers are inline and
// must open and close on the same line, at most one pair per line.
inline constexpr std::string_view kBlockStartMarker = "-- EVOLVE-BLOCK-START";
inline constexpr std::string_view kBlockEndMarker = "-- EVOLVE-BLOCK-END";
inline constexpr std::string_view kValueStartMarker = "/- EVOLVE-VALUE -/";
inline constexpr std::string_view kValueEndMarker = "/- END-EVOLVE-VALUE -/";

// Default placeholder token marking an unproven hole.
inline constexpr std::string_view kDefaultPlaceholder = "sorry";

enum class RegionKind {
  kFrozen,       // immutable text, including all marker lines
  kEvolveBlock,  // editable span between block markers
  kEvolveValue,  // editable single-line expression between value markers
};

const char* region_kind_name(RegionKind kind);

struct Region {
  RegionKind kind = RegionKind::kFrozen;
  std::string text;
};

struct SearchReplaceEdit {
  std::string search;
  std::string replace;
};

// Location of a placeholder token: which region and the byte offset of the
// token within that region's text.
struct SorrySite {
  std::size_t region_index = 0;
  std::size_t offset = 0;

  friend bool operator==(const SorrySite&, const SorrySite&) = default;
};

// A parsed sketch file. Immutable by convention: every operation returns a
// fresh value, so sketches are safe to share across worker threads.
struct ProofSketch {
  std::vector<Region> regions;
  std::string source_digest;  // SHA-256 of the rendered text
};

// Splits the text into alternating frozen and editable regions. Marker
// bytes always stay in the adjacent frozen regions, so concatenating the
// region texts reproduces the input exactly.
// Throws UnbalancedMarkers or NestedMarkers on malformed marker structure.
ProofSketch parse_sketch(std::string_view text);

// Concatenates region texts; inverse of parse_sketch.
std::string render(const ProofSketch& sketch);

// Replaces the unique editable occurrence of edit.search. Occurrences are
// counted with overlaps across the whole rendered text; a match is editable
// only if it lies wholly inside one editable region.
// Throws SearchNotFound, AmbiguousSearch (two or more editable matches),
// FrozenRegionTouched (only frozen or boundary-spanning matches), or
// ValueEditBreaksLine (replacement would put a line break in a value span).
ProofSketch apply_edit(const ProofSketch& sketch, const SearchReplaceEdit& edit);

// All standalone occurrences of the placeholder token in document order.
// "Standalone" means not flanked by identifier characters
// (letters, digits, '_', '\'') in the rendered text.
std::vector<SorrySite> find_sorries(
    const ProofSketch& sketch,
    std::string_view placeholder = kDefaultPlaceholder);

// Replaces `length` bytes at the given site with `replacement`. Used to
// substitute proved scripts for placeholder tokens at known positions.
// Throws FrozenRegionTouched if the site is in a frozen region.
ProofSketch splice_site(const ProofSketch& sketch, const SorrySite& site,
                        std::size_t length, std::string_view replacement);

// SHA-256 over the frozen-region bytes only: equal for two sketches that
// differ just in editable content.
std::string protected_digest(const ProofSketch& sketch);

}  // namespace nexus

#endif  // NEXUS_SKETCH_HPP_
