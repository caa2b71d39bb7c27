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

#include "nexus/sketch.hpp"

#include <cctype>

#include "nexus/digest.hpp"
#include "nexus/error.hpp"

namespace nexus {
namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

std::string_view trim(std::string_view s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) {
    ++begin;
  }
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) {
    --end;
  }
  return s.substr(begin, end - begin);
}

std::size_t count_occurrences(std::string_view haystack,
                              std::string_view needle) {
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle);
       pos != std::string_view::npos; pos = haystack.find(needle, pos + 1)) {
    ++count;
  }
  return count;
}

// Accumulates regions while merging consecutive frozen text into one region.
class RegionBuilder {
 public:
  void frozen(std::string_view text) { frozen_acc_ += text; }

  void editable(RegionKind kind, std::string text) {
    flush();
    regions_.push_back(Region{kind, std::move(text)});
  }

  std::vector<Region> take() {
    flush();
    return std::move(regions_);
  }

 private:
  void flush() {
    if (!frozen_acc_.empty()) {
      regions_.push_back(Region{RegionKind::kFrozen, std::move(frozen_acc_)});
      frozen_acc_.clear();
    }
  }

  std::vector<Region> regions_;
  std::string frozen_acc_;
};

// Splits a frozen-context line that carries an inline value pair. Returns
// false when the line has no value markers at all.
bool split_value_line(std::string_view line, std::size_t line_number,
                      RegionBuilder& builder) {
  const std::size_t starts = count_occurrences(line, kValueStartMarker);
  const std::size_t ends = count_occurrences(line, kValueEndMarker);
  if (starts == 0 && ends == 0) return false;
  if (starts > 1 || ends > 1) {
    throw Error(ErrorCode::kUnbalancedMarkers,
                "line " + std::to_string(line_number) +
                    ": at most one EVOLVE-VALUE pair per line");
  }
  if (starts != ends) {
    throw Error(ErrorCode::kUnbalancedMarkers,
                "line " + std::to_string(line_number) +
                    ": EVOLVE-VALUE marker without its partner");
  }
  const std::size_t open = line.find(kValueStartMarker);
  const std::size_t close = line.find(kValueEndMarker);
  if (close < open) {
    throw Error(ErrorCode::kUnbalancedMarkers,
                "line " + std::to_string(line_number) +
                    ": END-EVOLVE-VALUE precedes its opening marker");
  }
  const std::size_t value_begin = open + kValueStartMarker.size();
  builder.frozen(line.substr(0, value_begin));
  builder.editable(RegionKind::kEvolveValue,
                   std::string(line.substr(value_begin, close - value_begin)));
  builder.frozen(line.substr(close));
  return true;
}

struct RegionSpan {
  std::size_t begin = 0;  // global offset of the region's first byte
  std::size_t end = 0;    // one past the last byte
};

std::vector<RegionSpan> region_spans(const ProofSketch& sketch) {
  std::vector<RegionSpan> spans;
  spans.reserve(sketch.regions.size());
  std::size_t offset = 0;
  for (const Region& region : sketch.regions) {
    spans.push_back(RegionSpan{offset, offset + region.text.size()});
    offset += region.text.size();
  }
  return spans;
}

// Index of the region containing the global offset, skipping empty regions.
std::size_t region_at(const std::vector<RegionSpan>& spans,
                      std::size_t offset) {
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (offset >= spans[i].begin && offset < spans[i].end) return i;
  }
  throw Error(ErrorCode::kIoError, "offset outside rendered text");
}

ProofSketch with_region_text(const ProofSketch& sketch, std::size_t index,
                             std::string new_text) {
  ProofSketch out;
  out.regions = sketch.regions;
  out.regions[index].text = std::move(new_text);
  out.source_digest = sha256_hex(render(out));
  return out;
}

}  // namespace

const char* region_kind_name(RegionKind kind) {
  switch (kind) {
    case RegionKind::kFrozen:
      return "frozen";
    case RegionKind::kEvolveBlock:
      return "evolve_block";
    case RegionKind::kEvolveValue:
      return "evolve_value";
  }
  return "unknown";
}

ProofSketch parse_sketch(std::string_view text) {
  RegionBuilder builder;
  std::string block_acc;
  bool in_block = false;
  std::size_t line_number = 0;

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t newline = text.find('\n', pos);
    const std::size_t line_end =
        newline == std::string_view::npos ? text.size() : newline + 1;
    const std::string_view line = text.substr(pos, line_end - pos);
    ++line_number;

    const std::string_view content = trim(line);
    if (content == kBlockStartMarker) {
      if (in_block) {
        throw Error(ErrorCode::kNestedMarkers,
                    "line " + std::to_string(line_number) +
                        ": EVOLVE-BLOCK-START inside an open block");
      }
      builder.frozen(line);
      in_block = true;
    } else if (content == kBlockEndMarker) {
      if (!in_block) {
        throw Error(ErrorCode::kUnbalancedMarkers,
                    "line " + std::to_string(line_number) +
                        ": EVOLVE-BLOCK-END without an open block");
      }
      builder.editable(RegionKind::kEvolveBlock, std::move(block_acc));
      block_acc.clear();
      builder.frozen(line);
      in_block = false;
    } else if (in_block) {
      if (line.find(kValueStartMarker) != std::string_view::npos ||
          line.find(kValueEndMarker) != std::string_view::npos) {
        throw Error(ErrorCode::kNestedMarkers,
                    "line " + std::to_string(line_number) +
                        ": EVOLVE-VALUE marker inside an EVOLVE-BLOCK");
      }
      block_acc += line;
    } else if (!split_value_line(line, line_number, builder)) {
      builder.frozen(line);
    }
    pos = line_end;
  }

  if (in_block) {
    throw Error(ErrorCode::kUnbalancedMarkers,
                "EVOLVE-BLOCK-START without a closing marker");
  }

  ProofSketch sketch;
  sketch.regions = builder.take();
  sketch.source_digest = sha256_hex(text);
  return sketch;
}

std::string render(const ProofSketch& sketch) {
  std::string out;
  std::size_t total = 0;
  for (const Region& region : sketch.regions) total += region.text.size();
  out.reserve(total);
  for (const Region& region : sketch.regions) out += region.text;
  return out;
}

ProofSketch apply_edit(const ProofSketch& sketch,
                       const SearchReplaceEdit& edit) {
  if (edit.search.empty()) {
    throw Error(ErrorCode::kInvalidRequest, "search string must be non-empty");
  }
  const std::string rendered = render(sketch);
  const std::vector<RegionSpan> spans = region_spans(sketch);

  // Count overlapping occurrences everywhere, then classify each one.
  std::size_t editable_count = 0;
  std::size_t protected_count = 0;
  std::size_t editable_region = 0;
  std::size_t editable_offset = 0;
  for (std::size_t at = rendered.find(edit.search); at != std::string::npos;
       at = rendered.find(edit.search, at + 1)) {
    const std::size_t region = region_at(spans, at);
    const bool inside_one_region = at + edit.search.size() <= spans[region].end;
    if (inside_one_region &&
        sketch.regions[region].kind != RegionKind::kFrozen) {
      ++editable_count;
      editable_region = region;
      editable_offset = at - spans[region].begin;
    } else {
      ++protected_count;
    }
  }

  if (editable_count >= 2) {
    throw Error(ErrorCode::kAmbiguousSearch,
                "search matches " + std::to_string(editable_count) +
                    " editable locations");
  }
  if (editable_count == 0) {
    if (protected_count > 0) {
      throw Error(ErrorCode::kFrozenRegionTouched,
                  "search matches only protected text");
    }
    throw Error(ErrorCode::kSearchNotFound, "search string not found");
  }

  if (sketch.regions[editable_region].kind == RegionKind::kEvolveValue &&
      edit.replace.find_first_of("\r\n") != std::string::npos) {
    throw Error(ErrorCode::kValueEditBreaksLine,
                "replacement would introduce a line break in a value span");
  }

  std::string new_text = sketch.regions[editable_region].text;
  new_text.replace(editable_offset, edit.search.size(), edit.replace);
  return with_region_text(sketch, editable_region, std::move(new_text));
}

std::vector<SorrySite> find_sorries(const ProofSketch& sketch,
                                    std::string_view placeholder) {
  std::vector<SorrySite> sites;
  if (placeholder.empty()) return sites;
  const std::string rendered = render(sketch);
  const std::vector<RegionSpan> spans = region_spans(sketch);
  for (std::size_t at = rendered.find(placeholder); at != std::string::npos;
       at = rendered.find(placeholder, at + 1)) {
    const bool left_clear = at == 0 || !is_ident_char(rendered[at - 1]);
    const std::size_t after = at + placeholder.size();
    const bool right_clear =
        after == rendered.size() || !is_ident_char(rendered[after]);
    if (!left_clear || !right_clear) continue;
    const std::size_t region = region_at(spans, at);
    sites.push_back(SorrySite{region, at - spans[region].begin});
  }
  return sites;
}

ProofSketch splice_site(const ProofSketch& sketch, const SorrySite& site,
                        std::size_t length, std::string_view replacement) {
  if (site.region_index >= sketch.regions.size()) {
    throw Error(ErrorCode::kInvalidRequest, "splice site region out of range");
  }
  const Region& region = sketch.regions[site.region_index];
  if (site.offset + length > region.text.size()) {
    throw Error(ErrorCode::kInvalidRequest, "splice site span out of range");
  }
  if (region.kind == RegionKind::kFrozen) {
    throw Error(ErrorCode::kFrozenRegionTouched,
                "splice target lies in frozen text");
  }
  std::string new_text = region.text;
  new_text.replace(site.offset, length, std::string(replacement));
  return with_region_text(sketch, site.region_index, std::move(new_text));
}

std::string protected_digest(const ProofSketch& sketch) {
  std::string frozen_bytes;
  for (const Region& region : sketch.regions) {
    if (region.kind == RegionKind::kFrozen) frozen_bytes += region.text;
  }
  return sha256_hex(frozen_bytes);
}

}  // namespace nexus
