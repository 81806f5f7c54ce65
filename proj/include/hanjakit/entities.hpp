#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hanjakit {

enum class EntityType { kPerson, kLocation, kOrganization, kMisc };

// "Person", "Location", "Organization", "Misc".
std::string_view to_string(EntityType t);
// Wire abbreviation used in tags: PER, LOC, ORG, MISC.
std::string_view tag_suffix(EntityType t);
// Accepts either the full name or the tag suffix. Throws kUnknownTag.
EntityType parse_entity_type(std::string_view name);

// Half-open character range [start, end) over the raw text.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  EntityType type = EntityType::kMisc;

  bool contains(std::size_t pos) const { return start <= pos && pos < end; }
  bool overlaps(const EntitySpan& o) const {
    return start < o.end && o.start < end;
  }
  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

struct Tag {
  enum class Kind { kOutside, kBegin, kInside };
  Kind kind = Kind::kOutside;
  EntityType type = EntityType::kMisc;  // ignored for kOutside

  static Tag outside() { return {}; }
  static Tag begin(EntityType t) { return {Kind::kBegin, t}; }
  static Tag inside(EntityType t) { return {Kind::kInside, t}; }

  friend bool operator==(const Tag& a, const Tag& b) {
    return a.kind == b.kind &&
           (a.kind == Kind::kOutside || a.type == b.type);
  }
};

using TagSeq = std::vector<Tag>;

std::string to_string(const Tag& tag);
// `O`, `B-PER`, `I-LOC`, ... Throws Error(kUnknownTag).
Tag parse_tag(std::string_view s);
TagSeq parse_tags(std::span<const std::string> tags);
std::vector<std::string> tag_strings(std::span<const Tag> tags);

// Maximal B/I runs as spans. An I-t that does not continue a run of type t
// opens a new span.
std::vector<EntitySpan> decode_iob2(std::span<const Tag> tags);

// Throws kSpanOutOfRange or kOverlappingSpans.
TagSeq encode_iob2(std::span<const EntitySpan> spans, std::size_t length);

// Replace-on-overlap insert used by the editor. `length` is the document
// character count. Throws kSpanOutOfRange.
std::vector<EntitySpan> add_span(std::span<const EntitySpan> spans,
                                 const EntitySpan& span, std::size_t length);

std::vector<EntitySpan> remove_span_at(std::span<const EntitySpan> spans,
                                       std::size_t pos);

// Sorted by start, pairwise disjoint, every span non-empty.
bool is_valid_span_store(std::span<const EntitySpan> spans,
                         std::size_t length);

}  // namespace hanjakit
