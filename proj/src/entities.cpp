#include "hanjakit/entities.hpp"

#include <algorithm>

#include "hanjakit/error.hpp"

namespace hanjakit {

namespace {

constexpr EntityType kTypes[] = {EntityType::kPerson, EntityType::kLocation,
                                 EntityType::kOrganization, EntityType::kMisc};

std::string describe(const EntitySpan& s) {
  return std::string(to_string(s.type)) + "[" + std::to_string(s.start) +
         "," + std::to_string(s.end) + ")";
}

void check_in_range(const EntitySpan& s, std::size_t length) {
  if (s.start >= s.end || s.end > length) {
    throw Error(Errc::kSpanOutOfRange,
                describe(s) + " is empty or exceeds length " +
                    std::to_string(length));
  }
}

}  // namespace

std::string_view to_string(EntityType t) {
  switch (t) {
    case EntityType::kPerson: return "Person";
    case EntityType::kLocation: return "Location";
    case EntityType::kOrganization: return "Organization";
    case EntityType::kMisc: return "Misc";
  }
  return "Misc";
}

std::string_view tag_suffix(EntityType t) {
  switch (t) {
    case EntityType::kPerson: return "PER";
    case EntityType::kLocation: return "LOC";
    case EntityType::kOrganization: return "ORG";
    case EntityType::kMisc: return "MISC";
  }
  return "MISC";
}

EntityType parse_entity_type(std::string_view name) {
  for (auto t : kTypes) {
    if (name == to_string(t) || name == tag_suffix(t)) return t;
  }
  throw Error(Errc::kUnknownTag,
              "unknown entity type '" + std::string(name) + "'");
}

std::string to_string(const Tag& tag) {
  switch (tag.kind) {
    case Tag::Kind::kOutside: return "O";
    case Tag::Kind::kBegin: return "B-" + std::string(tag_suffix(tag.type));
    case Tag::Kind::kInside: return "I-" + std::string(tag_suffix(tag.type));
  }
  return "O";
}

Tag parse_tag(std::string_view s) {
  if (s == "O") return Tag::outside();
  if (s.size() > 2 && s[1] == '-' && (s[0] == 'B' || s[0] == 'I')) {
    const auto suffix = s.substr(2);
    for (auto t : kTypes) {
      if (suffix == tag_suffix(t)) {
        return s[0] == 'B' ? Tag::begin(t) : Tag::inside(t);
      }
    }
  }
  throw Error(Errc::kUnknownTag, "unknown tag '" + std::string(s) + "'");
}

TagSeq parse_tags(std::span<const std::string> tags) {
  TagSeq out;
  out.reserve(tags.size());
  for (const auto& s : tags) out.push_back(parse_tag(s));
  return out;
}

std::vector<std::string> tag_strings(std::span<const Tag> tags) {
  std::vector<std::string> out;
  out.reserve(tags.size());
  for (const auto& t : tags) out.push_back(to_string(t));
  return out;
}

std::vector<EntitySpan> decode_iob2(std::span<const Tag> tags) {
  std::vector<EntitySpan> spans;
  bool open = false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto& tag = tags[i];
    const bool continues = open && tag.kind == Tag::Kind::kInside &&
                           spans.back().type == tag.type;
    if (continues) {
      spans.back().end = i + 1;
    } else if (tag.kind == Tag::Kind::kOutside) {
      open = false;
    } else {
      spans.push_back({i, i + 1, tag.type});
      open = true;
    }
  }
  return spans;
}

TagSeq encode_iob2(std::span<const EntitySpan> spans, std::size_t length) {
  std::vector<EntitySpan> sorted(spans.begin(), spans.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });
  TagSeq tags(length, Tag::outside());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const auto& s = sorted[k];
    check_in_range(s, length);
    if (k > 0 && sorted[k - 1].end > s.start) {
      throw Error(Errc::kOverlappingSpans,
                  describe(sorted[k - 1]) + " overlaps " + describe(s));
    }
    tags[s.start] = Tag::begin(s.type);
    for (auto i = s.start + 1; i < s.end; ++i) tags[i] = Tag::inside(s.type);
  }
  return tags;
}

std::vector<EntitySpan> add_span(std::span<const EntitySpan> spans,
                                 const EntitySpan& span, std::size_t length) {
  check_in_range(span, length);
  std::vector<EntitySpan> out;
  out.reserve(spans.size() + 1);
  for (const auto& s : spans) {
    if (!s.overlaps(span)) out.push_back(s);
  }
  const auto pos = std::lower_bound(
      out.begin(), out.end(), span,
      [](const auto& a, const auto& b) { return a.start < b.start; });
  out.insert(pos, span);
  return out;
}

std::vector<EntitySpan> remove_span_at(std::span<const EntitySpan> spans,
                                       std::size_t pos) {
  std::vector<EntitySpan> out;
  out.reserve(spans.size());
  for (const auto& s : spans) {
    if (!s.contains(pos)) out.push_back(s);
  }
  return out;
}

bool is_valid_span_store(std::span<const EntitySpan> spans,
                         std::size_t length) {
  for (std::size_t k = 0; k < spans.size(); ++k) {
    if (spans[k].start >= spans[k].end || spans[k].end > length) return false;
    if (k > 0 && spans[k - 1].end > spans[k].start) return false;
  }
  return true;
}

}  // namespace hanjakit
