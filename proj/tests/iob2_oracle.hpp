#pragma once

#include <random>
#include <vector>

#include "hanjakit/entities.hpp"

namespace hanjakit::testing {

inline bool continues(const Tag& t, EntityType type) {
  return t.kind != Tag::Kind::kOutside && t.type == type;
}

// Every candidate [i, j) is checked on its own: it is a span when position i
// starts an entity of some type, every later position is I of that type, and
// the run cannot be extended to the right. O(n^3) by construction.
inline std::vector<EntitySpan> brute_force_decode(const TagSeq& tags) {
  std::vector<EntitySpan> out;
  const auto n = tags.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (tags[i].kind == Tag::Kind::kOutside) continue;
    const auto type = tags[i].type;
    const bool starts = tags[i].kind == Tag::Kind::kBegin || i == 0 ||
                        !continues(tags[i - 1], type);
    if (!starts) continue;
    for (std::size_t j = i + 1; j <= n; ++j) {
      bool inner = true;
      for (std::size_t k = i + 1; k < j; ++k) {
        if (!(tags[k].kind == Tag::Kind::kInside && tags[k].type == type)) inner = false;
      }
      const bool closed = j == n || !(tags[j].kind == Tag::Kind::kInside &&
                                      tags[j].type == type);
      if (inner && closed) out.push_back({i, j, type});
    }
  }
  return out;
}

// O, B-PER, I-PER, B-LOC, I-LOC.
inline std::vector<Tag> five_tag_alphabet() {
  return {Tag::outside(), Tag::begin(EntityType::kPerson),
          Tag::inside(EntityType::kPerson), Tag::begin(EntityType::kLocation),
          Tag::inside(EntityType::kLocation)};
}

inline std::vector<Tag> full_tag_alphabet() {
  std::vector<Tag> out = {Tag::outside()};
  for (auto t : {EntityType::kPerson, EntityType::kLocation,
                 EntityType::kOrganization, EntityType::kMisc}) {
    out.push_back(Tag::begin(t));
    out.push_back(Tag::inside(t));
  }
  return out;
}

inline std::vector<EntitySpan> random_spans(std::mt19937_64& rng, std::size_t n) {
  std::vector<EntitySpan> spans;
  std::bernoulli_distribution open(0.3);
  std::uniform_int_distribution<int> type(0, 3);
  std::uniform_int_distribution<std::size_t> len(1, 4);
  for (std::size_t i = 0; i < n;) {
    if (open(rng)) {
      const auto end = std::min(n, i + len(rng));
      spans.push_back({i, end, static_cast<EntityType>(type(rng))});
      i = end;
    } else {
      ++i;
    }
  }
  return spans;
}

}  // namespace hanjakit::testing
